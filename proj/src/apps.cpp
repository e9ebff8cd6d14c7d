#include "m2spec/apps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "m2spec/error.hpp"
#include "m2spec/field_io.hpp"

namespace m2spec {

std::size_t TransferFunctionEstimate::defined_count() const {
    return static_cast<std::size_t>(std::count(defined.begin(), defined.end(), 1));
}

namespace {

void require_1d(const FrequencyGrid& grid) {
    if (grid.dim() != 1) throw GridMismatch("transfer-function estimates live on a 1-D grid");
}

void require_equal_lengths(std::span<const double> u, std::span<const double> y) {
    if (u.size() != y.size()) throw DimensionMismatch("input and output lengths differ");
    if (u.empty()) throw InvalidParameter("empty input sequence");
}

// X(theta_g) = sum_{t=1..N} x(t) e^{-i theta_g t}, by folding t mod G first.
std::vector<cplx> finite_fourier(std::span<const double> x, const FrequencyGrid& grid) {
    const std::size_t g_count = grid.points_per_dim();
    std::vector<double> folded(g_count, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) folded[(i + 1) % g_count] += x[i];
    const auto& w = grid.twiddles();
    std::vector<cplx> out(g_count);
    for (std::size_t g = 0; g < g_count; ++g) {
        cplx acc{};
        for (std::size_t r = 0; r < g_count; ++r) acc += folded[r] * w[(r * g) % g_count];
        out[g] = acc;
    }
    return out;
}

TransferFunctionEstimate ratio_estimate(const FrequencyGrid& grid, const std::vector<cplx>& num,
                                        const std::vector<double>& den_modulus, const std::vector<cplx>& den,
                                        std::string method) {
    TransferFunctionEstimate tf{grid, std::vector<cplx>(grid.node_count()),
                                std::vector<unsigned char>(grid.node_count(), 0), std::move(method)};
    const double top = *std::max_element(den_modulus.begin(), den_modulus.end());
    const double floor = 1e-12 * top;
    for (std::size_t g = 0; g < grid.node_count(); ++g) {
        if (!(top > 0.0) || !(den_modulus[g] > floor)) continue;
        const cplx v = num[g] / den[g];
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) continue;
        tf.values[g] = v;
        tf.defined[g] = 1;
    }
    if (tf.defined_count() == 0) throw UndefinedTransfer("input spectrum vanishes at every grid node");
    return tf;
}

}  // namespace

TransferFunctionEstimate etfe_raw(std::span<const double> u, std::span<const double> y, const FrequencyGrid& grid) {
    require_1d(grid);
    require_equal_lengths(u, y);
    const auto un = finite_fourier(u, grid);
    const auto yn = finite_fourier(y, grid);
    std::vector<double> mod(un.size());
    for (std::size_t g = 0; g < un.size(); ++g) mod[g] = std::abs(un[g]);
    return ratio_estimate(grid, yn, mod, un, "raw-etfe");
}

TransferFunctionEstimate etfe_smoothed(std::span<const double> u, std::span<const double> y,
                                       const TruncationPolicy& policy, const FrequencyGrid& grid) {
    require_1d(grid);
    require_equal_lengths(u, y);
    const std::size_t length = u.size();
    const std::size_t n = policy_eval(policy, length).n;
    std::vector<double> z(2 * length);
    for (std::size_t t = 0; t < length; ++t) {
        z[2 * t] = y[t];
        z[2 * t + 1] = u[t];
    }
    const FieldSample field(BlockShape({length}), 2, std::move(z));
    const auto covs = sample_autocov(field, n, EstimatorKind::biased);
    const auto blocks = cross_spectrum_blocks(periodogram(covs, grid), 1, 1);
    std::vector<cplx> num(grid.node_count()), den(grid.node_count());
    std::vector<double> mod(grid.node_count());
    for (std::size_t g = 0; g < grid.node_count(); ++g) {
        num[g] = blocks.yu.data()[g];
        den[g] = blocks.u.data()[g];
        mod[g] = std::abs(den[g]);
    }
    return ratio_estimate(grid, num, mod, den, "smoothed(" + policy.describe() + ")");
}

std::vector<double> impulse_from_tf(const TransferFunctionEstimate& tf, std::size_t horizon, bool check_real) {
    require_1d(tf.grid);
    const std::size_t g_count = tf.grid.points_per_dim();
    if (g_count < horizon + 1) throw InvalidParameter("grid has fewer points than the requested horizon");
    const std::size_t defined = tf.defined_count();
    if (10 * (g_count - defined) >= g_count)
        throw UndefinedTransfer(std::to_string(g_count - defined) + " of " + std::to_string(g_count) +
                                " nodes undefined; at most 10% can be interpolated");

    std::vector<cplx> filled = tf.values;
    if (defined < g_count) {
        for (std::size_t g = 0; g < g_count; ++g) {
            if (tf.defined[g]) continue;
            std::size_t back = 1, fwd = 1;
            while (!tf.defined[(g + g_count - back) % g_count]) ++back;
            while (!tf.defined[(g + fwd) % g_count]) ++fwd;
            const cplx left = tf.values[(g + g_count - back) % g_count];
            const cplx right = tf.values[(g + fwd) % g_count];
            const double s = static_cast<double>(back) / static_cast<double>(back + fwd);
            filled[g] = left + s * (right - left);
        }
    }

    const auto& w = tf.grid.twiddles();
    std::vector<double> out(horizon + 1);
    double max_re = 0.0, max_im = 0.0;
    for (std::size_t t = 0; t <= horizon; ++t) {
        cplx acc{};
        for (std::size_t g = 0; g < g_count; ++g) acc += filled[g] * std::conj(w[(g * t) % g_count]);
        acc /= static_cast<double>(g_count);
        out[t] = acc.real();
        max_re = std::max(max_re, std::abs(acc.real()));
        max_im = std::max(max_im, std::abs(acc.imag()));
    }
    if (check_real && max_im > 1e-6 * max_re)
        throw InvalidParameter("impulse response has a non-negligible imaginary part");
    return out;
}

void write_transfer_csv(std::ostream& out, const TransferFunctionEstimate& tf) {
    out << "node,re,im,defined\n";
    for (std::size_t g = 0; g < tf.values.size(); ++g) {
        out << g << ',';
        if (tf.defined[g])
            out << format_double(tf.values[g].real()) << ',' << format_double(tf.values[g].imag()) << ",1\n";
        else
            out << ",,0\n";
    }
}

// ------------------------------------------------------------- topology

void GraphTopology::add_edge(std::size_t i, std::size_t j) {
    if (i == j) throw InvalidParameter("self-loops are not edges");
    if (i >= m_ || j >= m_) throw InvalidParameter("edge endpoint out of range");
    edges_.emplace(std::min(i, j), std::max(i, j));
}

bool GraphTopology::has_edge(std::size_t i, std::size_t j) const {
    return edges_.contains({std::min(i, j), std::max(i, j)});
}

EntryNorm parse_entry_norm(std::string_view text) {
    if (text == "l1-mean") return EntryNorm::l1_mean;
    if (text == "l1") return EntryNorm::l1;
    if (text == "sup") return EntryNorm::sup;
    throw InvalidParameter("unknown entry norm '" + std::string(text) + "'");
}

const char* to_string(EntryNorm norm) {
    switch (norm) {
        case EntryNorm::l1_mean: return "l1-mean";
        case EntryNorm::l1: return "l1";
        case EntryNorm::sup: return "sup";
    }
    return "?";
}

Eigen::MatrixXd entry_norms(const SpectrumGrid& spec, EntryNorm norm) {
    const std::size_t rows = spec.rows(), cols = spec.cols();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(rows, cols);
    for (std::size_t node = 0; node < spec.node_count(); ++node) {
        const auto v = spec.node_values(node);
        for (std::size_t a = 0; a < rows; ++a)
            for (std::size_t c = 0; c < cols; ++c) {
                const double mag = std::abs(v[a * cols + c]);
                if (norm == EntryNorm::sup)
                    acc(a, c) = std::max(acc(a, c), mag);
                else
                    acc(a, c) += mag;
            }
    }
    const double nodes = static_cast<double>(spec.node_count());
    if (norm == EntryNorm::l1_mean) acc /= nodes;
    if (norm == EntryNorm::l1)
        acc *= std::pow(2.0 * std::numbers::pi, static_cast<double>(spec.grid().dim())) / nodes;
    return acc;
}

GraphTopology topology_from_inverse(const SpectrumGrid& inverse, double c, EntryNorm norm) {
    if (inverse.rows() != inverse.cols()) throw DimensionMismatch("topology needs a square spectrum");
    if (!(c >= 0.0)) throw InvalidParameter("threshold c must be nonnegative");
    const auto norms = entry_norms(inverse, norm);
    const std::size_t m = inverse.rows();
    GraphTopology graph(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            if (std::max(norms(i, j), norms(j, i)) >= c) graph.add_edge(i, j);
    return graph;
}

GraphTopology graph_topology(const SpectrumGrid& spec, double c, EntryNorm norm) {
    if (spec.grid().dim() != 1) throw GridMismatch("topology selection works on 1-D spectra");
    return topology_from_inverse(invert_spectrum(spec), c, norm);
}

void write_edge_list(std::ostream& out, const GraphTopology& graph) {
    for (const auto& [i, j] : graph.edges()) out << i + 1 << ' ' << j + 1 << '\n';
}

// ----------------------------------------------------------------- peak

PeakEstimate radar_peak(const SpectrumGrid& spec) {
    if (spec.rows() != 1 || spec.cols() != 1) throw DimensionMismatch("peak search needs a scalar spectrum");
    const auto data = spec.data();
    std::size_t best = 0;
    double lo = data[0].real();
    for (std::size_t node = 1; node < data.size(); ++node) {
        const double v = data[node].real();
        if (v > data[best].real()) best = node;
        lo = std::min(lo, v);
    }
    PeakEstimate peak;
    peak.node = best;
    peak.value = data[best].real();
    peak.omega_hat = spec.grid().theta(best);
    peak.degenerate = !(peak.value > lo);
    return peak;
}

}  // namespace m2spec
