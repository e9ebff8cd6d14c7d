#include "m2spec/spectrum.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "m2spec/error.hpp"
#include "m2spec/field_io.hpp"

namespace m2spec {

// ------------------------------------------------------- TruncationPolicy

TruncationPolicy TruncationPolicy::cube_root() { return TruncationPolicy{}; }

TruncationPolicy TruncationPolicy::power(double a, double b) {
    TruncationPolicy p;
    p.family = Family::power;
    p.a = a;
    p.b = b;
    p.validate();
    return p;
}

TruncationPolicy TruncationPolicy::linear_fraction(double c) {
    TruncationPolicy p;
    p.family = Family::linear_fraction;
    p.c = c;
    p.validate();
    return p;
}

TruncationPolicy TruncationPolicy::constant(std::size_t n0) {
    TruncationPolicy p;
    p.family = Family::constant;
    p.n0 = n0;
    p.validate();
    return p;
}

namespace {

bool parse_number(std::string_view tok, double& out) {
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    return parse_double(tok, out);
}

}  // namespace

TruncationPolicy TruncationPolicy::parse(std::string_view text) {
    if (text == "cube-root" || text == "cuberoot") return cube_root();
    if (text == "fourth-root") return power(1.0, 0.25);
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw InvalidParameter("unknown truncation policy '" + std::string(text) + "'");
    const auto name = text.substr(0, colon);
    const auto args = text.substr(colon + 1);
    if (name == "power") {
        const auto comma = args.find(',');
        double a = 0, b = 0;
        if (comma == std::string_view::npos || !parse_number(args.substr(0, comma), a) ||
            !parse_number(args.substr(comma + 1), b))
            throw InvalidParameter("power policy expects 'power:a,b'");
        return power(a, b);
    }
    if (name == "linear") {
        double c = 0;
        if (!parse_number(args, c)) throw InvalidParameter("linear policy expects 'linear:c'");
        return linear_fraction(c);
    }
    if (name == "const" || name == "constant") {
        double n = 0;
        if (!parse_number(args, n) || n != std::floor(n) || n < 0)
            throw InvalidParameter("constant policy expects a nonnegative integer");
        return constant(static_cast<std::size_t>(n));
    }
    throw InvalidParameter("unknown truncation policy '" + std::string(text) + "'");
}

void TruncationPolicy::validate() const {
    switch (family) {
        case Family::cube_root: return;
        case Family::power:
            if (!(a > 0.0)) throw InvalidParameter("power policy needs a > 0");
            if (!(b >= 0.0) || !std::isfinite(b)) throw InvalidParameter("power policy needs b >= 0");
            return;
        case Family::linear_fraction:
            if (!(c > 0.0)) throw InvalidParameter("linear-fraction policy needs c > 0");
            return;
        case Family::constant:
            if (n0 < 1) throw InvalidParameter("constant policy needs n0 >= 1");
            return;
    }
}

bool TruncationPolicy::consistent() const {
    switch (family) {
        case Family::cube_root: return true;
        case Family::power: return a > 0.0 && b > 0.0 && b < 0.5;
        case Family::linear_fraction:
        case Family::constant: return false;
    }
    return false;
}

std::string TruncationPolicy::describe() const {
    std::ostringstream os;
    switch (family) {
        case Family::cube_root: os << "cube-root"; break;
        case Family::power: os << "power:" << format_double(a) << ',' << format_double(b); break;
        case Family::linear_fraction: os << "linear:" << format_double(c); break;
        case Family::constant: os << "const:" << n0; break;
    }
    return os.str();
}

namespace {

std::size_t integer_cube_root(std::size_t n) {
    auto r = static_cast<std::size_t>(std::cbrt(static_cast<double>(n)));
    while (r > 0 && r * r * r > n) --r;
    while ((r + 1) * (r + 1) * (r + 1) <= n) ++r;
    return r;
}

// floor() that forgives representation error just below an integer.
double snapped_floor(double r) {
    const double nearest = std::round(r);
    if (std::abs(r - nearest) <= 1e-9 * std::max(1.0, std::abs(r))) return nearest;
    return std::floor(r);
}

}  // namespace

PolicyResult policy_eval(const TruncationPolicy& policy, std::size_t sample_size) {
    if (sample_size < 2) throw InvalidParameter("policy evaluation needs N >= 2");
    policy.validate();
    const double big_n = static_cast<double>(sample_size);
    double raw = 0.0;
    switch (policy.family) {
        case TruncationPolicy::Family::cube_root:
            raw = static_cast<double>(integer_cube_root(sample_size));
            break;
        case TruncationPolicy::Family::power: raw = snapped_floor(policy.a * std::pow(big_n, policy.b)); break;
        case TruncationPolicy::Family::linear_fraction: raw = snapped_floor(policy.c * big_n); break;
        case TruncationPolicy::Family::constant: raw = static_cast<double>(policy.n0); break;
    }
    const double hi = static_cast<double>(sample_size - 1);
    const double clamped = std::clamp(raw, 1.0, hi);
    return {static_cast<std::size_t>(clamped), policy.consistent()};
}

// ---------------------------------------------------------- FrequencyGrid

FrequencyGrid::FrequencyGrid(std::size_t d, std::size_t points_per_dim) : d_(d), g_(points_per_dim) {
    if (d_ < 1) throw InvalidParameter("frequency grid dimension must be >= 1");
    if (g_ < 1) throw InvalidParameter("frequency grid needs at least one point per dimension");
    count_ = 1;
    for (std::size_t j = 0; j < d_; ++j)
        if (__builtin_mul_overflow(count_, g_, &count_)) throw OverflowError("grid node count overflows");
    twiddle_.resize(g_);
    twiddle_[0] = 1.0;
    for (std::size_t r = 1; 2 * r <= g_; ++r) {
        const double phase = -2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(g_);
        twiddle_[r] = cplx(std::cos(phase), std::sin(phase));
        twiddle_[g_ - r] = std::conj(twiddle_[r]);
    }
    if (g_ % 2 == 0) twiddle_[g_ / 2] = -1.0;
}

std::vector<std::size_t> FrequencyGrid::grid_index(std::size_t node) const {
    std::vector<std::size_t> idx(d_);
    for (std::size_t j = d_; j-- > 0;) {
        idx[j] = node % g_;
        node /= g_;
    }
    return idx;
}

std::size_t FrequencyGrid::node(std::span<const std::size_t> index) const {
    std::size_t n = 0;
    for (std::size_t j = 0; j < d_; ++j) n = n * g_ + index[j];
    return n;
}

double FrequencyGrid::angle(std::size_t g) const {
    return 2.0 * std::numbers::pi * static_cast<double>(g) / static_cast<double>(g_);
}

std::vector<double> FrequencyGrid::theta(std::size_t node) const {
    const auto idx = grid_index(node);
    std::vector<double> th(d_);
    for (std::size_t j = 0; j < d_; ++j) th[j] = angle(idx[j]);
    return th;
}

std::size_t FrequencyGrid::mirror(std::size_t node) const {
    auto idx = grid_index(node);
    for (auto& g : idx) g = (g_ - g) % g_;
    return this->node(idx);
}

// ----------------------------------------------------------- SpectrumGrid

SpectrumGrid::SpectrumGrid(FrequencyGrid grid, std::size_t rows, std::size_t cols, Provenance provenance)
    : grid_(std::move(grid)), rows_(rows), cols_(cols), provenance_(provenance) {
    if (rows_ < 1 || cols_ < 1) throw InvalidParameter("spectrum values need positive dimensions");
    std::size_t cells = 0;
    if (__builtin_mul_overflow(grid_.node_count(), rows_ * cols_, &cells))
        throw OverflowError("spectrum storage overflows");
    values_.assign(cells, cplx{});
}

std::span<const cplx> SpectrumGrid::node_values(std::size_t node) const {
    return std::span<const cplx>(values_).subspan(node * rows_ * cols_, rows_ * cols_);
}

std::span<cplx> SpectrumGrid::node_values(std::size_t node) {
    return std::span<cplx>(values_).subspan(node * rows_ * cols_, rows_ * cols_);
}

Eigen::MatrixXcd SpectrumGrid::at(std::size_t node) const {
    const auto v = node_values(node);
    Eigen::MatrixXcd out(rows_, cols_);
    for (std::size_t a = 0; a < rows_; ++a)
        for (std::size_t c = 0; c < cols_; ++c) out(a, c) = v[a * cols_ + c];
    return out;
}

void SpectrumGrid::set(std::size_t node, const Eigen::MatrixXcd& value) {
    if (static_cast<std::size_t>(value.rows()) != rows_ || static_cast<std::size_t>(value.cols()) != cols_)
        throw DimensionMismatch("node value has the wrong shape");
    auto v = node_values(node);
    for (std::size_t a = 0; a < rows_; ++a)
        for (std::size_t c = 0; c < cols_; ++c) v[a * cols_ + c] = value(a, c);
}

// ------------------------------------------------------ grid evaluation

namespace {

inline cplx mul(cplx a, cplx b) {
    return cplx(a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real());
}

// Separable evaluation of sum_{q} C[q_1..q_d, s] w[(pos_j(q_j) * g_j) mod G].
// `positions[j]` maps the input index along dimension j to its integer offset.
// Input layout: dimension 1 outermost, s innermost; output likewise with G per dimension.
std::vector<cplx> separable_transform(std::vector<cplx> tensor, const std::vector<std::vector<Index>>& positions,
                                      std::size_t entries, const FrequencyGrid& grid) {
    const std::size_t d = positions.size();
    const std::size_t g_count = grid.points_per_dim();
    const auto& w = grid.twiddles();
    const Index modulus = static_cast<Index>(g_count);
    std::vector<std::size_t> sizes(d);
    for (std::size_t j = 0; j < d; ++j) sizes[j] = positions[j].size();

    for (std::size_t j = 0; j < d; ++j) {
        std::size_t outer = 1;
        for (std::size_t i = 0; i < j; ++i) outer *= sizes[i];
        std::size_t inner = entries;
        for (std::size_t i = j + 1; i < d; ++i) inner *= sizes[i];
        const std::size_t len = sizes[j];

        // twiddle index table: pos(q) * g mod G
        std::vector<std::size_t> tw(len * g_count);
        for (std::size_t q = 0; q < len; ++q) {
            const Index p = ((positions[j][q] % modulus) + modulus) % modulus;
            for (std::size_t g = 0; g < g_count; ++g)
                tw[g * len + q] = static_cast<std::size_t>((p * static_cast<Index>(g)) % modulus);
        }

        std::vector<cplx> out(outer * g_count * inner, cplx{});
        for (std::size_t o = 0; o < outer; ++o) {
            const cplx* in_base = tensor.data() + o * len * inner;
            cplx* out_base = out.data() + o * g_count * inner;
            for (std::size_t g = 0; g < g_count; ++g) {
                cplx* dst = out_base + g * inner;
                for (std::size_t q = 0; q < len; ++q) {
                    const cplx f = w[tw[g * len + q]];
                    const cplx* src = in_base + q * inner;
                    for (std::size_t r = 0; r < inner; ++r) dst[r] += mul(src[r], f);
                }
            }
        }
        tensor = std::move(out);
        sizes[j] = g_count;
    }
    return tensor;
}

void hermitize_nodes(SpectrumGrid& spec) {
    const std::size_t m = spec.rows();
    for (std::size_t node = 0; node < spec.node_count(); ++node) {
        auto v = spec.node_values(node);
        for (std::size_t a = 0; a < m; ++a) {
            v[a * m + a] = cplx(v[a * m + a].real(), 0.0);
            for (std::size_t c = a + 1; c < m; ++c) {
                const cplx upper = 0.5 * (v[a * m + c] + std::conj(v[c * m + a]));
                v[a * m + c] = upper;
                v[c * m + a] = std::conj(upper);
            }
        }
    }
}

}  // namespace

SpectrumGrid periodogram(const CovarianceSequence& covs, const FrequencyGrid& grid, bool hermitize) {
    if (!covs.complete()) throw IncompleteLagWindow("covariance sequence does not cover its lag window");
    if (covs.dim() != grid.dim()) throw GridMismatch("grid dimension differs from the covariance lags");
    const std::size_t d = covs.dim();
    const std::size_t m = covs.channels();
    const std::size_t n = covs.truncation();
    std::vector<Index> lags_1d(2 * n + 1);
    for (std::size_t q = 0; q < lags_1d.size(); ++q) lags_1d[q] = static_cast<Index>(q) - static_cast<Index>(n);
    const std::vector<std::vector<Index>> positions(d, lags_1d);

    std::vector<cplx> tensor(covs.lag_count() * m * m);
    for (std::size_t pos = 0; pos < covs.lag_count(); ++pos) {
        const auto b = covs.block(pos);
        std::copy(b.begin(), b.end(), tensor.begin() + static_cast<std::ptrdiff_t>(pos * m * m));
    }
    SpectrumGrid spec(grid, m, m, covs.estimator() == EstimatorKind::exact ? Provenance::exact : Provenance::estimated);
    auto values = separable_transform(std::move(tensor), positions, m * m, grid);
    std::copy(values.begin(), values.end(), spec.data().begin());
    if (hermitize) hermitize_nodes(spec);
    return spec;
}

SpectrumGrid dft_periodogram(const FieldSample& y, const FrequencyGrid& grid) {
    const BlockShape& shape = y.shape();
    if (shape.dim() != grid.dim()) throw GridMismatch("grid dimension differs from the field");
    const std::size_t m = y.channels();
    std::vector<std::vector<Index>> positions(shape.dim());
    for (std::size_t j = 0; j < shape.dim(); ++j) {
        positions[j].resize(shape.extent(j));
        for (std::size_t t = 0; t < shape.extent(j); ++t) positions[j][t] = static_cast<Index>(t + 1);
    }
    std::vector<cplx> tensor(y.size());
    for (std::size_t i = 0; i < y.points(); ++i)
        for (std::size_t c = 0; c < m; ++c) tensor[i * m + c] = y.value(i, c);
    const auto transform = separable_transform(std::move(tensor), positions, m, grid);
    const double n0 = static_cast<double>(shape.cell_count());
    SpectrumGrid spec(grid, m, m, Provenance::estimated);
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
        const cplx* yv = transform.data() + node * m;
        auto v = spec.node_values(node);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t c = 0; c < m; ++c) v[a * m + c] = yv[a] * std::conj(yv[c]) / n0;
    }
    hermitize_nodes(spec);
    return spec;
}

// ------------------------------------------------------------ blocks

CrossSpectrumBlocks cross_spectrum_blocks(const SpectrumGrid& spec, std::size_t m_y, std::size_t m_u) {
    if (spec.rows() != spec.cols() || m_y + m_u != spec.rows() || m_y == 0 || m_u == 0)
        throw DimensionMismatch("split (" + std::to_string(m_y) + "," + std::to_string(m_u) +
                                ") does not partition a " + std::to_string(spec.rows()) + "x" +
                                std::to_string(spec.cols()) + " spectrum");
    CrossSpectrumBlocks out{SpectrumGrid(spec.grid(), m_y, m_y, spec.provenance()),
                            SpectrumGrid(spec.grid(), m_y, m_u, spec.provenance()),
                            SpectrumGrid(spec.grid(), m_u, m_u, spec.provenance())};
    const std::size_t m = spec.rows();
    for (std::size_t node = 0; node < spec.node_count(); ++node) {
        const auto v = spec.node_values(node);
        auto vy = out.y.node_values(node);
        auto vyu = out.yu.node_values(node);
        auto vu = out.u.node_values(node);
        for (std::size_t a = 0; a < m_y; ++a) {
            for (std::size_t c = 0; c < m_y; ++c) vy[a * m_y + c] = v[a * m + c];
            for (std::size_t c = 0; c < m_u; ++c) vyu[a * m_u + c] = v[a * m + m_y + c];
        }
        for (std::size_t a = 0; a < m_u; ++a)
            for (std::size_t c = 0; c < m_u; ++c) vu[a * m_u + c] = v[(m_y + a) * m + m_y + c];
    }
    return out;
}

SpectrumGrid reassemble_blocks(const CrossSpectrumBlocks& blocks) {
    const std::size_t m_y = blocks.y.rows();
    const std::size_t m_u = blocks.u.rows();
    const std::size_t m = m_y + m_u;
    if (!(blocks.y.grid() == blocks.u.grid()) || !(blocks.yu.grid() == blocks.u.grid()) ||
        blocks.yu.rows() != m_y || blocks.yu.cols() != m_u)
        throw DimensionMismatch("inconsistent cross-spectrum blocks");
    SpectrumGrid out(blocks.y.grid(), m, m, blocks.y.provenance());
    for (std::size_t node = 0; node < out.node_count(); ++node) {
        auto v = out.node_values(node);
        const auto vy = blocks.y.node_values(node);
        const auto vyu = blocks.yu.node_values(node);
        const auto vu = blocks.u.node_values(node);
        for (std::size_t a = 0; a < m_y; ++a) {
            for (std::size_t c = 0; c < m_y; ++c) v[a * m + c] = vy[a * m_y + c];
            for (std::size_t c = 0; c < m_u; ++c) {
                v[a * m + m_y + c] = vyu[a * m_u + c];
                v[(m_y + c) * m + a] = std::conj(vyu[a * m_u + c]);
            }
        }
        for (std::size_t a = 0; a < m_u; ++a)
            for (std::size_t c = 0; c < m_u; ++c) v[(m_y + a) * m + m_y + c] = vu[a * m_u + c];
    }
    return out;
}

// ---------------------------------------------------------- inversion

SpectrumGrid invert_spectrum(const SpectrumGrid& spec, double cond_limit) {
    if (spec.rows() != spec.cols()) throw DimensionMismatch("only square spectra can be inverted");
    const std::size_t m = spec.rows();
    SpectrumGrid out(spec.grid(), m, m, spec.provenance());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig;
    for (std::size_t node = 0; node < spec.node_count(); ++node) {
        const Eigen::MatrixXcd v = spec.at(node);
        eig.compute(v);
        if (eig.info() != Eigen::Success)
            throw NearSingularNode("eigen-decomposition failed", spec.grid().theta(node),
                                   std::numeric_limits<double>::infinity());
        const Eigen::VectorXd lambda = eig.eigenvalues();
        const double largest = lambda.cwiseAbs().maxCoeff();
        const double smallest = lambda.cwiseAbs().minCoeff();
        const double cond = smallest > 0.0 ? largest / smallest : std::numeric_limits<double>::infinity();
        if (!(cond <= cond_limit)) {
            std::ostringstream msg;
            msg << "near-singular spectrum at theta = (";
            const auto th = spec.grid().theta(node);
            for (std::size_t j = 0; j < th.size(); ++j) msg << (j ? ", " : "") << th[j];
            msg << "), condition " << cond;
            throw NearSingularNode(msg.str(), th, cond);
        }
        const Eigen::MatrixXcd inv =
            eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() * eig.eigenvectors().adjoint();
        out.set(node, 0.5 * (inv + inv.adjoint()));
    }
    return out;
}

double min_eigenvalue(const SpectrumGrid& spec) {
    if (spec.rows() != spec.cols()) throw DimensionMismatch("eigenvalues need a square spectrum");
    double lo = std::numeric_limits<double>::infinity();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig;
    for (std::size_t node = 0; node < spec.node_count(); ++node) {
        eig.compute(spec.at(node), Eigen::EigenvaluesOnly);
        lo = std::min(lo, eig.eigenvalues().minCoeff());
    }
    return lo;
}

// ------------------------------------------------------- exact spectra

SpectrumGrid exact_spectrum(const MAKernel& kernel, const FrequencyGrid& grid) {
    if (kernel.dim() != grid.dim()) throw GridMismatch("grid dimension differs from the kernel");
    const std::size_t m = kernel.outputs();
    const std::size_t p = kernel.inputs();
    const auto& w = grid.twiddles();
    const Index modulus = static_cast<Index>(grid.points_per_dim());
    SpectrumGrid spec(grid, m, m, Provenance::exact);
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
        const auto idx = grid.grid_index(node);
        Eigen::MatrixXcd transfer = Eigen::MatrixXcd::Zero(m, p);
        for (const auto& tap : kernel.taps()) {
            Index phase = 0;
            for (std::size_t j = 0; j < idx.size(); ++j)
                phase = (phase + ((tap.sigma[j] % modulus + modulus) % modulus) * static_cast<Index>(idx[j])) % modulus;
            transfer += tap.matrix * w[static_cast<std::size_t>(phase)];
        }
        spec.set(node, transfer * transfer.adjoint());
    }
    return spec;
}

SpectrumGrid exact_spectrum(const RadarModel& model, const FrequencyGrid& grid) {
    model.validate();
    if (grid.dim() != 3) throw GridMismatch("radar spectrum lives on a 3-D grid");
    const auto alpha = model.alpha();
    SpectrumGrid spec(grid, 1, 1, Provenance::exact);
    const auto& w = grid.twiddles();
    auto data = spec.data();
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
        const auto idx = grid.grid_index(node);
        cplx denom = 1.0;
        for (std::size_t j = 0; j < 3; ++j) denom -= alpha[j] * w[idx[j]];
        data[node] = 1.0 / std::norm(denom) + model.lambda2;
    }
    return spec;
}

SpectrumGrid exact_inverse_spectrum(const GraphicalModel& wspec, const FrequencyGrid& grid) {
    wspec.validate();
    if (grid.dim() != 1) throw GridMismatch("graphical model spectrum lives on a 1-D grid");
    const std::size_t m = wspec.size();
    SpectrumGrid spec(grid, m, m, Provenance::exact);
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
        const Eigen::MatrixXcd winv = wspec.inverse_transfer(grid.angle(node));
        const Eigen::MatrixXcd inv = winv.adjoint() * winv;
        spec.set(node, 0.5 * (inv + inv.adjoint()));
    }
    return spec;
}

SpectrumGrid exact_spectrum(const GraphicalModel& wspec, const FrequencyGrid& grid) {
    return invert_spectrum(exact_inverse_spectrum(wspec, grid));
}

void write_spectrum_csv(std::ostream& out, const SpectrumGrid& spec) {
    const std::size_t d = spec.grid().dim();
    for (std::size_t j = 0; j < d; ++j) out << (j ? "," : "") << "theta" << j + 1;
    for (std::size_t a = 0; a < spec.rows(); ++a)
        for (std::size_t c = 0; c < spec.cols(); ++c)
            out << ",re" << a + 1 << '_' << c + 1 << ",im" << a + 1 << '_' << c + 1;
    out << '\n';
    for (std::size_t node = 0; node < spec.node_count(); ++node) {
        const auto th = spec.grid().theta(node);
        for (std::size_t j = 0; j < d; ++j) out << (j ? "," : "") << format_double(th[j]);
        for (const cplx& v : spec.node_values(node))
            out << ',' << format_double(v.real()) << ',' << format_double(v.imag());
        out << '\n';
    }
}

}  // namespace m2spec
