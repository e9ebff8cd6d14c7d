#include "m2spec/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "m2spec/error.hpp"

namespace m2spec {

namespace {

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed + mix64(stream + 1));
}

// Odometer over a box of 0-based points; calls visit(point, flat) in canonical order.
template <class Visit>
void for_each_point(const BlockShape& shape, Visit&& visit) {
    std::vector<Index> t(shape.dim(), 0);
    for (std::size_t flat = 0; flat < shape.cell_count(); ++flat) {
        visit(t, flat);
        for (std::size_t j = t.size(); j-- > 0;) {
            if (t[j] + 1 < static_cast<Index>(shape.extent(j))) {
                ++t[j];
                break;
            }
            t[j] = 0;
        }
    }
}

bool is_real_scalar(cplx v) { return v.imag() == 0.0; }

}  // namespace

// ---------------------------------------------------------------- MAKernel

MAKernel::MAKernel(std::size_t d, std::size_t m, std::size_t p) : d_(d), m_(m), p_(p) {
    if (d_ < 1 || m_ < 1 || p_ < 1) throw InvalidParameter("MA kernel needs d, m, p >= 1");
}

void MAKernel::add_tap(const LagIndex& sigma, const Eigen::MatrixXcd& matrix) {
    if (sigma.dim() != d_) throw DimensionMismatch("tap position has the wrong dimension");
    if (static_cast<std::size_t>(matrix.rows()) != m_ || static_cast<std::size_t>(matrix.cols()) != p_)
        throw DimensionMismatch("tap matrix must be " + std::to_string(m_) + "x" + std::to_string(p_));
    for (auto& tap : taps_) {
        if (tap.sigma == sigma) {
            tap.matrix += matrix;
            return;
        }
    }
    taps_.push_back({sigma, matrix});
    std::sort(taps_.begin(), taps_.end(), [](const Tap& a, const Tap& b) { return a.sigma < b.sigma; });
}

void MAKernel::add_tap(const LagIndex& sigma, double scalar) {
    if (m_ != 1 || p_ != 1) throw DimensionMismatch("scalar tap on a matrix kernel");
    Eigen::MatrixXcd mat(1, 1);
    mat(0, 0) = scalar;
    add_tap(sigma, mat);
}

bool MAKernel::is_real() const {
    return std::all_of(taps_.begin(), taps_.end(),
                       [](const Tap& t) { return t.matrix.imag().cwiseAbs().maxCoeff() == 0.0; });
}

const Eigen::MatrixXcd* MAKernel::find(const LagIndex& sigma) const {
    auto it = std::lower_bound(taps_.begin(), taps_.end(), sigma,
                               [](const Tap& t, const LagIndex& s) { return t.sigma < s; });
    if (it == taps_.end() || it->sigma != sigma) return nullptr;
    return &it->matrix;
}

std::vector<std::pair<Index, Index>> MAKernel::support_bounds() const {
    std::vector<std::pair<Index, Index>> b(d_, {0, 0});
    if (taps_.empty()) return b;
    for (std::size_t j = 0; j < d_; ++j) b[j] = {taps_.front().sigma[j], taps_.front().sigma[j]};
    for (const auto& tap : taps_) {
        for (std::size_t j = 0; j < d_; ++j) {
            b[j].first = std::min(b[j].first, tap.sigma[j]);
            b[j].second = std::max(b[j].second, tap.sigma[j]);
        }
    }
    return b;
}

// ------------------------------------------------------- RationalSection1D

RationalSection1D RationalSection1D::zero_pole_gain(cplx zero, cplx pole, cplx gain) {
    return RationalSection1D(gain, -gain * zero, pole);
}

RationalSection1D RationalSection1D::numerator(cplx b0, cplx b1, cplx pole) {
    return RationalSection1D(b0, b1, pole);
}

RationalSection1D RationalSection1D::constant(cplx gain) {
    // gain * (z - 0) / (z - 0)
    return RationalSection1D(gain, 0.0, 0.0);
}

std::optional<cplx> RationalSection1D::zero() const {
    if (b0_ == cplx{}) return std::nullopt;
    return -b1_ / b0_;
}

bool RationalSection1D::invertible() const {
    return b0_ != cplx{} && std::abs(b1_) < std::abs(b0_);
}

bool RationalSection1D::is_real() const noexcept {
    return is_real_scalar(b0_) && is_real_scalar(b1_) && is_real_scalar(pole_);
}

cplx RationalSection1D::response(double theta) const {
    const cplx zinv = std::polar(1.0, -theta);
    return (b0_ + b1_ * zinv) / (1.0 - pole_ * zinv);
}

namespace {

template <class T, class C>
std::vector<T> run_section(C b0, C b1, C pole, std::span<const T> input, FilterMode mode,
                           std::size_t burn_in) {
    std::vector<T> out(input.size());
    T prev_in{};
    T prev_out{};
    if (mode == FilterMode::forward) {
        for (std::size_t t = 0; t < input.size(); ++t) {
            const T x = pole * prev_out + b0 * input[t] + b1 * prev_in;
            out[t] = x;
            prev_in = input[t];
            prev_out = x;
        }
    } else {
        for (std::size_t t = 0; t < input.size(); ++t) {
            const T x = (input[t] - pole * prev_in - b1 * prev_out) / b0;
            out[t] = x;
            prev_in = input[t];
            prev_out = x;
        }
    }
    if (burn_in >= out.size()) return {};
    out.erase(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(burn_in));
    return out;
}

void check_stable(const RationalSection1D& s, FilterMode mode) {
    if (mode == FilterMode::forward) {
        if (!(std::abs(s.pole()) < 1.0))
            throw InstabilityError("forward filtering needs |pole| < 1, got " +
                                   std::to_string(std::abs(s.pole())));
    } else if (!s.invertible()) {
        throw InstabilityError("inverse filtering needs a finite zero with |zero| < 1");
    }
}

}  // namespace

std::vector<double> rational_filter_1d(const RationalSection1D& section, std::span<const double> input,
                                       FilterMode mode, std::size_t burn_in) {
    check_stable(section, mode);
    if (!section.is_real()) throw InvalidParameter("complex section applied to a real sequence");
    return run_section<double, double>(section.b0().real(), section.b1().real(), section.pole().real(),
                                       input, mode, burn_in);
}

std::vector<cplx> rational_filter_1d(const RationalSection1D& section, std::span<const cplx> input,
                                     FilterMode mode, std::size_t burn_in) {
    check_stable(section, mode);
    return run_section<cplx, cplx>(section.b0(), section.b1(), section.pole(), input, mode, burn_in);
}

// ---------------------------------------------------------- GraphicalModel

GraphicalModel::GraphicalModel(std::size_t m) : m_(m), entries_(m * m) {
    if (m_ < 1) throw InvalidParameter("graphical model needs at least one node");
}

void GraphicalModel::set(std::size_t row, std::size_t col, const RationalSection1D& section) {
    if (row >= m_ || col >= m_) throw InvalidParameter("section index outside the matrix");
    if (col < row) throw InvalidParameter("W^-1 must be upper triangular");
    entries_[row * m_ + col] = section;
}

const std::optional<RationalSection1D>& GraphicalModel::at(std::size_t row, std::size_t col) const {
    return entries_.at(row * m_ + col);
}

void GraphicalModel::validate() const {
    for (std::size_t i = 0; i < m_; ++i) {
        const auto& diag = at(i, i);
        if (!diag) throw InvalidParameter("diagonal section " + std::to_string(i + 1) + " is missing");
        if (!diag->invertible())
            throw InstabilityError("diagonal section " + std::to_string(i + 1) +
                                   " is not invertible-stable (needs |zero| < 1)");
        for (std::size_t j = i; j < m_; ++j) {
            const auto& s = at(i, j);
            if (s && !(std::abs(s->pole()) < 1.0))
                throw InstabilityError("section (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                       ") has |pole| >= 1");
        }
    }
}

Eigen::MatrixXcd GraphicalModel::inverse_transfer(double theta) const {
    Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(m_, m_);
    for (std::size_t i = 0; i < m_; ++i)
        for (std::size_t j = i; j < m_; ++j)
            if (const auto& s = at(i, j)) w(i, j) = s->response(theta);
    return w;
}

GraphicalModel five_node_benchmark_model() {
    using S = RationalSection1D;
    GraphicalModel w(5);
    w.set(0, 0, S::zero_pole_gain(0.6, -0.5));
    w.set(0, 3, S::zero_pole_gain(-0.2, 0.3));
    w.set(1, 1, S::zero_pole_gain(0.0, 0.3));
    w.set(1, 2, S::numerator(0.0, 1.0, -0.5));
    w.set(2, 2, S::zero_pole_gain(-0.7, 0.3));
    w.set(2, 4, S::zero_pole_gain(-0.3, 0.3));
    w.set(3, 3, S::zero_pole_gain(-0.1, -0.5));
    w.set(4, 4, S::zero_pole_gain(-0.1, 0.1));
    return w;
}

// ------------------------------------------------------------- RadarModel

void RadarModel::validate() const {
    double sum = 0.0;
    for (double r : rho) {
        if (!(r >= 0.0)) throw InvalidParameter("radar pole moduli must be >= 0");
        sum += r;
    }
    if (!(sum < 1.0)) throw InstabilityError("radar recursion needs rho_1 + rho_2 + rho_3 < 1");
    if (!(lambda2 >= 0.0)) throw InvalidParameter("radar noise variance must be >= 0");
}

std::array<cplx, 3> RadarModel::alpha() const {
    return {std::polar(rho[0], omega[0]), std::polar(rho[1], omega[1]), std::polar(rho[2], omega[2])};
}

// -------------------------------------------------------------- generators

FieldSample gen_noise(const BlockShape& shape, std::size_t channels, NoiseKind kind, std::uint64_t seed) {
    CounterRng rng(seed);
    if (kind == NoiseKind::real_gaussian) {
        FieldSample out(shape, channels, ScalarKind::real);
        for (double& v : out.real_data()) v = rng.normal();
        return out;
    }
    FieldSample out(shape, channels, ScalarKind::complex);
    const double s = std::sqrt(0.5);
    for (cplx& v : out.complex_data()) {
        const double re = rng.normal();
        const double im = rng.normal();
        v = cplx(s * re, s * im);
    }
    return out;
}

FieldSample ma_filter(const MAKernel& kernel, const FieldSample& noise, Boundary boundary) {
    const std::size_t d = kernel.dim();
    const std::size_t m = kernel.outputs();
    const std::size_t p = kernel.inputs();
    if (noise.shape().dim() != d) throw DimensionMismatch("noise dimension differs from the kernel's");
    if (noise.channels() != p)
        throw DimensionMismatch("noise has " + std::to_string(noise.channels()) +
                                " channels, kernel expects " + std::to_string(p));

    const auto bounds = kernel.support_bounds();
    std::vector<std::size_t> ext(d);
    std::vector<Index> offset(d, 0);
    for (std::size_t j = 0; j < d; ++j) {
        const Index n = static_cast<Index>(noise.shape().extent(j));
        if (boundary == Boundary::valid) {
            const Index span = bounds[j].second - bounds[j].first;
            if (n - span < 1) throw DimensionMismatch("noise block smaller than the kernel support");
            ext[j] = static_cast<std::size_t>(n - span);
            offset[j] = bounds[j].second;
        } else {
            ext[j] = static_cast<std::size_t>(n);
        }
    }
    const BlockShape out_shape(ext);
    const auto in_strides = noise.shape().strides();
    const bool real = noise.is_real() && kernel.is_real();
    FieldSample out(out_shape, m, real ? ScalarKind::real : ScalarKind::complex);

    for (const auto& tap : kernel.taps()) {
        const Eigen::MatrixXcd& mat = tap.matrix;
        const Eigen::MatrixXd mat_re = mat.real();
        for_each_point(out_shape, [&](const std::vector<Index>& t, std::size_t flat) {
            std::size_t src = 0;
            for (std::size_t j = 0; j < d; ++j) {
                const Index s = t[j] + offset[j] - tap.sigma[j];
                if (s < 0 || s >= static_cast<Index>(noise.shape().extent(j))) return;
                src += static_cast<std::size_t>(s) * in_strides[j];
            }
            if (real) {
                auto in = noise.real_data();
                auto o = out.real_data();
                for (std::size_t a = 0; a < m; ++a) {
                    double acc = 0.0;
                    for (std::size_t b = 0; b < p; ++b) acc += mat_re(a, b) * in[src * p + b];
                    o[flat * m + a] += acc;
                }
            } else {
                auto o = out.complex_data();
                for (std::size_t a = 0; a < m; ++a) {
                    cplx acc{};
                    for (std::size_t b = 0; b < p; ++b) acc += mat(a, b) * noise.value(src, b);
                    o[flat * m + a] += acc;
                }
            }
        });
    }
    return out;
}

FieldSample gen_ma_field(const MAKernel& kernel, const BlockShape& shape, NoiseKind kind, std::uint64_t seed) {
    if (shape.dim() != kernel.dim()) throw DimensionMismatch("shape dimension differs from the kernel's");
    const auto bounds = kernel.support_bounds();
    std::vector<std::size_t> ext(shape.dim());
    for (std::size_t j = 0; j < shape.dim(); ++j)
        ext[j] = shape.extent(j) + static_cast<std::size_t>(bounds[j].second - bounds[j].first);
    const FieldSample noise = gen_noise(BlockShape(ext), kernel.inputs(), kind, seed);
    return ma_filter(kernel, noise, Boundary::valid);
}

FieldSample solve_graphical(const GraphicalModel& wspec, const FieldSample& noise) {
    wspec.validate();
    const std::size_t m = wspec.size();
    if (noise.shape().dim() != 1) throw DimensionMismatch("graphical process is one-dimensional");
    if (noise.channels() != m) throw DimensionMismatch("noise channels must equal the model size");
    if (!noise.is_real()) throw InvalidParameter("graphical process is driven by real noise");
    const std::size_t len = noise.points();
    auto e = noise.real_data();

    std::vector<std::vector<double>> y(m);
    std::vector<double> rhs(len);
    for (std::size_t i = m; i-- > 0;) {
        for (std::size_t t = 0; t < len; ++t) rhs[t] = e[t * m + i];
        for (std::size_t j = i + 1; j < m; ++j) {
            const auto& s = wspec.at(i, j);
            if (!s) continue;
            const auto contrib = rational_filter_1d(*s, y[j], FilterMode::forward);
            for (std::size_t t = 0; t < len; ++t) rhs[t] -= contrib[t];
        }
        y[i] = rational_filter_1d(*wspec.at(i, i), rhs, FilterMode::inverse);
    }
    FieldSample out(noise.shape(), m, ScalarKind::real);
    auto o = out.real_data();
    for (std::size_t t = 0; t < len; ++t)
        for (std::size_t i = 0; i < m; ++i) o[t * m + i] = y[i][t];
    return out;
}

FieldSample gen_graphical_field(const GraphicalModel& wspec, std::size_t length, std::uint64_t seed,
                                std::size_t burn_in) {
    const FieldSample noise =
        gen_noise(BlockShape({length + burn_in}), wspec.size(), NoiseKind::real_gaussian, seed);
    const FieldSample full = solve_graphical(wspec, noise);
    const std::size_t m = wspec.size();
    auto src = full.real_data();
    std::vector<double> kept(src.begin() + static_cast<std::ptrdiff_t>(burn_in * m), src.end());
    return FieldSample(BlockShape({length}), m, std::move(kept));
}

FieldSample radar_recursion(const RadarModel& model, const FieldSample& v) {
    model.validate();
    if (v.shape().dim() != 3 || v.channels() != 1)
        throw DimensionMismatch("radar field is scalar on a 3-D lattice");
    const FieldSample vc = v.to_complex();
    auto in = vc.complex_data();
    const auto alpha = model.alpha();
    const auto strides = v.shape().strides();
    FieldSample out(v.shape(), 1, ScalarKind::complex);
    auto y = out.complex_data();
    for_each_point(v.shape(), [&](const std::vector<Index>& t, std::size_t flat) {
        cplx acc = in[flat];
        for (std::size_t j = 0; j < 3; ++j)
            if (t[j] > 0) acc += alpha[j] * y[flat - strides[j]];
        y[flat] = acc;
    });
    return out;
}

FieldSample gen_radar_field(const RadarModel& model, const BlockShape& shape, std::uint64_t seed) {
    model.validate();
    const FieldSample v = gen_noise(shape, 1, NoiseKind::circular_complex, sub_seed(seed, 0));
    FieldSample y = radar_recursion(model, v);
    if (model.lambda2 > 0.0) {
        const FieldSample w = gen_noise(shape, 1, NoiseKind::circular_complex, sub_seed(seed, 1));
        const double s = std::sqrt(model.lambda2);
        auto yd = y.complex_data();
        auto wd = w.complex_data();
        for (std::size_t i = 0; i < yd.size(); ++i) yd[i] += s * wd[i];
    }
    return y;
}

FieldSample gen_radar_field(const RadarModel& model, std::size_t n_per_dim, std::uint64_t seed) {
    return gen_radar_field(model, BlockShape::cube(n_per_dim, 3), seed);
}

std::vector<double> causal_convolve(std::span<const double> g, std::span<const double> u) {
    std::vector<double> y(u.size(), 0.0);
    const std::size_t taps = std::min(g.size(), u.size());
    for (std::size_t s = 0; s < taps; ++s) {
        const double gs = g[s];
        if (gs == 0.0) continue;
        double* out = y.data() + s;
        const double* in = u.data();
        const std::size_t count = u.size() - s;
        for (std::size_t t = 0; t < count; ++t) out[t] += gs * in[t];
    }
    return y;
}

EtfeDataset gen_etfe_dataset(std::span<const double> g, const RationalSection1D& input_filter,
                             std::size_t length, double noise_ratio, std::uint64_t seed) {
    if (!(noise_ratio >= 0.0)) throw InvalidParameter("noise_ratio must be >= 0");
    const FieldSample e = gen_noise(BlockShape({length}), 1, NoiseKind::real_gaussian, sub_seed(seed, 0));
    EtfeDataset data;
    data.u = rational_filter_1d(input_filter, e.real_data(), FilterMode::forward);
    data.y = causal_convolve(g, data.u);
    double peak = 0.0;
    for (double v : data.y) peak = std::max(peak, std::abs(v));
    data.noise_std = noise_ratio * peak;
    if (data.noise_std > 0.0) {
        const FieldSample v = gen_noise(BlockShape({length}), 1, NoiseKind::real_gaussian, sub_seed(seed, 1));
        auto vd = v.real_data();
        for (std::size_t t = 0; t < length; ++t) data.y[t] += data.noise_std * vd[t];
    }
    return data;
}

std::vector<double> runge_impulse(std::size_t taps) {
    std::vector<double> g(taps);
    for (std::size_t t = 0; t < taps; ++t) {
        const double x = (static_cast<double>(t) - 20.0) / 20.0;
        g[t] = 1.0 / (1.0 + 25.0 * x * x);
    }
    return g;
}

}  // namespace m2spec
