#include "m2spec/covariance.hpp"

#include <ostream>
#include <string>

#include "m2spec/error.hpp"
#include "m2spec/field_io.hpp"

namespace m2spec {

const char* to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::unbiased: return "unbiased";
        case EstimatorKind::biased: return "biased";
        case EstimatorKind::exact: return "exact";
    }
    return "?";
}

CovarianceSequence::CovarianceSequence(std::size_t d, std::size_t m, std::size_t n, EstimatorKind estimator,
                                       ScalarKind scalar)
    : d_(d), m_(m), n_(n), estimator_(estimator), scalar_(scalar) {
    if (m_ < 1) throw InvalidParameter("covariance needs at least one channel");
    const std::size_t count = lag_window_size(n_, d_);
    std::size_t cells = 0;
    if (__builtin_mul_overflow(count, m_ * m_, &cells)) throw OverflowError("covariance storage overflows");
    values_.assign(cells, cplx{});
    filled_.assign(count, 0);
}

bool CovarianceSequence::has(const LagIndex& k) const {
    if (k.dim() != d_) return false;
    for (std::size_t j = 0; j < d_; ++j)
        if (k[j] < -static_cast<Index>(n_) || k[j] > static_cast<Index>(n_)) return false;
    return filled_[lag_position(k, n_)] != 0;
}

bool CovarianceSequence::complete() const {
    for (unsigned char f : filled_)
        if (!f) return false;
    return true;
}

Eigen::MatrixXcd CovarianceSequence::at(const LagIndex& k) const {
    if (k.dim() != d_) throw DimensionMismatch("lag dimension mismatch");
    const auto b = block(lag_position(k, n_));
    Eigen::MatrixXcd out(m_, m_);
    for (std::size_t a = 0; a < m_; ++a)
        for (std::size_t c = 0; c < m_; ++c) out(a, c) = b[a * m_ + c];
    return out;
}

void CovarianceSequence::set(const LagIndex& k, const Eigen::MatrixXcd& value) {
    if (k.dim() != d_) throw DimensionMismatch("lag dimension mismatch");
    if (static_cast<std::size_t>(value.rows()) != m_ || static_cast<std::size_t>(value.cols()) != m_)
        throw DimensionMismatch("covariance matrix has the wrong size");
    const std::size_t pos = lag_position(k, n_);
    const std::size_t mirror = lag_count() - 1 - pos;
    auto b = block(pos);
    auto bm = block(mirror);
    for (std::size_t a = 0; a < m_; ++a)
        for (std::size_t c = 0; c < m_; ++c) {
            b[a * m_ + c] = value(a, c);
            bm[c * m_ + a] = std::conj(value(a, c));
        }
    if (pos == mirror) {
        // R_0 must be Hermitian; keep the upper triangle as given.
        for (std::size_t a = 0; a < m_; ++a)
            for (std::size_t c = 0; c < a; ++c) b[a * m_ + c] = std::conj(value(c, a));
    }
    filled_[pos] = filled_[mirror] = 1;
}

std::span<const cplx> CovarianceSequence::block(std::size_t pos) const {
    return std::span<const cplx>(values_).subspan(pos * m_ * m_, m_ * m_);
}

std::span<cplx> CovarianceSequence::block(std::size_t pos) {
    return std::span<cplx>(values_).subspan(pos * m_ * m_, m_ * m_);
}

namespace {

// Box of 0-based start points t with t and t + k inside the block.
struct LagBox {
    std::vector<std::size_t> lo, count;
    std::size_t shift = 0;  // flat offset of k
};

LagBox lag_box(const BlockShape& shape, const LagIndex& k, const std::vector<std::size_t>& strides) {
    LagBox box;
    const IndexSet xi(shape, k);
    box.lo.resize(shape.dim());
    box.count.resize(shape.dim());
    Index shift = 0;
    for (std::size_t j = 0; j < shape.dim(); ++j) {
        box.lo[j] = static_cast<std::size_t>(xi.lower(j) - 1);
        box.count[j] = static_cast<std::size_t>(xi.upper(j) - xi.lower(j) + 1);
        shift += k[j] * static_cast<Index>(strides[j]);
    }
    box.shift = static_cast<std::size_t>(shift);
    return box;
}

// Visits the contiguous innermost runs of the box in canonical order:
// visit(flat offset of the run start, run length).
template <class Visit>
void for_each_run(const LagBox& box, const std::vector<std::size_t>& strides, Visit&& visit) {
    const std::size_t d = box.lo.size();
    std::vector<std::size_t> t(box.lo);
    const std::size_t inner = box.count[d - 1];
    std::size_t outer = 1;
    for (std::size_t j = 0; j + 1 < d; ++j) outer *= box.count[j];
    for (std::size_t r = 0; r < outer; ++r) {
        std::size_t flat = 0;
        for (std::size_t j = 0; j < d; ++j) flat += t[j] * strides[j];
        visit(flat, inner);
        for (std::size_t j = d - 1; j-- > 0;) {
            if (t[j] + 1 < box.lo[j] + box.count[j]) {
                ++t[j];
                break;
            }
            t[j] = box.lo[j];
        }
    }
}

void accumulate_real(const FieldSample& y, const LagBox& box, const std::vector<std::size_t>& strides,
                     std::vector<double>& acc) {
    const std::size_t m = y.channels();
    const double* data = y.real_data().data();
    std::fill(acc.begin(), acc.end(), 0.0);
    if (m == 1) {
        double s = 0.0;
        for_each_run(box, strides, [&](std::size_t flat, std::size_t len) {
            const double* a = data + flat + box.shift;
            const double* b = data + flat;
            for (std::size_t i = 0; i < len; ++i) s += a[i] * b[i];
        });
        acc[0] = s;
        return;
    }
    for_each_run(box, strides, [&](std::size_t flat, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) {
            const double* lead = data + (flat + i + box.shift) * m;
            const double* lag = data + (flat + i) * m;
            for (std::size_t a = 0; a < m; ++a)
                for (std::size_t c = 0; c < m; ++c) acc[a * m + c] += lead[a] * lag[c];
        }
    });
}

void accumulate_complex(const FieldSample& y, const LagBox& box, const std::vector<std::size_t>& strides,
                        std::vector<double>& acc) {
    const std::size_t m = y.channels();
    const cplx* data = y.complex_data().data();
    std::fill(acc.begin(), acc.end(), 0.0);
    for_each_run(box, strides, [&](std::size_t flat, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) {
            const cplx* lead = data + (flat + i + box.shift) * m;
            const cplx* lag = data + (flat + i) * m;
            for (std::size_t a = 0; a < m; ++a) {
                const double ar = lead[a].real(), ai = lead[a].imag();
                for (std::size_t c = 0; c < m; ++c) {
                    const double br = lag[c].real(), bi = lag[c].imag();
                    // lead * conj(lag)
                    acc[2 * (a * m + c)] += ar * br + ai * bi;
                    acc[2 * (a * m + c) + 1] += ai * br - ar * bi;
                }
            }
        }
    });
}

}  // namespace

CovarianceSequence sample_autocov(const FieldSample& y, std::size_t n, EstimatorKind kind) {
    if (kind == EstimatorKind::exact) throw InvalidParameter("sample_autocov estimates; use exact_ma_autocov");
    if (y.points() == 0) throw InvalidParameter("empty field");
    const BlockShape& shape = y.shape();
    if (n + 1 > shape.min_extent())
        throw TruncationTooLarge("truncation n = " + std::to_string(n) + " exceeds N - 1 = " +
                                 std::to_string(shape.min_extent() - 1));
    const std::size_t d = shape.dim();
    const std::size_t m = y.channels();
    CovarianceSequence covs(d, m, n, kind, y.kind());
    const auto lags = lag_window(n, d);
    const auto strides = shape.strides();
    const std::size_t center = (lags.size() - 1) / 2;
    const double n0 = static_cast<double>(shape.cell_count());
    std::vector<double> acc(y.is_real() ? m * m : 2 * m * m);

    for (std::size_t pos = center; pos < lags.size(); ++pos) {
        const LagIndex& k = lags[pos];
        const LagBox box = lag_box(shape, k, strides);
        if (y.is_real())
            accumulate_real(y, box, strides, acc);
        else
            accumulate_complex(y, box, strides, acc);
        const double denom = kind == EstimatorKind::unbiased ? static_cast<double>(IndexSet(shape, k).cardinality())
                                                             : n0;
        auto b = covs.block(pos);
        auto bm = covs.block(lags.size() - 1 - pos);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t c = 0; c < m; ++c) {
                const cplx v = y.is_real() ? cplx(acc[a * m + c] / denom, 0.0)
                                           : cplx(acc[2 * (a * m + c)] / denom, acc[2 * (a * m + c) + 1] / denom);
                b[a * m + c] = v;
                if (pos != center) bm[c * m + a] = std::conj(v);
            }
        covs.mark_filled(pos);
        covs.mark_filled(lags.size() - 1 - pos);
    }
    return covs;
}

CovarianceSequence exact_ma_autocov(const MAKernel& kernel, std::size_t n) {
    const std::size_t d = kernel.dim();
    const std::size_t m = kernel.outputs();
    CovarianceSequence covs(d, m, n, EstimatorKind::exact,
                            kernel.is_real() ? ScalarKind::real : ScalarKind::complex);
    const auto lags = lag_window(n, d);
    const std::size_t center = (lags.size() - 1) / 2;
    for (std::size_t pos = center; pos < lags.size(); ++pos) {
        const LagIndex& k = lags[pos];
        Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(m, m);
        for (const auto& tap : kernel.taps()) {
            std::vector<Index> shifted(d);
            for (std::size_t j = 0; j < d; ++j) shifted[j] = tap.sigma[j] + k[j];
            if (const auto* lead = kernel.find(LagIndex(std::move(shifted))))
                r += (*lead) * tap.matrix.adjoint();
        }
        covs.set(k, r);
    }
    return covs;
}

void write_covariance_csv(std::ostream& out, const CovarianceSequence& covs) {
    const std::size_t d = covs.dim();
    const std::size_t m = covs.channels();
    const bool real = covs.scalar_kind() == ScalarKind::real;
    for (std::size_t j = 0; j < d; ++j) out << (j ? "," : "") << 'k' << j + 1;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t c = 0; c < m; ++c) {
            if (real)
                out << ",r" << a + 1 << '_' << c + 1;
            else
                out << ",re" << a + 1 << '_' << c + 1 << ",im" << a + 1 << '_' << c + 1;
        }
    out << '\n';
    const auto lags = covs.lags();
    for (std::size_t pos = 0; pos < lags.size(); ++pos) {
        for (std::size_t j = 0; j < d; ++j) out << (j ? "," : "") << lags[pos][j];
        for (const cplx& v : covs.block(pos)) {
            out << ',' << format_double(v.real());
            if (!real) out << ',' << format_double(v.imag());
        }
        out << '\n';
    }
}

}  // namespace m2spec
