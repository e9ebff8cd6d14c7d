#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "m2spec/lattice.hpp"
#include "m2spec/simulate.hpp"

namespace m2spec {

enum class EstimatorKind { unbiased, biased, exact };

const char* to_string(EstimatorKind kind);

/// Matrices R_k for every k in the lag window Lambda_n, stored row-major per lag
/// in lag_window order.
class CovarianceSequence {
public:
    CovarianceSequence(std::size_t d, std::size_t m, std::size_t n, EstimatorKind estimator,
                       ScalarKind scalar);

    std::size_t dim() const noexcept { return d_; }
    std::size_t channels() const noexcept { return m_; }
    std::size_t truncation() const noexcept { return n_; }
    EstimatorKind estimator() const noexcept { return estimator_; }
    ScalarKind scalar_kind() const noexcept { return scalar_; }
    std::size_t lag_count() const noexcept { return filled_.size(); }
    std::vector<LagIndex> lags() const { return lag_window(n_, d_); }

    bool has(const LagIndex& k) const;
    bool complete() const;
    Eigen::MatrixXcd at(const LagIndex& k) const;

    /// Stores R_k and its mirror R_{-k} = R_k^H.
    void set(const LagIndex& k, const Eigen::MatrixXcd& value);

    /// m*m row-major entries of the lag at window position `pos`.
    std::span<const cplx> block(std::size_t pos) const;
    std::span<cplx> block(std::size_t pos);
    void mark_filled(std::size_t pos) { filled_[pos] = 1; }
    bool filled(std::size_t pos) const { return filled_[pos] != 0; }

private:
    std::size_t d_, m_, n_;
    EstimatorKind estimator_;
    ScalarKind scalar_;
    std::vector<cplx> values_;
    std::vector<unsigned char> filled_;
};

/// Sample autocovariances R_k = (1/D) sum_{t in Xi_{N,k}} y(t+k) y(t)^H for
/// k in Lambda_n, with D = N_k (unbiased) or prod_j N_j (biased). Only the
/// lexicographic half window is summed; the rest is mirrored.
CovarianceSequence sample_autocov(const FieldSample& y, std::size_t n, EstimatorKind kind);

/// R_k = sum_sigma M(sigma + k) M(sigma)^H for k in Lambda_n.
CovarianceSequence exact_ma_autocov(const MAKernel& kernel, std::size_t n);

/// CSV: k_1..k_d, then m^2 row-major entries (re,im pairs for complex).
void write_covariance_csv(std::ostream& out, const CovarianceSequence& covs);

}  // namespace m2spec
