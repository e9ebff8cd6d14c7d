#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "m2spec/covariance.hpp"
#include "m2spec/lattice.hpp"
#include "m2spec/simulate.hpp"

namespace m2spec {

/// Rule N -> n = f(N) choosing the truncation point.
struct TruncationPolicy {
    enum class Family { cube_root, power, linear_fraction, constant };

    Family family = Family::cube_root;
    double a = 1.0;      // power: n = floor(a N^b)
    double b = 1.0 / 3;  //
    double c = 0.0;      // linear_fraction: n = floor(c N)
    std::size_t n0 = 1;  // constant

    static TruncationPolicy cube_root();
    static TruncationPolicy power(double a, double b);
    static TruncationPolicy linear_fraction(double c);
    static TruncationPolicy constant(std::size_t n0);

    /// Accepts "cube-root", "fourth-root", "power:a,b", "linear:c", "const:n".
    static TruncationPolicy parse(std::string_view text);

    void validate() const;
    /// f(N) -> infinity and f(N)^2 / N -> 0.
    bool consistent() const;
    std::string describe() const;
};

struct PolicyResult {
    std::size_t n = 0;
    bool consistent = false;
};

/// n = clamp(floor(f(N)), 1, N - 1).
PolicyResult policy_eval(const TruncationPolicy& policy, std::size_t sample_size);

/// Uniform grid theta_j = 2 pi g_j / G, g_j in [0, G), G^d nodes in canonical order.
class FrequencyGrid {
public:
    FrequencyGrid(std::size_t d, std::size_t points_per_dim);

    std::size_t dim() const noexcept { return d_; }
    std::size_t points_per_dim() const noexcept { return g_; }
    std::size_t node_count() const noexcept { return count_; }

    std::vector<std::size_t> grid_index(std::size_t node) const;
    std::size_t node(std::span<const std::size_t> index) const;
    std::vector<double> theta(std::size_t node) const;
    double angle(std::size_t g) const;
    /// Node at -theta (mod 2 pi).
    std::size_t mirror(std::size_t node) const;

    /// w[r] = exp(-2 pi i r / G) with w[G - r] == conj(w[r]) exactly.
    const std::vector<cplx>& twiddles() const noexcept { return twiddle_; }

    friend bool operator==(const FrequencyGrid& a, const FrequencyGrid& b) {
        return a.d_ == b.d_ && a.g_ == b.g_;
    }

private:
    std::size_t d_, g_, count_;
    std::vector<cplx> twiddle_;
};

enum class Provenance { estimated, exact };

/// Matrix-valued function sampled on a FrequencyGrid (rows x cols per node).
class SpectrumGrid {
public:
    SpectrumGrid(FrequencyGrid grid, std::size_t rows, std::size_t cols, Provenance provenance);

    const FrequencyGrid& grid() const noexcept { return grid_; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t node_count() const noexcept { return grid_.node_count(); }
    Provenance provenance() const noexcept { return provenance_; }

    std::span<const cplx> node_values(std::size_t node) const;
    std::span<cplx> node_values(std::size_t node);
    Eigen::MatrixXcd at(std::size_t node) const;
    void set(std::size_t node, const Eigen::MatrixXcd& value);

    std::span<const cplx> data() const noexcept { return values_; }
    std::span<cplx> data() noexcept { return values_; }

private:
    FrequencyGrid grid_;
    std::size_t rows_, cols_;
    Provenance provenance_;
    std::vector<cplx> values_;
};

/// Phi(theta) = sum_{k in Lambda_n} R_k exp(-i <k, theta>) on every node, each
/// node then replaced by (V + V^H) / 2 when `hermitize` is set.
SpectrumGrid periodogram(const CovarianceSequence& covs, const FrequencyGrid& grid, bool hermitize = true);

/// Full biased periodogram from the finite Fourier transform:
/// Y(theta) Y(theta)^H / prod_j N_j.
SpectrumGrid dft_periodogram(const FieldSample& y, const FrequencyGrid& grid);

struct CrossSpectrumBlocks {
    SpectrumGrid y;   ///< m_y x m_y
    SpectrumGrid yu;  ///< m_y x m_u
    SpectrumGrid u;   ///< m_u x m_u
};

CrossSpectrumBlocks cross_spectrum_blocks(const SpectrumGrid& spec, std::size_t m_y, std::size_t m_u);

/// Inverse of the partition; the lower-left block is yu^H.
SpectrumGrid reassemble_blocks(const CrossSpectrumBlocks& blocks);

/// Nodewise Hermitian inverse; throws NearSingularNode when the eigenvalue
/// condition number exceeds cond_limit.
SpectrumGrid invert_spectrum(const SpectrumGrid& spec, double cond_limit = 1e12);

/// Smallest Hermitian eigenvalue over all nodes.
double min_eigenvalue(const SpectrumGrid& spec);

SpectrumGrid exact_spectrum(const MAKernel& kernel, const FrequencyGrid& grid);
SpectrumGrid exact_spectrum(const RadarModel& model, const FrequencyGrid& grid);
SpectrumGrid exact_spectrum(const GraphicalModel& wspec, const FrequencyGrid& grid);

/// W^{-H} W^{-1} on the grid.
SpectrumGrid exact_inverse_spectrum(const GraphicalModel& wspec, const FrequencyGrid& grid);

/// CSV: theta_1..theta_d, then rows*cols re,im pairs per node.
void write_spectrum_csv(std::ostream& out, const SpectrumGrid& spec);

}  // namespace m2spec
