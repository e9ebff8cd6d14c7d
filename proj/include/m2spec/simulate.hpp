#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "m2spec/lattice.hpp"
#include "m2spec/rng.hpp"

namespace m2spec {

enum class NoiseKind { real_gaussian, circular_complex };

/// Finite-support impulse response sigma -> M(sigma) in C^{m x p}.
class MAKernel {
public:
    struct Tap {
        LagIndex sigma;
        Eigen::MatrixXcd matrix;
    };

    MAKernel(std::size_t d, std::size_t m, std::size_t p);

    /// Adds (or accumulates into) the tap at sigma.
    void add_tap(const LagIndex& sigma, const Eigen::MatrixXcd& matrix);
    void add_tap(const LagIndex& sigma, double scalar);

    std::size_t dim() const noexcept { return d_; }
    std::size_t outputs() const noexcept { return m_; }
    std::size_t inputs() const noexcept { return p_; }
    const std::vector<Tap>& taps() const noexcept { return taps_; }
    bool empty() const noexcept { return taps_.empty(); }
    bool is_real() const;

    /// Tap matrix at sigma, or nullptr outside the support.
    const Eigen::MatrixXcd* find(const LagIndex& sigma) const;

    /// Per-dimension [min, max] of the support; zeros for an empty kernel.
    std::vector<std::pair<Index, Index>> support_bounds() const;

private:
    std::size_t d_, m_, p_;
    std::vector<Tap> taps_;
};

/// First-order section H(z) = (b0 z + b1) / (z - pole), i.e.
/// (b0 + b1 z^-1) / (1 - pole z^-1) with z = e^{i theta}.
class RationalSection1D {
public:
    /// gain * (z - zero) / (z - pole)
    static RationalSection1D zero_pole_gain(cplx zero, cplx pole, cplx gain = 1.0);
    /// (b0 z + b1) / (z - pole); b0 = 0 gives a strictly proper section.
    static RationalSection1D numerator(cplx b0, cplx b1, cplx pole);
    /// The constant section H(z) = gain.
    static RationalSection1D constant(cplx gain);

    cplx b0() const noexcept { return b0_; }
    cplx b1() const noexcept { return b1_; }
    cplx pole() const noexcept { return pole_; }
    /// Finite zero -b1/b0; only meaningful when b0 != 0.
    std::optional<cplx> zero() const;
    bool invertible() const;
    bool is_real() const noexcept;

    /// H evaluated at z = e^{i theta}.
    cplx response(double theta) const;

private:
    RationalSection1D(cplx b0, cplx b1, cplx pole) : b0_(b0), b1_(b1), pole_(pole) {}
    cplx b0_, b1_, pole_;
};

enum class FilterMode { forward, inverse };

/// Runs the section (or its reciprocal) from zero state; drops the first
/// `burn_in` outputs.
std::vector<double> rational_filter_1d(const RationalSection1D& section, std::span<const double> input,
                                       FilterMode mode, std::size_t burn_in = 0);
std::vector<cplx> rational_filter_1d(const RationalSection1D& section, std::span<const cplx> input,
                                     FilterMode mode, std::size_t burn_in = 0);

/// Upper-triangular matrix of sections: the inverse transfer matrix W^{-1}(z).
class GraphicalModel {
public:
    explicit GraphicalModel(std::size_t m);

    void set(std::size_t row, std::size_t col, const RationalSection1D& section);
    const std::optional<RationalSection1D>& at(std::size_t row, std::size_t col) const;
    std::size_t size() const noexcept { return m_; }

    /// Throws unless upper triangular with invertible-stable diagonal sections.
    void validate() const;

    /// W^{-1}(e^{i theta}).
    Eigen::MatrixXcd inverse_transfer(double theta) const;

private:
    std::size_t m_;
    std::vector<std::optional<RationalSection1D>> entries_;
};

/// Scalar 3-D rational field y = v / (1 - <alpha, z^-1>) + w, alpha_j = rho_j e^{i omega_j}.
struct RadarModel {
    std::array<double, 3> rho{};
    std::array<double, 3> omega{};
    double lambda2 = 0.0;

    void validate() const;
    std::array<cplx, 3> alpha() const;
};

enum class Boundary {
    zero,   ///< noise outside the block is zero; output has the noise shape
    valid,  ///< output restricted to points whose every tap reads genuine noise
};

FieldSample gen_noise(const BlockShape& shape, std::size_t channels, NoiseKind kind, std::uint64_t seed);

/// y(t) = sum_sigma M(sigma) e(t - sigma).
FieldSample ma_filter(const MAKernel& kernel, const FieldSample& noise, Boundary boundary = Boundary::zero);

/// Stationary MA field on `shape`: noise is drawn on an enlarged block so the
/// output carries no boundary transient.
FieldSample gen_ma_field(const MAKernel& kernel, const BlockShape& shape, NoiseKind kind, std::uint64_t seed);

/// Solves W^{-1}(z) y = e by back substitution over rows.
FieldSample solve_graphical(const GraphicalModel& wspec, const FieldSample& noise);

FieldSample gen_graphical_field(const GraphicalModel& wspec, std::size_t length, std::uint64_t seed,
                                std::size_t burn_in = 1000);

/// Zero-boundary recursion y0(t) = sum_j alpha_j y0(t - e_j) + v(t) on v's block.
FieldSample radar_recursion(const RadarModel& model, const FieldSample& v);

FieldSample gen_radar_field(const RadarModel& model, const BlockShape& shape, std::uint64_t seed);
FieldSample gen_radar_field(const RadarModel& model, std::size_t n_per_dim, std::uint64_t seed);

struct EtfeDataset {
    std::vector<double> u;
    std::vector<double> y;
    double noise_std = 0.0;
};

/// Input: `input_filter` fed by white noise from rest. Output: g * u plus white
/// noise with std noise_ratio * max|noiseless output|.
EtfeDataset gen_etfe_dataset(std::span<const double> g, const RationalSection1D& input_filter,
                             std::size_t length, double noise_ratio, std::uint64_t seed);

/// g(t) = (1 + 25 ((t - 20) / 20)^2)^-1, t = 0..taps-1.
std::vector<double> runge_impulse(std::size_t taps);

/// Five-node benchmark W^{-1}(z) whose conditional-independence graph has
/// edges {1,4}, {2,3}, {3,5} (1-based).
GraphicalModel five_node_benchmark_model();

/// Direct causal convolution (g * u)(t), t = 0..len(u)-1, zero initial state.
std::vector<double> causal_convolve(std::span<const double> g, std::span<const double> u);

}  // namespace m2spec
