#pragma once

#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace m2spec {

using cplx = std::complex<double>;
using Index = std::int64_t;

enum class ScalarKind { real, complex };

const char* to_string(ScalarKind kind);

/// Lag vector k in Z^d.
class LagIndex {
public:
    LagIndex() = default;
    explicit LagIndex(std::vector<Index> components) : c_(std::move(components)) {}
    LagIndex(std::initializer_list<Index> components) : c_(components) {}

    std::size_t dim() const noexcept { return c_.size(); }
    Index operator[](std::size_t j) const { return c_[j]; }
    const std::vector<Index>& components() const noexcept { return c_; }

    LagIndex neg() const;
    /// Lexicographically at or after the origin; the half window that gets computed.
    bool nonnegative() const noexcept;

    friend bool operator==(const LagIndex&, const LagIndex&) = default;
    friend auto operator<=>(const LagIndex&, const LagIndex&) = default;

private:
    std::vector<Index> c_;
};

/// Extents (N_1, ..., N_d) of a lattice block.
class BlockShape {
public:
    BlockShape() = default;
    explicit BlockShape(std::vector<std::size_t> extents);
    static BlockShape cube(std::size_t n, std::size_t d);

    std::size_t dim() const noexcept { return extents_.size(); }
    std::size_t extent(std::size_t j) const { return extents_[j]; }
    const std::vector<std::size_t>& extents() const noexcept { return extents_; }
    std::size_t cell_count() const noexcept { return cells_; }
    std::size_t min_extent() const noexcept;
    bool hypercubic() const noexcept;

    /// Row-major strides, dimension 1 outermost.
    std::vector<std::size_t> strides() const;

    friend bool operator==(const BlockShape&, const BlockShape&) = default;

private:
    std::vector<std::size_t> extents_;
    std::size_t cells_ = 0;
};

/// Finite realization of an m-valued random field on a lattice block.
///
/// Storage is point-major, channel-minor: value (t, c) sits at t_flat * m + c,
/// with t_flat the canonical row-major position of t.
class FieldSample {
public:
    FieldSample() = default;
    FieldSample(BlockShape shape, std::size_t channels, ScalarKind kind);
    FieldSample(BlockShape shape, std::size_t channels, std::vector<double> data);
    FieldSample(BlockShape shape, std::size_t channels, std::vector<cplx> data);

    const BlockShape& shape() const noexcept { return shape_; }
    std::size_t channels() const noexcept { return channels_; }
    ScalarKind kind() const noexcept { return kind_; }
    bool is_real() const noexcept { return kind_ == ScalarKind::real; }
    std::size_t points() const noexcept { return shape_.cell_count(); }
    std::size_t size() const noexcept { return points() * channels_; }

    std::span<const double> real_data() const;
    std::span<double> real_data();
    std::span<const cplx> complex_data() const;
    std::span<cplx> complex_data();

    /// Value of channel c at flat point position p, promoted to complex.
    cplx value(std::size_t p, std::size_t c) const;

    /// Copy as a complex field (no-op copy if already complex).
    FieldSample to_complex() const;

    friend bool operator==(const FieldSample&, const FieldSample&) = default;

private:
    BlockShape shape_;
    std::size_t channels_ = 0;
    ScalarKind kind_ = ScalarKind::real;
    std::vector<double> re_;
    std::vector<cplx> cx_;
};

/// Lags with max_j |k_j| <= n, lexicographic order, (2n+1)^d entries.
std::vector<LagIndex> lag_window(std::size_t n, std::size_t d);

/// Number of lags in the window, with overflow detection.
std::size_t lag_window_size(std::size_t n, std::size_t d);

/// Position of k within lag_window(n, d).
std::size_t lag_position(const LagIndex& k, std::size_t n);

/// The summation set Xi_{N,k}: points t (1-based) with t and t+k both inside the block.
class IndexSet {
public:
    IndexSet(const BlockShape& shape, const LagIndex& k);

    /// Inclusive 1-based bounds per dimension.
    Index lower(std::size_t j) const { return lo_[j]; }
    Index upper(std::size_t j) const { return hi_[j]; }
    std::size_t dim() const noexcept { return lo_.size(); }
    std::size_t cardinality() const noexcept { return count_; }

    /// Visits every t in canonical order.
    void for_each(const std::function<void(std::span<const Index>)>& visit) const;
    std::vector<std::vector<Index>> points() const;

private:
    std::vector<Index> lo_;
    std::vector<Index> hi_;
    std::size_t count_ = 1;
};

/// Hypercubic convenience form: N per dimension.
IndexSet index_set(std::size_t n_per_dim, const LagIndex& k);

}  // namespace m2spec
