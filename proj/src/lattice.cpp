#include "m2spec/lattice.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "m2spec/error.hpp"

namespace m2spec {

const char* to_string(ScalarKind kind) {
    return kind == ScalarKind::real ? "real" : "complex";
}

LagIndex LagIndex::neg() const {
    std::vector<Index> out(c_.size());
    std::transform(c_.begin(), c_.end(), out.begin(), [](Index v) { return -v; });
    return LagIndex(std::move(out));
}

bool LagIndex::nonnegative() const noexcept {
    for (Index v : c_) {
        if (v != 0) return v > 0;
    }
    return true;
}

BlockShape::BlockShape(std::vector<std::size_t> extents) : extents_(std::move(extents)) {
    if (extents_.empty()) throw InvalidParameter("block shape needs at least one dimension");
    cells_ = 1;
    for (std::size_t e : extents_) {
        if (e < 1) throw InvalidParameter("block extents must be >= 1");
        if (__builtin_mul_overflow(cells_, e, &cells_))
            throw OverflowError("block cell count overflows size_t");
    }
}

BlockShape BlockShape::cube(std::size_t n, std::size_t d) {
    return BlockShape(std::vector<std::size_t>(d, n));
}

std::size_t BlockShape::min_extent() const noexcept {
    return extents_.empty() ? 0 : *std::min_element(extents_.begin(), extents_.end());
}

bool BlockShape::hypercubic() const noexcept {
    return std::adjacent_find(extents_.begin(), extents_.end(), std::not_equal_to<>()) ==
           extents_.end();
}

std::vector<std::size_t> BlockShape::strides() const {
    std::vector<std::size_t> s(extents_.size(), 1);
    for (std::size_t j = extents_.size(); j-- > 1;) s[j - 1] = s[j] * extents_[j];
    return s;
}

FieldSample::FieldSample(BlockShape shape, std::size_t channels, ScalarKind kind)
    : shape_(std::move(shape)), channels_(channels), kind_(kind) {
    if (channels_ < 1) throw InvalidParameter("field needs at least one channel");
    if (kind_ == ScalarKind::real)
        re_.assign(size(), 0.0);
    else
        cx_.assign(size(), cplx{});
}

FieldSample::FieldSample(BlockShape shape, std::size_t channels, std::vector<double> data)
    : shape_(std::move(shape)), channels_(channels), kind_(ScalarKind::real), re_(std::move(data)) {
    if (channels_ < 1) throw InvalidParameter("field needs at least one channel");
    if (re_.size() != size())
        throw DimensionMismatch("field data length " + std::to_string(re_.size()) +
                                " != points * channels " + std::to_string(size()));
}

FieldSample::FieldSample(BlockShape shape, std::size_t channels, std::vector<cplx> data)
    : shape_(std::move(shape)), channels_(channels), kind_(ScalarKind::complex), cx_(std::move(data)) {
    if (channels_ < 1) throw InvalidParameter("field needs at least one channel");
    if (cx_.size() != size())
        throw DimensionMismatch("field data length " + std::to_string(cx_.size()) +
                                " != points * channels " + std::to_string(size()));
}

std::span<const double> FieldSample::real_data() const {
    if (kind_ != ScalarKind::real) throw InvalidParameter("real_data() on a complex field");
    return re_;
}

std::span<double> FieldSample::real_data() {
    if (kind_ != ScalarKind::real) throw InvalidParameter("real_data() on a complex field");
    return re_;
}

std::span<const cplx> FieldSample::complex_data() const {
    if (kind_ != ScalarKind::complex) throw InvalidParameter("complex_data() on a real field");
    return cx_;
}

std::span<cplx> FieldSample::complex_data() {
    if (kind_ != ScalarKind::complex) throw InvalidParameter("complex_data() on a real field");
    return cx_;
}

cplx FieldSample::value(std::size_t p, std::size_t c) const {
    const std::size_t i = p * channels_ + c;
    return kind_ == ScalarKind::real ? cplx(re_[i], 0.0) : cx_[i];
}

FieldSample FieldSample::to_complex() const {
    if (kind_ == ScalarKind::complex) return *this;
    std::vector<cplx> data(re_.begin(), re_.end());
    return FieldSample(shape_, channels_, std::move(data));
}

std::size_t lag_window_size(std::size_t n, std::size_t d) {
    if (d < 1) throw InvalidParameter("lag window dimension must be >= 1");
    std::size_t side = 0;
    if (__builtin_mul_overflow(n, std::size_t{2}, &side) || __builtin_add_overflow(side, 1, &side))
        throw OverflowError("lag window side overflows");
    std::size_t count = 1;
    for (std::size_t j = 0; j < d; ++j) {
        if (__builtin_mul_overflow(count, side, &count))
            throw OverflowError("lag window (2n+1)^d overflows the addressable count");
    }
    if (n > static_cast<std::size_t>(std::numeric_limits<Index>::max() / 2))
        throw OverflowError("lag window radius too large");
    return count;
}

std::vector<LagIndex> lag_window(std::size_t n, std::size_t d) {
    const std::size_t count = lag_window_size(n, d);
    std::vector<LagIndex> out;
    out.reserve(count);
    const Index r = static_cast<Index>(n);
    std::vector<Index> k(d, -r);
    for (std::size_t i = 0; i < count; ++i) {
        out.emplace_back(k);
        for (std::size_t j = d; j-- > 0;) {
            if (k[j] < r) {
                ++k[j];
                break;
            }
            k[j] = -r;
        }
    }
    return out;
}

std::size_t lag_position(const LagIndex& k, std::size_t n) {
    const Index r = static_cast<Index>(n);
    const std::size_t side = 2 * n + 1;
    std::size_t pos = 0;
    for (std::size_t j = 0; j < k.dim(); ++j) {
        if (k[j] < -r || k[j] > r) throw InvalidParameter("lag outside the window");
        pos = pos * side + static_cast<std::size_t>(k[j] + r);
    }
    return pos;
}

IndexSet::IndexSet(const BlockShape& shape, const LagIndex& k) {
    if (k.dim() != shape.dim())
        throw DimensionMismatch("lag dimension does not match the block dimension");
    lo_.resize(k.dim());
    hi_.resize(k.dim());
    for (std::size_t j = 0; j < k.dim(); ++j) {
        const Index n = static_cast<Index>(shape.extent(j));
        const Index kj = k[j];
        if ((kj < 0 ? -kj : kj) >= n)
            throw EmptyIndexSet("|k_" + std::to_string(j + 1) + "| = " +
                                std::to_string(kj < 0 ? -kj : kj) + " >= N = " + std::to_string(n));
        if (kj >= 0) {
            lo_[j] = 1;
            hi_[j] = n - kj;
        } else {
            lo_[j] = 1 - kj;
            hi_[j] = n;
        }
        count_ *= static_cast<std::size_t>(hi_[j] - lo_[j] + 1);
    }
}

void IndexSet::for_each(const std::function<void(std::span<const Index>)>& visit) const {
    std::vector<Index> t(lo_);
    for (std::size_t i = 0; i < count_; ++i) {
        visit(t);
        for (std::size_t j = t.size(); j-- > 0;) {
            if (t[j] < hi_[j]) {
                ++t[j];
                break;
            }
            t[j] = lo_[j];
        }
    }
}

std::vector<std::vector<Index>> IndexSet::points() const {
    std::vector<std::vector<Index>> out;
    out.reserve(count_);
    for_each([&](std::span<const Index> t) { out.emplace_back(t.begin(), t.end()); });
    return out;
}

IndexSet index_set(std::size_t n_per_dim, const LagIndex& k) {
    return IndexSet(BlockShape::cube(n_per_dim, k.dim()), k);
}

}  // namespace m2spec
