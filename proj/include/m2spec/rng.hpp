#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace m2spec {

/// SplitMix64 finalizer: a bijective 64-bit mix.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based generator: output i is mix64(key + i * golden). Streams are
/// split by re-keying, so trials can be generated in any order.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Independent child stream; does not advance this generator.
    CounterRng split(std::uint64_t stream) const noexcept;

    double normal();

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::normal_distribution<double> gauss_{0.0, 1.0};
};

/// Seed of one Monte Carlo trial. Depends only on its arguments, so adding
/// sample sizes to a sweep leaves existing trials untouched.
std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t sample_size,
                         std::uint64_t trial) noexcept;

}  // namespace m2spec
