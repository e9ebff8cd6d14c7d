#include "m2spec/rng.hpp"

namespace m2spec {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(mix64(seed ^ mix64(stream * kGolden + 0x632be59bd9b4e019ULL))) {}

CounterRng::result_type CounterRng::operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

CounterRng CounterRng::split(std::uint64_t stream) const noexcept {
    return CounterRng(key_, stream + 1);
}

double CounterRng::normal() { return gauss_(*this); }

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t sample_size,
                         std::uint64_t trial) noexcept {
    std::uint64_t h = mix64(base_seed + kGolden);
    h = mix64(h ^ (sample_size * 0xd6e8feb86659fd93ULL));
    h = mix64(h ^ (trial + 0xa0761d6478bd642fULL));
    return h;
}

}  // namespace m2spec
