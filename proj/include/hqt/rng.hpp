/** \file
 * Deterministic seeding and a tiny counter-style generator.
 *
 * Monte-Carlo loops hand every sample its own stream derived from
 * (seed, sample index), which makes results independent of thread count
 * and iteration order.
 */
#pragma once

#include <cstdint>

namespace hqt {

/// splitmix64 finalizer (Steele, Lea, Flood 2014).
constexpr uint64_t splitmix64_mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Uniform random bit generator over the splitmix64 sequence.
class SplitMix64 {
  public:
    using result_type = uint64_t;
    explicit SplitMix64(uint64_t seed) : state_(seed) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~0ull; }
    result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ull;
        return splitmix64_mix(state_);
    }

  private:
    uint64_t state_;
};

/// Decorrelated stream seed for sample `index` under a user seed.
constexpr uint64_t stream_seed(uint64_t seed, uint64_t index) {
    return splitmix64_mix(seed ^ splitmix64_mix(index + 0x9e3779b97f4a7c15ull));
}

/// Uniform draw from [0, n) by rejection; stdlib-independent.
template <class Urbg>
uint64_t uniform_below(Urbg& rng, uint64_t n) {
    const uint64_t limit = Urbg::max() - Urbg::max() % n;
    uint64_t r = rng();
    while (r >= limit) r = rng();
    return r % n;
}

}  // namespace hqt
