#pragma once

#include <cstdint>
#include <vector>

namespace gmod {

// xoshiro256** seeded through splitmix64. Fixed algorithm so that seeded
// runs reproduce bit-for-bit on every platform, unlike the distributions
// in <random> which are implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& w : state_) w = splitmix64(x);
  }

  // Independent substream for work item `index` under the same master seed.
  // Serial and parallel drivers draw identical per-item randomness.
  static Rng substream(uint64_t seed, uint64_t index) {
    uint64_t x = seed;
    uint64_t a = splitmix64(x);
    uint64_t b = splitmix64(x);
    return Rng(a ^ (b + 0x9e3779b97f4a7c15ULL * (index + 1)));
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform integer in [0, n), unbiased via rejection.
  uint64_t below(uint64_t n) {
    const uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform double in [0, 1).
  double real01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * real01(); }

  template <class T>
  const T& pick(const std::vector<T>& items) {
    return items[below(items.size())];
  }

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  // Index drawn from unnormalized nonnegative weights.
  size_t weighted(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) total += w;
    double r = real01() * total;
    double acc = 0;
    for (size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (r < acc) return i;
    }
    return weights.size() - 1;
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t state_[4];
};

}  // namespace gmod
