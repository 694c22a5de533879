#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace pterisk {

// Deterministic draws on top of mt19937_64. The standard library engine is
// bit-specified, but its distributions are not; every mapping from raw bits
// to a value lives here so results are identical across platforms and
// standard-library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit mantissa mapping.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, bound), rejection sampled to avoid modulo bias.
  uint64_t below(uint64_t bound) {
    if (bound <= 1) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Irwin-Hall approximation: sum of 12 uniforms minus 6 has zero mean and
  // unit variance. Pure arithmetic, no libm.
  double normal() {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += uniform01();
    return s - 6.0;
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Standard logistic noise via inverse CDF.
  double logistic() {
    double u = uniform01();
    if (u <= 0.0) u = 0x1.0p-53;
    return std::log(u / (1.0 - u));
  }

  // Fisher-Yates with explicit bounded draws.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[static_cast<size_t>(below(items.size()))];
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pterisk
