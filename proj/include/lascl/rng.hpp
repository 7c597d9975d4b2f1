#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace lascl {

// Deterministic RNG used wherever a seed appears. Raw mt19937_64 output is
// mapped to ranges by hand so the draw sequence does not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Uniform integer in [0, n); n must be positive.
  uint64_t below(uint64_t n) { return engine_() % n; }

  // Fisher-Yates shuffle driven by below(), so it is reproducible everywhere.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<size_t>(below(i))]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lascl
