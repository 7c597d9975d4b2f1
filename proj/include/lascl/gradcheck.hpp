#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lascl {

// Central-finite-difference audit of every analytic gradient path: the
// encoder backward pass and all five loss variants (embedding and center
// gradients). Each trial draws a fresh random scenario.
struct GradCheckReport {
  struct Entry {
    std::string component;
    double max_rel_err = 0.0;
    size_t coords_checked = 0;
  };
  std::vector<Entry> entries;
  double tolerance = 1e-4;

  bool passed() const {
    for (const auto& e : entries) {
      if (e.max_rel_err > tolerance) return false;
    }
    return true;
  }
};

GradCheckReport run_gradcheck(int trials, uint64_t seed);

}  // namespace lascl
