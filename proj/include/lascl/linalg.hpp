#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace lascl {

using Vec = std::vector<double>;

// Dense row-major matrix. Everything in this project is desk-scale, so a flat
// vector with an index helper beats pulling in a linear-algebra dependency.
struct Mat {
  size_t rows = 0;
  size_t cols = 0;
  Vec data;

  Mat() = default;
  Mat(size_t r, size_t c, double value = 0.0) : rows(r), cols(c), data(r * c, value) {}

  double& operator()(size_t r, size_t c) { return data[r * cols + c]; }
  double operator()(size_t r, size_t c) const { return data[r * cols + c]; }

  bool empty() const { return data.empty(); }
  void fill(double value) { std::fill(data.begin(), data.end(), value); }

  Vec col(size_t c) const {
    Vec out(rows);
    for (size_t r = 0; r < rows; ++r) out[r] = (*this)(r, c);
    return out;
  }

  void set_col(size_t c, const Vec& v) {
    for (size_t r = 0; r < rows; ++r) (*this)(r, c) = v[r];
  }
};

inline double dot(const Vec& a, const Vec& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

}  // namespace lascl
