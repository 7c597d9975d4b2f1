#include "lascl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lascl/encoder.hpp"
#include "lascl/error.hpp"

namespace lascl {

const char* variant_name(LossVariant variant) {
  switch (variant) {
    case LossVariant::SCL: return "scl";
    case LossVariant::LI: return "li";
    case LossVariant::LIUC: return "liuc";
    case LossVariant::LIC: return "lic";
    case LossVariant::LISC: return "lisc";
  }
  return "?";
}

std::optional<LossVariant> parse_variant(const std::string& name) {
  if (name == "scl") return LossVariant::SCL;
  if (name == "li") return LossVariant::LI;
  if (name == "liuc") return LossVariant::LIUC;
  if (name == "lic") return LossVariant::LIC;
  if (name == "lisc") return LossVariant::LISC;
  return std::nullopt;
}

bool variant_updates_centers(LossVariant variant) {
  return variant == LossVariant::LIUC || variant == LossVariant::LIC ||
         variant == LossVariant::LISC;
}

namespace {

void check_batch(const std::vector<Vec>& z, const std::vector<int>& y, double tau) {
  if (z.size() != y.size()) {
    throw Error(ErrorCode::ShapeMismatch, "batch has " + std::to_string(z.size()) +
                                              " embeddings but " + std::to_string(y.size()) +
                                              " labels");
  }
  if (tau <= 0.0) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  for (size_t i = 1; i < z.size(); ++i) {
    if (z[i].size() != z[0].size()) {
      throw Error(ErrorCode::ShapeMismatch, "embeddings differ in width");
    }
  }
}

// d cos(a,b) / d a = b/D - cos * (|b|/D) * a/|a|, with D = |a||b| + eps and
// the a/|a| factor taken as zero at a = 0. Adds g times that into grad_a.
void add_cos_grad(Vec& grad_a, double g, const Vec& a, const Vec& b, double na, double nb,
                  double cos_ab) {
  const double D = na * nb + kCosineEps;
  const double c1 = g / D;
  const double c2 = (na > 0.0) ? g * cos_ab * nb / (D * na) : 0.0;
  for (size_t d = 0; d < a.size(); ++d) grad_a[d] += c1 * b[d] - c2 * a[d];
}

// Shared core of loss_scl / loss_sii; s == nullptr means all scales are 1,
// which multiplies out exactly so both entry points share one float path.
LossOutput instance_instance(const std::vector<Vec>& z, const std::vector<int>& y, double tau,
                             const Mat* s) {
  check_batch(z, y, tau);
  const size_t n = z.size();
  const size_t dim = n ? z[0].size() : 0;
  if (s != nullptr) {
    if (s->rows != s->cols) throw Error(ErrorCode::ShapeMismatch, "scale matrix is not square");
    for (int label : y) {
      if (label < 0 || static_cast<size_t>(label) >= s->rows) {
        throw Error(ErrorCode::ShapeMismatch,
                    "label " + std::to_string(label) + " outside the scale matrix");
      }
    }
  }

  LossOutput out;
  out.grad_z.assign(n, Vec(dim, 0.0));
  if (n < 2) {
    out.degenerate = true;
    return out;
  }

  Vec norms(n);
  for (size_t i = 0; i < n; ++i) norms[i] = norm(z[i]);
  Mat cos(n, n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const double c = dot(z[i], z[j]) / (norms[i] * norms[j] + kCosineEps);
      cos(i, j) = c;
      cos(j, i) = c;
    }
  }

  // coef(i,m): d(sum of anchor terms)/d cos(i,m); scaled by -1/counted later.
  Mat coef(n, n);
  Vec exponents(n), probs(n);
  size_t counted = 0;
  double total = 0.0;

  for (size_t i = 0; i < n; ++i) {
    std::vector<size_t> pos, neg;
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      (y[j] == y[i] ? pos : neg).push_back(j);
    }
    if (pos.empty() || neg.empty()) continue;
    ++counted;

    const double pos_coef = 1.0 / (static_cast<double>(pos.size()) * tau);
    double anchor = 0.0;
    for (size_t j : pos) {
      anchor += cos(i, j) * pos_coef;
      coef(i, j) += pos_coef;
    }

    double mx = -HUGE_VAL;
    for (size_t idx = 0; idx < neg.size(); ++idx) {
      const size_t k = neg[idx];
      const double scale = (s != nullptr) ? (*s)(static_cast<size_t>(y[i]),
                                                 static_cast<size_t>(y[k]))
                                          : 1.0;
      exponents[idx] = cos(i, k) / (tau * scale);
      mx = std::max(mx, exponents[idx]);
    }
    double denom = 0.0;
    for (size_t idx = 0; idx < neg.size(); ++idx) {
      probs[idx] = std::exp(exponents[idx] - mx);
      denom += probs[idx];
    }
    anchor -= mx + std::log(denom);

    for (size_t idx = 0; idx < neg.size(); ++idx) {
      const size_t k = neg[idx];
      const double scale = (s != nullptr) ? (*s)(static_cast<size_t>(y[i]),
                                                 static_cast<size_t>(y[k]))
                                          : 1.0;
      coef(i, k) -= (probs[idx] / denom) / (tau * scale);
    }
    total += anchor;
  }

  if (counted == 0) {
    out.degenerate = true;
    return out;
  }
  const double scale = -1.0 / static_cast<double>(counted);
  out.value = scale * total;
  for (size_t i = 0; i < n; ++i) {
    for (size_t m = 0; m < n; ++m) {
      if (i == m || coef(i, m) == 0.0) continue;
      const double g = coef(i, m) * scale;
      add_cos_grad(out.grad_z[i], g, z[i], z[m], norms[i], norms[m], cos(i, m));
      add_cos_grad(out.grad_z[m], g, z[m], z[i], norms[m], norms[i], cos(i, m));
    }
  }
  return out;
}

// Shared core of loss_ic / loss_sic against the class-center columns of u.
LossOutput instance_center(const std::vector<Vec>& z, const std::vector<int>& y, const Mat& u,
                           double tau, const Mat* s) {
  check_batch(z, y, tau);
  const size_t n = z.size();
  const size_t C = u.cols;
  if (C < 2) throw Error(ErrorCode::SingleClass, "instance-center losses need >= 2 classes");
  if (s != nullptr && (s->rows != C || s->cols != C)) {
    throw Error(ErrorCode::ShapeMismatch, "scale matrix does not match the class count");
  }
  for (int label : y) {
    if (label < 0 || static_cast<size_t>(label) >= C) {
      throw Error(ErrorCode::ShapeMismatch, "label " + std::to_string(label) +
                                                " outside the class centers");
    }
  }
  for (const Vec& zi : z) {
    if (zi.size() != u.rows) {
      throw Error(ErrorCode::ShapeMismatch, "embedding width does not match the centers");
    }
  }

  LossOutput out;
  out.grad_z.assign(n, Vec(u.rows, 0.0));
  out.grad_u = Mat(u.rows, C);
  if (n == 0) {
    out.degenerate = true;
    return out;
  }

  std::vector<Vec> ucols(C);
  Vec unorms(C);
  for (size_t c = 0; c < C; ++c) {
    ucols[c] = u.col(c);
    unorms[c] = norm(ucols[c]);
  }

  Mat cos(n, C), coef(n, C);
  Vec exponents(C), probs(C);
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double ni = norm(z[i]);
    for (size_t c = 0; c < C; ++c) {
      cos(i, c) = dot(z[i], ucols[c]) / (ni * unorms[c] + kCosineEps);
    }
    const size_t yi = static_cast<size_t>(y[i]);
    double anchor = cos(i, yi) / tau;
    coef(i, yi) += 1.0 / tau;

    double mx = -HUGE_VAL;
    size_t count = 0;
    for (size_t c = 0; c < C; ++c) {
      if (c == yi) continue;
      const double scale = (s != nullptr) ? (*s)(yi, c) : 1.0;
      exponents[count] = cos(i, c) / (tau * scale);
      mx = std::max(mx, exponents[count]);
      ++count;
    }
    double denom = 0.0;
    for (size_t idx = 0; idx < count; ++idx) {
      probs[idx] = std::exp(exponents[idx] - mx);
      denom += probs[idx];
    }
    anchor -= mx + std::log(denom);

    size_t idx = 0;
    for (size_t c = 0; c < C; ++c) {
      if (c == yi) continue;
      const double scale = (s != nullptr) ? (*s)(yi, c) : 1.0;
      coef(i, c) -= (probs[idx] / denom) / (tau * scale);
      ++idx;
    }
    total += anchor;
  }

  const double scale = -1.0 / static_cast<double>(n);
  out.value = scale * total;
  Vec grad_col(u.rows);
  for (size_t c = 0; c < C; ++c) {
    std::fill(grad_col.begin(), grad_col.end(), 0.0);
    for (size_t i = 0; i < n; ++i) {
      if (coef(i, c) == 0.0) continue;
      const double g = coef(i, c) * scale;
      const double ni = norm(z[i]);
      add_cos_grad(out.grad_z[i], g, z[i], ucols[c], ni, unorms[c], cos(i, c));
      add_cos_grad(grad_col, g, ucols[c], z[i], unorms[c], ni, cos(i, c));
    }
    out.grad_u.set_col(c, grad_col);
  }
  return out;
}

LossOutput combine(LossOutput a, const LossOutput& b) {
  a.value += b.value;
  for (size_t i = 0; i < a.grad_z.size(); ++i) {
    for (size_t d = 0; d < a.grad_z[i].size(); ++d) a.grad_z[i][d] += b.grad_z[i][d];
  }
  a.grad_u = b.grad_u;  // the instance-instance half carries no center grad
  return a;
}

}  // namespace

LossOutput loss_scl(const std::vector<Vec>& z, const std::vector<int>& y, double tau) {
  return instance_instance(z, y, tau, nullptr);
}

LossOutput loss_sii(const std::vector<Vec>& z, const std::vector<int>& y, double tau,
                    const Mat& s) {
  return instance_instance(z, y, tau, &s);
}

LossOutput loss_ic(const std::vector<Vec>& z, const std::vector<int>& y, const Mat& u,
                   double tau) {
  return instance_center(z, y, u, tau, nullptr);
}

LossOutput loss_sic(const std::vector<Vec>& z, const std::vector<int>& y, const Mat& u,
                    double tau, const Mat& s) {
  return instance_center(z, y, u, tau, &s);
}

LossOutput loss_variant(LossVariant variant, const std::vector<Vec>& z,
                        const std::vector<int>& y, const Mat& u, double tau, const Mat& s) {
  switch (variant) {
    case LossVariant::SCL: {
      LossOutput out = loss_scl(z, y, tau);
      out.grad_u = Mat(u.rows, u.cols);
      return out;
    }
    case LossVariant::LI: {
      LossOutput out = loss_sii(z, y, tau, s);
      out.grad_u = Mat(u.rows, u.cols);
      return out;
    }
    case LossVariant::LIUC:
      return combine(loss_scl(z, y, tau), loss_ic(z, y, u, tau));
    case LossVariant::LIC:
      return combine(loss_sii(z, y, tau, s), loss_ic(z, y, u, tau));
    case LossVariant::LISC:
      return combine(loss_sii(z, y, tau, s), loss_sic(z, y, u, tau, s));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown loss variant");
}

}  // namespace lascl
