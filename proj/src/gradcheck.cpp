#include "lascl/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "lascl/encoder.hpp"
#include "lascl/error.hpp"
#include "lascl/losses.hpp"
#include "lascl/rng.hpp"

namespace lascl {

namespace {

constexpr double kStep = 1e-5;

// Relative error with an absolute floor: coordinates are compared at
// |a - fd| / max(|a|, |fd|, 1e-5), which tolerates finite-difference noise on
// near-zero gradients without hiding a wrong formula. Coordinates where both
// sides are below 1e-8 are skipped entirely.
double rel_err(double analytic, double fd) {
  const double mag = std::max(std::abs(analytic), std::abs(fd));
  if (mag <= 1e-8) return -1.0;  // skip
  return std::abs(analytic - fd) / std::max(mag, 1e-5);
}

void track(GradCheckReport::Entry& entry, double analytic, double fd) {
  const double err = rel_err(analytic, fd);
  if (err < 0.0) return;
  entry.max_rel_err = std::max(entry.max_rel_err, err);
  ++entry.coords_checked;
}

double central_diff(double& coord, const std::function<double()>& value) {
  const double orig = coord;
  coord = orig + kStep;
  const double hi = value();
  coord = orig - kStep;
  const double lo = value();
  coord = orig;
  return (hi - lo) / (2.0 * kStep);
}

void check_tensor(GradCheckReport::Entry& entry, Vec& tensor, const Vec& analytic,
                  const std::function<double()>& value) {
  for (size_t i = 0; i < tensor.size(); ++i) {
    track(entry, analytic[i], central_diff(tensor[i], value));
  }
}

FeatureVector random_fv(Rng& rng, uint32_t buckets, bool allow_empty) {
  std::map<uint32_t, double> counts;
  const size_t n = allow_empty ? rng.below(4) : 1 + rng.below(4);
  for (size_t i = 0; i < n; ++i) {
    counts[static_cast<uint32_t>(rng.below(buckets))] += 1.0 + static_cast<double>(rng.below(3));
  }
  FeatureVector fv;
  fv.num_buckets = buckets;
  fv.entries.assign(counts.begin(), counts.end());
  return fv;
}

void check_encoder(GradCheckReport::Entry& entry, uint64_t seed) {
  Rng rng(seed);
  EncoderDims dims{32, 5, 6, 4};
  EncoderParams params = init_params(dims, rng.next());

  std::vector<FeatureVector> fvs;
  for (int i = 0; i < 3; ++i) fvs.push_back(random_fv(rng, dims.buckets, i == 2));
  std::vector<Vec> grad_out(fvs.size(), Vec(dims.out_dim));
  for (auto& g : grad_out) {
    for (double& x : g) x = rng.uniform(-1.0, 1.0);
  }

  // Scalar objective: sum_i <grad_out[i], z_i>.
  const auto value = [&] {
    double acc = 0.0;
    const std::vector<Vec> z = encode_batch(params, fvs);
    for (size_t i = 0; i < z.size(); ++i) acc += dot(grad_out[i], z[i]);
    return acc;
  };
  const EncoderGrads analytic = backward(params, fvs, grad_out);

  check_tensor(entry, params.embed.data, analytic.embed.data, value);
  check_tensor(entry, params.w1.data, analytic.w1.data, value);
  check_tensor(entry, params.b1, analytic.b1, value);
  check_tensor(entry, params.w2.data, analytic.w2.data, value);
  check_tensor(entry, params.b2, analytic.b2, value);
}

struct LossScenario {
  std::vector<Vec> z;
  std::vector<int> y;
  Mat u;
  Mat s;
  double tau = 0.3;
};

LossScenario random_scenario(Rng& rng) {
  LossScenario sc;
  const size_t n = 4 + rng.below(5);   // 4..8
  const size_t C = 2 + rng.below(3);   // 2..4
  const size_t d = 3 + rng.below(3);   // 3..5
  sc.tau = rng.uniform(0.25, 1.0);

  sc.y.assign(n, 0);
  sc.y[1] = 0;  // guarantee one same-class pair and one other class
  sc.y[2] = 1;
  for (size_t i = 3; i < n; ++i) sc.y[i] = static_cast<int>(rng.below(C));

  sc.z.assign(n, Vec(d));
  for (auto& zi : sc.z) {
    for (double& x : zi) x = rng.uniform(-1.0, 1.0);
    if (norm(zi) < 1e-3) zi[0] += 0.5;  // keep away from the cosine kink at 0
  }
  sc.u = Mat(d, C);
  for (double& x : sc.u.data) x = rng.uniform(-1.0, 1.0);
  for (size_t c = 0; c < C; ++c) {
    Vec col = sc.u.col(c);
    if (norm(col) < 1e-3) {
      col[0] += 0.5;
      sc.u.set_col(c, col);
    }
  }
  sc.s = Mat(C, C);
  for (size_t a = 0; a < C; ++a) {
    sc.s(a, a) = 1.0;
    for (size_t b = a + 1; b < C; ++b) {
      const double v = rng.uniform(0.05, 1.0);
      sc.s(a, b) = v;
      sc.s(b, a) = v;
    }
  }
  return sc;
}

void check_loss(GradCheckReport::Entry& entry, LossVariant variant, uint64_t seed) {
  Rng rng(seed);
  LossScenario sc = random_scenario(rng);

  const auto value = [&] {
    return loss_variant(variant, sc.z, sc.y, sc.u, sc.tau, sc.s).value;
  };
  const LossOutput analytic = loss_variant(variant, sc.z, sc.y, sc.u, sc.tau, sc.s);

  for (size_t i = 0; i < sc.z.size(); ++i) {
    check_tensor(entry, sc.z[i], analytic.grad_z[i], value);
  }
  check_tensor(entry, sc.u.data, analytic.grad_u.data, value);
}

}  // namespace

GradCheckReport run_gradcheck(int trials, uint64_t seed) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");

  GradCheckReport report;
  report.entries.push_back({"encoder", 0.0, 0});
  const LossVariant variants[] = {LossVariant::SCL, LossVariant::LI, LossVariant::LIUC,
                                  LossVariant::LIC, LossVariant::LISC};
  for (LossVariant v : variants) report.entries.push_back({variant_name(v), 0.0, 0});

  for (int trial = 0; trial < trials; ++trial) {
    const uint64_t trial_seed = seed + static_cast<uint64_t>(trial) * 1000003ULL;
    check_encoder(report.entries[0], trial_seed);
    for (size_t v = 0; v < 5; ++v) {
      check_loss(report.entries[v + 1], variants[v], trial_seed + v + 1);
    }
  }
  return report;
}

}  // namespace lascl
