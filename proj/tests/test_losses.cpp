#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "lascl/error.hpp"
#include "lascl/losses.hpp"
#include "lascl/rng.hpp"

#include "test_support.hpp"

using lascl::LossOutput;
using lascl::LossVariant;
using lascl::Mat;
using lascl::Vec;

namespace {

// z1 = z2 = e1 in class 0, z3 = e2 in class 1.
const std::vector<Vec> kTriple = {{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
const std::vector<int> kTripleY = {0, 0, 1};

Mat two_class_scales(double off_diagonal) {
  Mat s(2, 2);
  s(0, 0) = 1.0;
  s(1, 1) = 1.0;
  s(0, 1) = off_diagonal;
  s(1, 0) = off_diagonal;
  return s;
}

void check_grad_against_fd(const std::function<double()>& value_of, std::vector<Vec>& z,
                           const std::vector<Vec>& grad_z, double tol = 1e-4) {
  double max_err = 0.0;
  for (size_t i = 0; i < z.size(); ++i) {
    for (size_t k = 0; k < z[i].size(); ++k) {
      const double fd = testsup::central_diff(value_of, z[i][k]);
      max_err = std::max(max_err, testsup::rel_err(grad_z[i][k], fd));
    }
  }
  CHECK(max_err <= tol);
}

}  // namespace

TEST_CASE("loss_scl matches the hand-computed three-point value") {
  const LossOutput out = lascl::loss_scl(kTriple, kTripleY, 1.0);
  // anchors 1 and 2 each contribute log(e^1 / e^0) = 1; anchor 3 has no
  // positive and is excluded, so the negated mean is -1
  CHECK(out.value == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(!out.degenerate);
  REQUIRE(out.grad_z.size() == 3);

  // the independent naive oracle agrees
  const auto oracle = testsup::oracle_instance_instance(kTriple, kTripleY, 1.0, nullptr);
  CHECK(out.value == doctest::Approx(oracle.value).epsilon(1e-12));
}

TEST_CASE("degenerate batches are flagged and contribute zero") {
  SUBCASE("single class means no negatives") {
    const LossOutput out = lascl::loss_scl(kTriple, {0, 0, 0}, 1.0);
    CHECK(out.value == 0.0);
    CHECK(out.degenerate);
    for (const auto& g : out.grad_z) {
      for (double v : g) CHECK(v == 0.0);
    }
  }
  SUBCASE("all distinct classes means no positives") {
    const LossOutput out = lascl::loss_scl(kTriple, {0, 1, 2}, 1.0);
    CHECK(out.value == 0.0);
    CHECK(out.degenerate);
  }
  SUBCASE("a batch of one is degenerate") {
    const LossOutput out = lascl::loss_scl({{1.0, 0.0}}, {0}, 1.0);
    CHECK(out.degenerate);
  }
}

TEST_CASE("loss_scl validates inputs") {
  CHECK_THROWS_AS(lascl::loss_scl(kTriple, {0, 0}, 1.0), lascl::Error);  // length mismatch
  CHECK_THROWS_AS(lascl::loss_scl(kTriple, kTripleY, 0.0), lascl::Error);
  CHECK_THROWS_AS(lascl::loss_scl(kTriple, kTripleY, -1.0), lascl::Error);
}

TEST_CASE("loss_sii with all-ones scales reproduces loss_scl bit for bit") {
  lascl::Rng rng(2025);
  for (int trial = 0; trial < 30; ++trial) {
    const auto b = testsup::random_batch(rng);
    const Mat ones = testsup::ones_matrix(static_cast<size_t>(b.num_classes));
    const LossOutput plain = lascl::loss_scl(b.z, b.y, b.tau);
    const LossOutput scaled = lascl::loss_sii(b.z, b.y, b.tau, ones);
    CHECK(scaled.value == plain.value);
    CHECK(scaled.degenerate == plain.degenerate);
    REQUIRE(scaled.grad_z.size() == plain.grad_z.size());
    for (size_t i = 0; i < plain.grad_z.size(); ++i) {
      CHECK(scaled.grad_z[i] == plain.grad_z[i]);
    }
  }
}

TEST_CASE("loss_sii ignores scaling where the negative similarity is zero") {
  // cos(z1, z3) = 0, so exp(0 / (tau * s)) = 1 for every s: same value as scl
  const LossOutput out = lascl::loss_sii(kTriple, kTripleY, 1.0, two_class_scales(0.5));
  CHECK(out.value == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("lowering a positive-similarity negative's scale raises the loss") {
  // class-0 anchors see the class-1 point at cosine ~0.8 > 0
  const std::vector<Vec> z = {{1.0, 0.0}, {0.9, 0.1}, {0.8, 0.6}};
  const std::vector<int> y = {0, 0, 1};
  const double at_full = lascl::loss_sii(z, y, 0.5, two_class_scales(1.0)).value;
  const double at_half = lascl::loss_sii(z, y, 0.5, two_class_scales(0.5)).value;
  const double at_tenth = lascl::loss_sii(z, y, 0.5, two_class_scales(0.1)).value;
  CHECK(at_half > at_full);
  CHECK(at_tenth > at_half);
}

TEST_CASE("loss_ic matches the hand-computed two-class value") {
  Mat u(2, 2);
  u(0, 0) = 1.0;  // center 0 = e1
  u(1, 1) = 1.0;  // center 1 = e2, orthogonal
  const LossOutput out = lascl::loss_ic({{1.0, 0.0}}, {0}, u, 1.0);
  // l = cos(z,u0)/tau - log exp(cos(z,u1)/tau) = 1 - 0
  CHECK(out.value == doctest::Approx(-1.0).epsilon(1e-9));
  REQUIRE(out.grad_u.rows == 2);
  REQUIRE(out.grad_u.cols == 2);
}

TEST_CASE("loss_ic requires at least two classes and flows into every center") {
  Mat u1(2, 1);
  u1(0, 0) = 1.0;
  try {
    lascl::loss_ic({{1.0, 0.0}}, {0}, u1, 1.0);
    FAIL("expected SingleClass");
  } catch (const lascl::Error& e) {
    CHECK(e.code() == lascl::ErrorCode::SingleClass);
  }

  lascl::Rng rng(404);
  const auto b = testsup::random_batch(rng);
  const LossOutput out = lascl::loss_ic(b.z, b.y, b.u, b.tau);
  for (size_t c = 0; c < b.u.cols; ++c) {
    double col_norm = 0.0;
    for (size_t r = 0; r < b.u.rows; ++r) col_norm += std::abs(out.grad_u(r, c));
    CHECK(col_norm > 0.0);  // every class sits in every denominator
  }
}

TEST_CASE("loss_sic with all-ones scales reproduces loss_ic bit for bit") {
  lascl::Rng rng(660);
  for (int trial = 0; trial < 30; ++trial) {
    const auto b = testsup::random_batch(rng);
    const Mat ones = testsup::ones_matrix(static_cast<size_t>(b.num_classes));
    const LossOutput plain = lascl::loss_ic(b.z, b.y, b.u, b.tau);
    const LossOutput scaled = lascl::loss_sic(b.z, b.y, b.u, b.tau, ones);
    CHECK(scaled.value == plain.value);
    for (size_t i = 0; i < plain.grad_z.size(); ++i) {
      CHECK(scaled.grad_z[i] == plain.grad_z[i]);
    }
    CHECK(scaled.grad_u.data == plain.grad_u.data);
  }
}

TEST_CASE("every loss value matches the naive-loop oracle") {
  lascl::Rng rng(112);
  const std::vector<LossVariant> variants = {LossVariant::SCL, LossVariant::LI,
                                             LossVariant::LIUC, LossVariant::LIC,
                                             LossVariant::LISC};
  for (int trial = 0; trial < 40; ++trial) {
    const auto b = testsup::random_batch(rng);
    for (const auto variant : variants) {
      const LossOutput out = lascl::loss_variant(variant, b.z, b.y, b.u, b.tau, b.s);
      const double expect = testsup::oracle_variant_value(variant, b.z, b.y, b.u, b.tau, b.s);
      CHECK(std::abs(out.value - expect) <= 1e-10);
    }
  }
}

TEST_CASE("variant values and gradients are sums of their parts") {
  lascl::Rng rng(73);
  const auto b = testsup::random_batch(rng);
  const LossOutput scl = lascl::loss_scl(b.z, b.y, b.tau);
  const LossOutput sii = lascl::loss_sii(b.z, b.y, b.tau, b.s);
  const LossOutput ic = lascl::loss_ic(b.z, b.y, b.u, b.tau);
  const LossOutput sic = lascl::loss_sic(b.z, b.y, b.u, b.tau, b.s);

  const LossOutput liuc = lascl::loss_variant(LossVariant::LIUC, b.z, b.y, b.u, b.tau, b.s);
  CHECK(liuc.value == scl.value + ic.value);
  const LossOutput lic = lascl::loss_variant(LossVariant::LIC, b.z, b.y, b.u, b.tau, b.s);
  CHECK(lic.value == sii.value + ic.value);
  const LossOutput lisc = lascl::loss_variant(LossVariant::LISC, b.z, b.y, b.u, b.tau, b.s);
  CHECK(lisc.value == sii.value + sic.value);
  for (size_t i = 0; i < b.z.size(); ++i) {
    for (size_t k = 0; k < b.z[i].size(); ++k) {
      CHECK(lisc.grad_z[i][k] == sii.grad_z[i][k] + sic.grad_z[i][k]);
    }
  }
  for (size_t i = 0; i < lisc.grad_u.data.size(); ++i) {
    CHECK(lisc.grad_u.data[i] == sic.grad_u.data[i]);  // sii contributes none
  }

  const LossOutput li = lascl::loss_variant(LossVariant::LI, b.z, b.y, b.u, b.tau, b.s);
  CHECK(li.value == sii.value);
  const LossOutput plain = lascl::loss_variant(LossVariant::SCL, b.z, b.y, b.u, b.tau, b.s);
  CHECK(plain.value == scl.value);
}

TEST_CASE("instance-only variants carry exactly zero center gradients") {
  lascl::Rng rng(88);
  const auto b = testsup::random_batch(rng);
  for (const auto variant : {LossVariant::SCL, LossVariant::LI}) {
    const LossOutput out = lascl::loss_variant(variant, b.z, b.y, b.u, b.tau, b.s);
    REQUIRE(out.grad_u.rows == b.u.rows);
    REQUIRE(out.grad_u.cols == b.u.cols);
    for (double v : out.grad_u.data) CHECK(v == 0.0);
    CHECK(!lascl::variant_updates_centers(variant));
  }
  for (const auto variant : {LossVariant::LIUC, LossVariant::LIC, LossVariant::LISC}) {
    CHECK(lascl::variant_updates_centers(variant));
  }
}

TEST_CASE("batch permutation moves the value by at most 1e-9") {
  lascl::Rng rng(513);
  for (int trial = 0; trial < 10; ++trial) {
    auto b = testsup::random_batch(rng);
    const double base = lascl::loss_variant(LossVariant::LISC, b.z, b.y, b.u, b.tau, b.s).value;
    std::vector<size_t> order(b.z.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<Vec> pz;
    std::vector<int> py;
    for (size_t idx : order) {
      pz.push_back(b.z[idx]);
      py.push_back(b.y[idx]);
    }
    const double permuted = lascl::loss_variant(LossVariant::LISC, pz, py, b.u, b.tau, b.s).value;
    CHECK(std::abs(base - permuted) <= 1e-9);
  }
}

TEST_CASE("analytic gradients match finite differences for every variant") {
  lascl::Rng rng(31415);
  const std::vector<LossVariant> variants = {LossVariant::SCL, LossVariant::LI,
                                             LossVariant::LIUC, LossVariant::LIC,
                                             LossVariant::LISC};
  for (const auto variant : variants) {
    CAPTURE(lascl::variant_name(variant));
    auto b = testsup::random_batch(rng);
    const LossOutput out = lascl::loss_variant(variant, b.z, b.y, b.u, b.tau, b.s);
    const auto value_of = [&]() {
      return lascl::loss_variant(variant, b.z, b.y, b.u, b.tau, b.s).value;
    };
    check_grad_against_fd(value_of, b.z, out.grad_z);

    double max_err = 0.0;
    for (size_t i = 0; i < b.u.data.size(); ++i) {
      const double fd = testsup::central_diff(value_of, b.u.data[i]);
      max_err = std::max(max_err, testsup::rel_err(out.grad_u.data[i], fd));
    }
    CHECK(max_err <= 1e-4);
  }
}

TEST_CASE("variant names parse and print consistently") {
  const std::vector<LossVariant> variants = {LossVariant::SCL, LossVariant::LI,
                                             LossVariant::LIUC, LossVariant::LIC,
                                             LossVariant::LISC};
  for (const auto variant : variants) {
    const auto parsed = lascl::parse_variant(lascl::variant_name(variant));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == variant);
  }
  CHECK(!lascl::parse_variant("bogus").has_value());
  CHECK(!lascl::parse_variant("").has_value());
}
