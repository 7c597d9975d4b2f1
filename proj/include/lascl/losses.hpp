#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lascl/linalg.hpp"

namespace lascl {

// Loss family. All variants are contrastive log-ratios over cosine
// similarities; the value returned is the negated batch mean, so lower is
// better and values may be negative.
//
//   SCL   instance-instance, plain temperature
//   LI    instance-instance, negatives scaled by class similarity
//   LIUC  SCL + instance-center term (unscaled centers)
//   LIC   LI + instance-center term
//   LISC  LI + similarity-scaled instance-center term
enum class LossVariant { SCL, LI, LIUC, LIC, LISC };

const char* variant_name(LossVariant variant);
std::optional<LossVariant> parse_variant(const std::string& name);

// True when the variant's loss carries gradient into the class centers.
bool variant_updates_centers(LossVariant variant);

struct LossOutput {
  double value = 0.0;
  std::vector<Vec> grad_z;  // one gradient per batch embedding
  Mat grad_u;               // out_dim x C; empty for the instance-only losses
  // No anchor had both a positive and a negative (value forced to 0).
  bool degenerate = false;
};

// Instance-instance loss. Per anchor i with in-batch positives P(i) (same
// class, anchor excluded) and negatives N(i) (other classes):
//   l_i = mean_{j in P(i)} cos(z_i,z_j)/tau - log sum_{k in N(i)} exp(cos(z_i,z_k)/tau)
// Anchors missing either set contribute zero and are excluded from the mean;
// value = -mean(l_i). Gradients are exact.
LossOutput loss_scl(const std::vector<Vec>& z, const std::vector<int>& y, double tau);

// Same as loss_scl but each negative exponent uses tau * s[y_i][y_k], so
// dissimilar classes are contrasted at a sharper temperature. With s all
// ones the output equals loss_scl bit for bit.
LossOutput loss_sii(const std::vector<Vec>& z, const std::vector<int>& y, double tau,
                    const Mat& s);

// Instance-center loss against the class columns of u:
//   l_i = cos(z_i,u_{y_i})/tau - log sum_{c != y_i} exp(cos(z_i,u_c)/tau)
// Every instance counts; the denominator ranges over all other classes.
// Gradients flow into both z and u.
LossOutput loss_ic(const std::vector<Vec>& z, const std::vector<int>& y, const Mat& u,
                   double tau);

// loss_ic with each denominator exponent scaled by tau * s[y_i][c].
LossOutput loss_sic(const std::vector<Vec>& z, const std::vector<int>& y, const Mat& u,
                    double tau, const Mat& s);

// Dispatches a variant, summing component losses and gradients. grad_u is
// always sized like u (exactly zero for SCL and LI).
LossOutput loss_variant(LossVariant variant, const std::vector<Vec>& z,
                        const std::vector<int>& y, const Mat& u, double tau, const Mat& s);

}  // namespace lascl
