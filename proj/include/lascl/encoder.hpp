#pragma once

#include <cstdint>
#include <vector>

#include "lascl/corpus.hpp"
#include "lascl/linalg.hpp"

namespace lascl {

inline constexpr double kCosineEps = 1e-12;

struct EncoderDims {
  uint32_t buckets = 4096;  // hashing buckets; must be a power of two
  size_t embed_dim = 64;    // bucket embedding width
  size_t hidden_dim = 64;
  size_t out_dim = 32;      // representation width
};

// Stand-in text encoder: count-weighted mean of bucket embeddings followed by
// a one-hidden-layer tanh MLP. Double precision throughout.
//
//   m = mean_c(count_c * embed[bucket_c]) / sum(count)
//   z = w2^T tanh(w1^T m + b1) + b2
struct EncoderParams {
  EncoderDims dims;
  Mat embed;  // buckets x embed_dim
  Mat w1;     // embed_dim x hidden_dim
  Vec b1;     // hidden_dim
  Mat w2;     // hidden_dim x out_dim
  Vec b2;     // out_dim
};

struct EncoderGrads {
  Mat embed;
  Mat w1;
  Vec b1;
  Mat w2;
  Vec b2;
};

EncoderGrads zeros_like(const EncoderParams& params);

// Xavier-uniform weights (a = sqrt(6 / (fan_in + fan_out)) per matrix), zero
// biases. Deterministic given the seed.
EncoderParams init_params(const EncoderDims& dims, uint64_t seed);

Vec encode(const EncoderParams& params, const FeatureVector& fv);

std::vector<Vec> encode_batch(const EncoderParams& params, const std::vector<FeatureVector>& fvs);

// Exact reverse-mode gradients of sum_i <grad_z[i], z_i> with respect to
// every parameter tensor, accumulated in input order.
EncoderGrads backward(const EncoderParams& params, const std::vector<FeatureVector>& fvs,
                      const std::vector<Vec>& grad_z);

// <a,b> / (|a||b| + 1e-12); zero vectors have similarity 0 to everything.
double cosine_sim(const Vec& a, const Vec& b);

}  // namespace lascl
