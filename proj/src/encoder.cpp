#include "lascl/encoder.hpp"

#include <cmath>
#include <string>

#include "lascl/error.hpp"
#include "lascl/rng.hpp"

namespace lascl {

namespace {

void fill_xavier(Mat& m, size_t fan_in, size_t fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& x : m.data) x = rng.uniform(-a, a);
}

// Recomputes the forward pass, exposing the intermediates backward needs.
struct Activations {
  Vec m;  // mean bucket embedding
  double total_count = 0.0;
  Vec t;  // tanh hidden layer
  Vec z;
};

Activations forward(const EncoderParams& p, const FeatureVector& fv) {
  if (fv.num_buckets != p.dims.buckets) {
    throw Error(ErrorCode::ShapeMismatch,
                "feature vector hashed into " + std::to_string(fv.num_buckets) +
                    " buckets, encoder has " + std::to_string(p.dims.buckets));
  }
  Activations act;
  act.m.assign(p.dims.embed_dim, 0.0);
  for (const auto& [bucket, count] : fv.entries) {
    if (bucket >= p.dims.buckets) {
      throw Error(ErrorCode::ShapeMismatch, "bucket index " + std::to_string(bucket) +
                                                " out of range");
    }
    for (size_t d = 0; d < p.dims.embed_dim; ++d) act.m[d] += count * p.embed(bucket, d);
    act.total_count += count;
  }
  if (act.total_count > 0.0) {
    for (double& x : act.m) x /= act.total_count;
  }

  act.t.assign(p.dims.hidden_dim, 0.0);
  for (size_t k = 0; k < p.dims.hidden_dim; ++k) {
    double a = p.b1[k];
    for (size_t d = 0; d < p.dims.embed_dim; ++d) a += p.w1(d, k) * act.m[d];
    act.t[k] = std::tanh(a);
  }

  act.z.assign(p.dims.out_dim, 0.0);
  for (size_t j = 0; j < p.dims.out_dim; ++j) {
    double z = p.b2[j];
    for (size_t k = 0; k < p.dims.hidden_dim; ++k) z += p.w2(k, j) * act.t[k];
    act.z[j] = z;
  }
  return act;
}

}  // namespace

EncoderGrads zeros_like(const EncoderParams& params) {
  EncoderGrads g;
  g.embed = Mat(params.embed.rows, params.embed.cols);
  g.w1 = Mat(params.w1.rows, params.w1.cols);
  g.b1.assign(params.b1.size(), 0.0);
  g.w2 = Mat(params.w2.rows, params.w2.cols);
  g.b2.assign(params.b2.size(), 0.0);
  return g;
}

EncoderParams init_params(const EncoderDims& dims, uint64_t seed) {
  if (dims.buckets == 0 || (dims.buckets & (dims.buckets - 1)) != 0) {
    throw Error(ErrorCode::InvalidArgument, "buckets must be a power of two");
  }
  if (dims.embed_dim == 0 || dims.hidden_dim == 0 || dims.out_dim == 0) {
    throw Error(ErrorCode::InvalidArgument, "encoder dims must be positive");
  }
  EncoderParams p;
  p.dims = dims;
  p.embed = Mat(dims.buckets, dims.embed_dim);
  p.w1 = Mat(dims.embed_dim, dims.hidden_dim);
  p.b1.assign(dims.hidden_dim, 0.0);
  p.w2 = Mat(dims.hidden_dim, dims.out_dim);
  p.b2.assign(dims.out_dim, 0.0);

  Rng rng(seed);
  fill_xavier(p.embed, dims.buckets, dims.embed_dim, rng);
  fill_xavier(p.w1, dims.embed_dim, dims.hidden_dim, rng);
  fill_xavier(p.w2, dims.hidden_dim, dims.out_dim, rng);
  return p;
}

Vec encode(const EncoderParams& params, const FeatureVector& fv) {
  return forward(params, fv).z;
}

std::vector<Vec> encode_batch(const EncoderParams& params, const std::vector<FeatureVector>& fvs) {
  std::vector<Vec> out;
  out.reserve(fvs.size());
  for (const auto& fv : fvs) out.push_back(encode(params, fv));
  return out;
}

EncoderGrads backward(const EncoderParams& params, const std::vector<FeatureVector>& fvs,
                      const std::vector<Vec>& grad_z) {
  if (fvs.size() != grad_z.size()) {
    throw Error(ErrorCode::ShapeMismatch, "backward: " + std::to_string(fvs.size()) +
                                              " feature vectors vs " +
                                              std::to_string(grad_z.size()) + " gradients");
  }
  EncoderGrads g = zeros_like(params);
  Vec grad_t(params.dims.hidden_dim), grad_a(params.dims.hidden_dim),
      grad_m(params.dims.embed_dim);

  for (size_t i = 0; i < fvs.size(); ++i) {
    const Vec& gz = grad_z[i];
    if (gz.size() != params.dims.out_dim) {
      throw Error(ErrorCode::ShapeMismatch, "backward: grad_z[" + std::to_string(i) +
                                                "] has size " + std::to_string(gz.size()));
    }
    const Activations act = forward(params, fvs[i]);

    for (size_t j = 0; j < params.dims.out_dim; ++j) g.b2[j] += gz[j];
    for (size_t k = 0; k < params.dims.hidden_dim; ++k) {
      double gt = 0.0;
      for (size_t j = 0; j < params.dims.out_dim; ++j) {
        g.w2(k, j) += act.t[k] * gz[j];
        gt += params.w2(k, j) * gz[j];
      }
      grad_t[k] = gt;
      grad_a[k] = gt * (1.0 - act.t[k] * act.t[k]);
      g.b1[k] += grad_a[k];
    }
    for (size_t d = 0; d < params.dims.embed_dim; ++d) {
      double gm = 0.0;
      for (size_t k = 0; k < params.dims.hidden_dim; ++k) {
        g.w1(d, k) += act.m[d] * grad_a[k];
        gm += params.w1(d, k) * grad_a[k];
      }
      grad_m[d] = gm;
    }
    if (act.total_count > 0.0) {
      for (const auto& [bucket, count] : fvs[i].entries) {
        const double w = count / act.total_count;
        for (size_t d = 0; d < params.dims.embed_dim; ++d) {
          g.embed(bucket, d) += w * grad_m[d];
        }
      }
    }
  }
  return g;
}

double cosine_sim(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::ShapeMismatch, "cosine_sim: " + std::to_string(a.size()) + " vs " +
                                              std::to_string(b.size()));
  }
  return dot(a, b) / (norm(a) * norm(b) + kCosineEps);
}

}  // namespace lascl
