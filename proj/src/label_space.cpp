#include "lascl/label_space.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "lascl/error.hpp"

namespace lascl {

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void encode_sentences(LabelSpace& labels, const EncoderParams& params) {
  for (size_t c = 0; c < labels.sentences.size(); ++c) {
    labels.u.set_col(c, encode(params, hash_vectorize(labels.sentences[c], params.dims.buckets)));
  }
  labels.w = similarity_matrix(labels.u);
  labels.s = scale_matrix(labels.w);
}

}  // namespace

LabelSpace init_label_space(const EncoderParams& params, const LabelTree& tree,
                            const TemplateSpec& tmpl, const Overrides* overrides,
                            int64_t reencode_every) {
  if (tree.num_classes() < 1) throw Error(ErrorCode::InvalidArgument, "taxonomy has no classes");
  if (reencode_every < 1) throw Error(ErrorCode::InvalidArgument, "reencode_every must be >= 1");

  LabelSpace labels;
  labels.reencode_every = reencode_every;
  labels.last_reencode_step = 0;
  const int C = tree.num_classes();
  labels.sentences.reserve(static_cast<size_t>(C));
  labels.class_paths.reserve(static_cast<size_t>(C));
  for (int c = 0; c < C; ++c) {
    labels.sentences.push_back(label_sentence(tree, c, tmpl, overrides));
    labels.class_paths.push_back(joined_path(tree, c, "/"));
  }
  labels.u = Mat(params.dims.out_dim, static_cast<size_t>(C));
  encode_sentences(labels, params);
  return labels;
}

Mat similarity_matrix(const Mat& u) {
  const size_t C = u.cols;
  if (C == 0) throw Error(ErrorCode::InvalidArgument, "similarity_matrix: no columns");
  std::vector<Vec> cols(C);
  for (size_t c = 0; c < C; ++c) cols[c] = u.col(c);

  Mat w(C, C);
  for (size_t a = 0; a < C; ++a) {
    w(a, a) = 1.0;  // a vector is maximally similar to itself
    for (size_t b = a + 1; b < C; ++b) {
      const double sim = cosine_sim(cols[a], cols[b]);
      w(a, b) = sim;
      w(b, a) = sim;
    }
  }
  return w;
}

Mat scale_matrix(const Mat& w) {
  if (w.rows != w.cols) throw Error(ErrorCode::ShapeMismatch, "scale_matrix: not square");
  Mat s(w.rows, w.cols);
  for (size_t a = 0; a < w.rows; ++a) {
    for (size_t b = 0; b < w.cols; ++b) {
      s(a, b) = std::clamp(w(a, b), kScaleFloor, 1.0);
    }
    s(a, a) = 1.0;
  }
  return s;
}

bool reencode(LabelSpace& labels, const EncoderParams& params, int64_t step) {
  if (step - labels.last_reencode_step < labels.reencode_every) return false;
  encode_sentences(labels, params);
  labels.last_reencode_step = step;
  return true;
}

int nn_classify(const LabelSpace& labels, const Vec& z) {
  if (labels.u.cols == 0) throw Error(ErrorCode::InvalidArgument, "nn_classify: no classes");
  int best = 0;
  double best_sim = cosine_sim(z, labels.u.col(0));
  for (size_t c = 1; c < labels.u.cols; ++c) {
    const double sim = cosine_sim(z, labels.u.col(c));
    if (sim > best_sim) {  // strict: ties keep the smallest index
      best_sim = sim;
      best = static_cast<int>(c);
    }
  }
  return best;
}

void write_similarity_csv(const LabelSpace& labels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << "matrix,class";
  for (const auto& p : labels.class_paths) out << "," << p;
  out << "\n";
  const auto write_block = [&](const char* name, const Mat& m) {
    for (size_t r = 0; r < m.rows; ++r) {
      out << name << "," << labels.class_paths[r];
      for (size_t c = 0; c < m.cols; ++c) out << "," << fmt_double(m(r, c));
      out << "\n";
    }
  };
  write_block("W", labels.w);
  write_block("S", labels.s);
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

}  // namespace lascl
