#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lascl/encoder.hpp"
#include "lascl/linalg.hpp"
#include "lascl/tree.hpp"

namespace lascl {

// Lower clamp for the class-similarity scaling matrix; keeps scaled
// temperatures bounded away from zero.
inline constexpr double kScaleFloor = 0.05;

// Trainable class centers plus the similarity structure derived from them.
//   u: one embedding column per class (out_dim x C)
//   w: pairwise cosine similarities of the columns of u (C x C)
//   s: w clamped to [kScaleFloor, 1] with a unit diagonal
// w and s are snapshots: they change only when reencode fires, never by
// gradient.
struct LabelSpace {
  std::vector<std::string> sentences;    // one descriptive sentence per class
  std::vector<std::string> class_paths;  // "/"-joined name paths, for reports
  Mat u;
  Mat w;
  Mat s;
  int64_t reencode_every = 500;
  int64_t last_reencode_step = 0;
};

// Renders one sentence per class from the template (or override) and encodes
// each into a column of u; fills w and s from those columns.
LabelSpace init_label_space(const EncoderParams& params, const LabelTree& tree,
                            const TemplateSpec& tmpl, const Overrides* overrides,
                            int64_t reencode_every);

// Pairwise cosine similarity of the columns of u. Exactly symmetric with a
// unit diagonal.
Mat similarity_matrix(const Mat& u);

// clamp(w, kScaleFloor, 1) with the diagonal forced to 1.
Mat scale_matrix(const Mat& w);

// Re-encodes every class sentence with the current encoder if at least
// reencode_every steps have passed since the last refresh, overwriting u and
// recomputing w and s. Returns whether it fired; a non-firing call leaves the
// label space bitwise untouched.
bool reencode(LabelSpace& labels, const EncoderParams& params, int64_t step);

// argmax_c cosine_sim(z, u_c); ties resolve to the smallest class index.
int nn_classify(const LabelSpace& labels, const Vec& z);

// Writes w and s as one CSV (matrix, class, then one column per class path).
void write_similarity_csv(const LabelSpace& labels, const std::string& path);

}  // namespace lascl
