#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lascl/corpus.hpp"
#include "lascl/encoder.hpp"
#include "lascl/label_space.hpp"
#include "lascl/linalg.hpp"
#include "lascl/tree.hpp"

namespace lascl {

struct MetricsReport {
  double node_acc = 0.0;   // predicted leaf == true leaf
  double mid_acc = 0.0;    // parents match (degenerates to root_acc at depth 1)
  double root_acc = 0.0;   // depth-1 ancestors match
  double intra_dist = 0.0;
  double inter_dist = 0.0;
  size_t n_examples = 0;
};

struct HierMatch {
  bool node = false;
  bool mid = false;
  bool root = false;
};

// Per-example hierarchical agreement. Guarantees node <= mid <= root: for
// leaves directly under the root the parent test degenerates to the depth-1
// ancestor test.
HierMatch hierarchical_accuracy(const LabelTree& tree, int true_class, int pred_class);

// Average pairwise L2 distances over unit-normalized embeddings:
//   intra: mean over classes with >= 2 points of the mean within-class
//          pairwise distance
//   inter: mean over all cross-class point pairs
// Requires at least two classes with a point each (InsufficientData).
struct ClusterDistances {
  double intra = 0.0;
  double inter = 0.0;
};

ClusterDistances cluster_distances(const std::vector<Vec>& embeddings,
                                   const std::vector<int>& y);

// Accuracies plus cluster distances from already-made predictions. Cluster
// fields are zero when fewer than two classes appear.
MetricsReport report_from_predictions(const LabelTree& tree, const std::vector<int>& y_true,
                                      const std::vector<int>& y_pred,
                                      const std::vector<Vec>& embeddings);

// Encodes the dataset and classifies every example by nearest class center.
MetricsReport direct_test(const EncoderParams& params, const LabelSpace& labels,
                          const Dataset& dataset, const LabelTree& tree);

enum class ProbeInit { Random, LabelEmbeddings };

struct ProbeConfig {
  double lr = 5e-3;
  double weight_decay = 0.01;
  int epochs = 10;
  int batch_size = 32;
  uint64_t seed = 7;
};

// Softmax classifier over cosine logits cos(z, weight_c) + bias_c.
struct LinearProbe {
  Mat weight;  // out_dim x C
  Vec bias;    // C
};

// Trains the probe with AdamW on frozen embeddings, validating after each
// epoch and returning the best epoch's parameters. With
// ProbeInit::LabelEmbeddings the weights start as a copy of the class
// centers, so zero epochs reproduce nearest-center predictions exactly.
LinearProbe linear_probe_train(const std::vector<Vec>& train_z, const std::vector<int>& train_y,
                               const std::vector<Vec>& val_z, const std::vector<int>& val_y,
                               int num_classes, ProbeInit init, const Mat* label_u,
                               const ProbeConfig& config);

// argmax_c cos(z, weight_c) + bias_c; ties resolve to the smallest index.
int probe_predict(const LinearProbe& probe, const Vec& z);

// CSV with one row per instance and one row per class center (kind "label").
void export_embeddings_csv(const EncoderParams& params, const Dataset& dataset,
                           const LabelSpace& labels, const std::string& path);

std::string metrics_to_json(const MetricsReport& report, const std::string& mode);

}  // namespace lascl
