#include "lascl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "lascl/error.hpp"
#include "lascl/rng.hpp"
#include "lascl/training.hpp"

namespace lascl {

HierMatch hierarchical_accuracy(const LabelTree& tree, int true_class, int pred_class) {
  const int c_count = tree.num_classes();
  if (true_class < 0 || true_class >= c_count || pred_class < 0 || pred_class >= c_count) {
    throw Error(ErrorCode::UnknownClass, "class index out of range for hierarchy metrics");
  }
  const int true_leaf = tree.leaf_ids.at(static_cast<size_t>(true_class));
  const int pred_leaf = tree.leaf_ids.at(static_cast<size_t>(pred_class));

  HierMatch match;
  match.node = (true_leaf == pred_leaf);
  match.root = (ancestor_at_depth(tree, true_class, 1) == ancestor_at_depth(tree, pred_class, 1));
  // A depth-1 leaf's parent is the root, which would make every prediction a
  // mid hit; the mid test degenerates to the root test there.
  if (tree.node(true_leaf).depth <= 1 || tree.node(pred_leaf).depth <= 1) {
    match.mid = match.root;
  } else {
    match.mid = (*tree.node(true_leaf).parent == *tree.node(pred_leaf).parent);
  }
  return match;
}

ClusterDistances cluster_distances(const std::vector<Vec>& embeddings,
                                   const std::vector<int>& y) {
  if (embeddings.size() != y.size()) {
    throw Error(ErrorCode::ShapeMismatch, "cluster_distances: sizes disagree");
  }
  std::set<int> classes(y.begin(), y.end());
  if (classes.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "cluster distances need >= 2 classes");
  }

  std::vector<Vec> unit(embeddings.size());
  for (size_t i = 0; i < embeddings.size(); ++i) {
    unit[i] = embeddings[i];
    const double n = norm(unit[i]);
    if (n > 0.0) {
      for (double& x : unit[i]) x /= n;
    }
  }
  const auto l2 = [&](size_t a, size_t b) {
    double acc = 0.0;
    for (size_t d = 0; d < unit[a].size(); ++d) {
      const double diff = unit[a][d] - unit[b][d];
      acc += diff * diff;
    }
    return std::sqrt(acc);
  };

  std::map<int, std::vector<size_t>> by_class;
  for (size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);

  ClusterDistances out;
  size_t intra_classes = 0;
  for (const auto& [class_index, members] : by_class) {
    (void)class_index;
    if (members.size() < 2) continue;
    double sum = 0.0;
    size_t pairs = 0;
    for (size_t a = 0; a < members.size(); ++a) {
      for (size_t b = a + 1; b < members.size(); ++b) {
        sum += l2(members[a], members[b]);
        ++pairs;
      }
    }
    out.intra += sum / static_cast<double>(pairs);
    ++intra_classes;
  }
  if (intra_classes > 0) out.intra /= static_cast<double>(intra_classes);

  double inter_sum = 0.0;
  size_t inter_pairs = 0;
  for (size_t a = 0; a < unit.size(); ++a) {
    for (size_t b = a + 1; b < unit.size(); ++b) {
      if (y[a] == y[b]) continue;
      inter_sum += l2(a, b);
      ++inter_pairs;
    }
  }
  out.inter = inter_sum / static_cast<double>(inter_pairs);
  return out;
}

MetricsReport report_from_predictions(const LabelTree& tree, const std::vector<int>& y_true,
                                      const std::vector<int>& y_pred,
                                      const std::vector<Vec>& embeddings) {
  if (y_true.size() != y_pred.size() || y_true.size() != embeddings.size()) {
    throw Error(ErrorCode::ShapeMismatch, "report_from_predictions: sizes disagree");
  }
  if (y_true.empty()) throw Error(ErrorCode::EmptyDataset, "no predictions to report");

  MetricsReport report;
  report.n_examples = y_true.size();
  for (size_t i = 0; i < y_true.size(); ++i) {
    const HierMatch match = hierarchical_accuracy(tree, y_true[i], y_pred[i]);
    report.node_acc += match.node;
    report.mid_acc += match.mid;
    report.root_acc += match.root;
  }
  report.node_acc /= static_cast<double>(report.n_examples);
  report.mid_acc /= static_cast<double>(report.n_examples);
  report.root_acc /= static_cast<double>(report.n_examples);

  if (std::set<int>(y_true.begin(), y_true.end()).size() >= 2) {
    const ClusterDistances dist = cluster_distances(embeddings, y_true);
    report.intra_dist = dist.intra;
    report.inter_dist = dist.inter;
  }
  return report;
}

MetricsReport direct_test(const EncoderParams& params, const LabelSpace& labels,
                          const Dataset& dataset, const LabelTree& tree) {
  if (dataset.examples.empty()) {
    throw Error(ErrorCode::EmptyDataset, "direct_test: empty " + dataset.split + " split");
  }
  std::vector<Vec> embeddings;
  std::vector<int> y_true, y_pred;
  embeddings.reserve(dataset.examples.size());
  for (const auto& ex : dataset.examples) {
    embeddings.push_back(encode(params, hash_vectorize(ex.text, params.dims.buckets)));
    y_true.push_back(ex.class_index);
    y_pred.push_back(nn_classify(labels, embeddings.back()));
  }
  return report_from_predictions(tree, y_true, y_pred, embeddings);
}

namespace {

double probe_accuracy(const LinearProbe& probe, const std::vector<Vec>& z,
                      const std::vector<int>& y) {
  if (z.empty()) return 0.0;
  size_t hits = 0;
  for (size_t i = 0; i < z.size(); ++i) {
    if (probe_predict(probe, z[i]) == y[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(z.size());
}

}  // namespace

LinearProbe linear_probe_train(const std::vector<Vec>& train_z, const std::vector<int>& train_y,
                               const std::vector<Vec>& val_z, const std::vector<int>& val_y,
                               int num_classes, ProbeInit init, const Mat* label_u,
                               const ProbeConfig& config) {
  if (train_z.empty()) throw Error(ErrorCode::EmptyProbeSet, "probe train set is empty");
  if (train_z.size() != train_y.size() || val_z.size() != val_y.size()) {
    throw Error(ErrorCode::ShapeMismatch, "probe inputs: sizes disagree");
  }
  if (num_classes < 2) throw Error(ErrorCode::SingleClass, "probe needs >= 2 classes");
  if (config.epochs < 0 || config.batch_size < 1 || config.lr <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "bad probe config");
  }
  const size_t d = train_z[0].size();
  const size_t C = static_cast<size_t>(num_classes);
  for (int label : train_y) {
    if (label < 0 || static_cast<size_t>(label) >= C) {
      throw Error(ErrorCode::UnknownClass, "probe label " + std::to_string(label));
    }
  }

  LinearProbe probe;
  probe.bias.assign(C, 0.0);
  Rng rng(config.seed);
  if (init == ProbeInit::LabelEmbeddings) {
    if (label_u == nullptr || label_u->rows != d || label_u->cols != C) {
      throw Error(ErrorCode::ShapeMismatch, "label-embedding init needs a d x C center matrix");
    }
    probe.weight = *label_u;
  } else {
    probe.weight = Mat(d, C);
    const double a = std::sqrt(6.0 / static_cast<double>(d + C));
    for (double& x : probe.weight.data) x = rng.uniform(-a, a);
  }
  if (config.epochs == 0) return probe;

  AdamState w_opt(probe.weight.data.size());
  AdamState b_opt(probe.bias.size());
  int64_t t = 0;

  LinearProbe best = probe;
  double best_acc = -1.0;

  std::vector<size_t> order(train_z.size());
  std::iota(order.begin(), order.end(), 0);
  Mat grad_w(d, C);
  Vec grad_b(C), logits(C), probs(C);
  Vec wcol(d);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t begin = 0; begin < order.size();
         begin += static_cast<size_t>(config.batch_size)) {
      const size_t end =
          std::min(begin + static_cast<size_t>(config.batch_size), order.size());
      grad_w.fill(0.0);
      std::fill(grad_b.begin(), grad_b.end(), 0.0);
      const double inv_batch = 1.0 / static_cast<double>(end - begin);

      for (size_t pos = begin; pos < end; ++pos) {
        const Vec& z = train_z[order[pos]];
        const size_t yi = static_cast<size_t>(train_y[order[pos]]);
        const double nz = norm(z);
        for (size_t c = 0; c < C; ++c) {
          wcol = probe.weight.col(c);
          logits[c] = dot(z, wcol) / (nz * norm(wcol) + kCosineEps) + probe.bias[c];
        }
        const double mx = *std::max_element(logits.begin(), logits.end());
        double denom = 0.0;
        for (size_t c = 0; c < C; ++c) {
          probs[c] = std::exp(logits[c] - mx);
          denom += probs[c];
        }
        for (size_t c = 0; c < C; ++c) {
          const double dlogit = (probs[c] / denom - (c == yi ? 1.0 : 0.0)) * inv_batch;
          if (dlogit == 0.0) continue;
          grad_b[c] += dlogit;
          // d cos(z, w_c) / d w_c with z fixed.
          wcol = probe.weight.col(c);
          const double nw = norm(wcol);
          const double D = nz * nw + kCosineEps;
          const double cos_zw = dot(z, wcol) / D;
          const double c2 = (nw > 0.0) ? dlogit * cos_zw * nz / (D * nw) : 0.0;
          for (size_t dd = 0; dd < d; ++dd) {
            grad_w(dd, c) += dlogit * z[dd] / D - c2 * wcol[dd];
          }
        }
      }
      adam_step(probe.weight.data, grad_w.data, w_opt, config.lr, config.weight_decay, ++t);
      adam_step(probe.bias, grad_b, b_opt, config.lr, config.weight_decay, t);
    }

    const double acc = val_z.empty() ? probe_accuracy(probe, train_z, train_y)
                                     : probe_accuracy(probe, val_z, val_y);
    if (acc > best_acc) {
      best_acc = acc;
      best = probe;
    }
  }
  return best;
}

int probe_predict(const LinearProbe& probe, const Vec& z) {
  int best = 0;
  double best_score = cosine_sim(z, probe.weight.col(0)) + probe.bias[0];
  for (size_t c = 1; c < probe.weight.cols; ++c) {
    const double score = cosine_sim(z, probe.weight.col(c)) + probe.bias[c];
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(c);
    }
  }
  return best;
}

void export_embeddings_csv(const EncoderParams& params, const Dataset& dataset,
                           const LabelSpace& labels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  char buf[40];
  const auto fmt = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };

  const size_t d = params.dims.out_dim;
  out << "class_index,kind";
  for (size_t j = 0; j < d; ++j) out << ",e" << j;
  out << "\n";
  for (const auto& ex : dataset.examples) {
    const Vec z = encode(params, hash_vectorize(ex.text, params.dims.buckets));
    out << ex.class_index << ",instance";
    for (size_t j = 0; j < d; ++j) out << "," << fmt(z[j]);
    out << "\n";
  }
  for (size_t c = 0; c < labels.u.cols; ++c) {
    out << c << ",label";
    for (size_t j = 0; j < d; ++j) out << "," << fmt(labels.u(j, c));
    out << "\n";
  }
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

std::string metrics_to_json(const MetricsReport& report, const std::string& mode) {
  nlohmann::json doc;
  doc["mode"] = mode;
  doc["nodeAcc"] = report.node_acc;
  doc["midAcc"] = report.mid_acc;
  doc["rootAcc"] = report.root_acc;
  doc["intra_dist"] = report.intra_dist;
  doc["inter_dist"] = report.inter_dist;
  doc["n_examples"] = report.n_examples;
  return doc.dump(2);
}

}  // namespace lascl
