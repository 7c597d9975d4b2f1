#include "lascl/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "lascl/error.hpp"
#include "lascl/rng.hpp"

namespace lascl {

double lr_at(int64_t step, int64_t total_steps, double base_lr) {
  if (total_steps < 1) throw Error(ErrorCode::InvalidArgument, "total_steps must be >= 1");
  if (step < 0 || step > total_steps) {
    throw Error(ErrorCode::InvalidArgument, "step " + std::to_string(step) + " outside 0.." +
                                                std::to_string(total_steps));
  }
  return base_lr * (1.0 - static_cast<double>(step) / static_cast<double>(total_steps));
}

void adam_step(Vec& theta, const Vec& grad, AdamState& moments, double lr, double weight_decay,
               int64_t t) {
  if (grad.size() != theta.size() || moments.m.size() != theta.size() ||
      moments.v.size() != theta.size()) {
    throw Error(ErrorCode::ShapeMismatch, "adam_step: tensor sizes disagree");
  }
  if (t < 1) throw Error(ErrorCode::InvalidArgument, "adam_step: t must be >= 1");

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));

  for (size_t i = 0; i < theta.size(); ++i) {
    theta[i] -= lr * weight_decay * theta[i];  // decoupled decay first
    const double g = grad[i];
    moments.m[i] = kBeta1 * moments.m[i] + (1.0 - kBeta1) * g;
    moments.v[i] = kBeta2 * moments.v[i] + (1.0 - kBeta2) * g * g;
    const double mhat = moments.m[i] / bias1;
    const double vhat = moments.v[i] / bias2;
    theta[i] -= lr * mhat / (std::sqrt(vhat) + kEps);
  }
}

namespace {

struct FeaturizedSplit {
  std::vector<FeatureVector> fvs;
  std::vector<int> y;
};

FeaturizedSplit featurize(const Dataset& dataset, uint32_t buckets) {
  FeaturizedSplit out;
  out.fvs.reserve(dataset.examples.size());
  out.y.reserve(dataset.examples.size());
  for (const auto& ex : dataset.examples) {
    out.fvs.push_back(hash_vectorize(ex.text, buckets));
    out.y.push_back(ex.class_index);
  }
  return out;
}

double validation_node_acc(const EncoderParams& params, const LabelSpace& labels,
                           const FeaturizedSplit& split) {
  if (split.fvs.empty()) return 0.0;
  size_t hits = 0;
  for (size_t i = 0; i < split.fvs.size(); ++i) {
    if (nn_classify(labels, encode(params, split.fvs[i])) == split.y[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(split.fvs.size());
}

void validate_config(const TrainConfig& cfg) {
  if (cfg.tau <= 0.0) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  if (cfg.batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  if (cfg.epochs < 0) throw Error(ErrorCode::InvalidArgument, "epochs must be >= 0");
  if (cfg.lr <= 0.0) throw Error(ErrorCode::InvalidArgument, "lr must be positive");
  if (cfg.weight_decay < 0.0) throw Error(ErrorCode::InvalidArgument, "weight_decay must be >= 0");
  if (cfg.reencode_every < 1) throw Error(ErrorCode::InvalidArgument, "reencode_every must be >= 1");
  if (cfg.eval_every < 1) throw Error(ErrorCode::InvalidArgument, "eval_every must be >= 1");
  if (cfg.patience < 1) throw Error(ErrorCode::InvalidArgument, "patience must be >= 1");
}

}  // namespace

TrainResult train(const TrainConfig& config, const Corpus& corpus, const LabelTree& tree,
                  const TemplateSpec& tmpl, const Overrides* overrides) {
  validate_config(config);

  TrainResult res;
  TrainState& st = res.state;
  st.params = init_params(config.dims, config.seed);
  st.labels = init_label_space(st.params, tree, tmpl, overrides, config.reencode_every);

  const FeaturizedSplit train_split = featurize(corpus.train, config.dims.buckets);
  const FeaturizedSplit val_split = featurize(corpus.validation, config.dims.buckets);

  const size_t n_train = train_split.fvs.size();
  if (n_train == 0) throw Error(ErrorCode::EmptyDataset, "train split is empty");
  if (val_split.fvs.empty()) throw Error(ErrorCode::EmptyDataset, "validation split is empty");

  const int64_t steps_per_epoch = static_cast<int64_t>(
      (n_train + config.batch_size - 1) / static_cast<size_t>(config.batch_size));
  const int64_t total_steps = steps_per_epoch * config.epochs;

  st.initial_val_node_acc = validation_node_acc(st.params, st.labels, val_split);
  st.best = Snapshot{st.params, st.labels, st.initial_val_node_acc, 0};
  if (total_steps == 0) return res;

  st.enc_opt.embed = AdamState(st.params.embed.data.size());
  st.enc_opt.w1 = AdamState(st.params.w1.data.size());
  st.enc_opt.b1 = AdamState(st.params.b1.size());
  st.enc_opt.w2 = AdamState(st.params.w2.data.size());
  st.enc_opt.b2 = AdamState(st.params.b2.size());
  st.u_opt = AdamState(st.labels.u.data.size());
  st.u_t = 0;

  Rng rng(config.seed);
  std::vector<size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);

  std::vector<FeatureVector> batch_fvs;
  std::vector<int> batch_y;
  int bad_validations = 0;
  bool stop = false;

  const auto run_validation = [&](HistoryRow& row) {
    const double acc = validation_node_acc(st.params, st.labels, val_split);
    row.val_node_acc = acc;
    if (acc > st.best.val_node_acc) {  // strict improvement only
      st.best = Snapshot{st.params, st.labels, acc, st.step};
      bad_validations = 0;
    } else if (++bad_validations >= config.patience) {
      stop = true;
    }
  };

  for (int epoch = 0; epoch < config.epochs && !stop; ++epoch) {
    rng.shuffle(order);
    for (size_t begin = 0; begin < n_train && !stop;
         begin += static_cast<size_t>(config.batch_size)) {
      const size_t end = std::min(begin + static_cast<size_t>(config.batch_size), n_train);
      batch_fvs.clear();
      batch_y.clear();
      for (size_t i = begin; i < end; ++i) {
        batch_fvs.push_back(train_split.fvs[order[i]]);
        batch_y.push_back(train_split.y[order[i]]);
      }

      ++st.step;
      // The first update runs at full base rate; the schedule reaches zero
      // one step past the last update.
      const double cur_lr = lr_at(st.step - 1, total_steps, config.lr);

      const std::vector<Vec> z = encode_batch(st.params, batch_fvs);
      const LossOutput loss = loss_variant(config.variant, z, batch_y, st.labels.u, config.tau,
                                           st.labels.s);
      const EncoderGrads grads = backward(st.params, batch_fvs, loss.grad_z);

      adam_step(st.params.embed.data, grads.embed.data, st.enc_opt.embed, cur_lr,
                config.weight_decay, st.step);
      adam_step(st.params.w1.data, grads.w1.data, st.enc_opt.w1, cur_lr, config.weight_decay,
                st.step);
      adam_step(st.params.b1, grads.b1, st.enc_opt.b1, cur_lr, config.weight_decay, st.step);
      adam_step(st.params.w2.data, grads.w2.data, st.enc_opt.w2, cur_lr, config.weight_decay,
                st.step);
      adam_step(st.params.b2, grads.b2, st.enc_opt.b2, cur_lr, config.weight_decay, st.step);
      if (variant_updates_centers(config.variant)) {
        adam_step(st.labels.u.data, loss.grad_u.data, st.u_opt, cur_lr, config.weight_decay,
                  ++st.u_t);
      }

      if (reencode(st.labels, st.params, st.step)) {
        st.u_opt.reset();  // fresh centers get fresh moments
        st.u_t = 0;
      }

      HistoryRow row{st.step, cur_lr, loss.value, std::nullopt};
      if (st.step % config.eval_every == 0) run_validation(row);
      res.history.push_back(row);
    }
  }

  // Make sure the run ends on a validation so short runs still select a best
  // checkpoint.
  if (!res.history.empty() && !res.history.back().val_node_acc.has_value()) {
    run_validation(res.history.back());
  }
  return res;
}

void write_history_csv(const std::vector<HistoryRow>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << "step,lr,loss,val_nodeAcc\n";
  char buf[40];
  const auto fmt = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  for (const auto& row : history) {
    out << row.step << "," << fmt(row.lr) << "," << fmt(row.loss) << ",";
    if (row.val_node_acc.has_value()) out << fmt(*row.val_node_acc);
    out << "\n";
  }
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

}  // namespace lascl
