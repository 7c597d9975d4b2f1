#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lascl/corpus.hpp"
#include "lascl/encoder.hpp"
#include "lascl/label_space.hpp"
#include "lascl/losses.hpp"

namespace lascl {

struct TrainConfig {
  LossVariant variant = LossVariant::LISC;
  double tau = 0.3;
  int batch_size = 32;
  int epochs = 20;
  double lr = 1e-3;
  double weight_decay = 0.1;
  int64_t reencode_every = 500;
  int64_t eval_every = 256;  // validation cadence in steps
  int patience = 5;          // consecutive non-improving validations allowed
  uint64_t seed = 7;
  EncoderDims dims;
};

// Linear decay: base_lr * (1 - step / total_steps), step in [0, total_steps].
double lr_at(int64_t step, int64_t total_steps, double base_lr);

// First and second moment buffers for one parameter tensor.
struct AdamState {
  Vec m;
  Vec v;

  AdamState() = default;
  explicit AdamState(size_t n) : m(n, 0.0), v(n, 0.0) {}
  void reset() {
    std::fill(m.begin(), m.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
  }
};

// One AdamW update (beta1 0.9, beta2 0.999, eps 1e-8) with bias correction at
// step t >= 1. The decoupled decay theta -= lr * weight_decay * theta is
// applied before the moment update.
void adam_step(Vec& theta, const Vec& grad, AdamState& moments, double lr, double weight_decay,
               int64_t t);

struct EncoderAdam {
  AdamState embed, w1, b1, w2, b2;
};

struct Snapshot {
  EncoderParams params;
  LabelSpace labels;
  double val_node_acc = 0.0;
  int64_t step = 0;
};

struct HistoryRow {
  int64_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
  std::optional<double> val_node_acc;  // present on validation steps
};

struct TrainState {
  EncoderParams params;  // parameters at the end of training
  LabelSpace labels;
  EncoderAdam enc_opt;
  AdamState u_opt;  // center moments; cleared whenever reencode fires
  int64_t u_t = 0;
  int64_t step = 0;
  double initial_val_node_acc = 0.0;
  Snapshot best;  // best validation checkpoint (strict improvement only)
};

struct TrainResult {
  TrainState state;
  std::vector<HistoryRow> history;
};

// Full training loop: seeded shuffling, per-step loss/backprop/AdamW on the
// encoder (and on the centers only for variants with a center term),
// scheduled label re-encoding, periodic validation by nearest-center
// accuracy, early stopping, and best-checkpoint tracking. Deterministic:
// identical config + data + seed give bit-identical results.
TrainResult train(const TrainConfig& config, const Corpus& corpus, const LabelTree& tree,
                  const TemplateSpec& tmpl, const Overrides* overrides = nullptr);

// step,lr,loss,val_nodeAcc rows; the accuracy cell is empty on non-validation
// steps.
void write_history_csv(const std::vector<HistoryRow>& history, const std::string& path);

}  // namespace lascl
