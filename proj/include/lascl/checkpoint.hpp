#pragma once

#include <cstdint>
#include <string>

#include "lascl/encoder.hpp"
#include "lascl/label_space.hpp"
#include "lascl/training.hpp"

namespace lascl {

// Extra run provenance stored next to the model so an evaluation can be
// traced back to how the checkpoint was produced.
struct RunInfo {
  int kshot = 0;              // 0 = full training split
  int bottom_up_levels = 0;   // 0 = full hierarchy
  std::string template_pattern;
  std::string descriptions_path;
  std::string data_path;
  double best_val_node_acc = 0.0;
  int64_t best_step = 0;
};

struct Checkpoint {
  EncoderParams params;
  LabelSpace labels;
  TrainConfig config;
  RunInfo run;
};

// Single JSON document holding dims, seed, every parameter matrix, the label
// space snapshot, and the config. Doubles are written so that save -> load ->
// save round-trips bit-exactly.
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace lascl
