// lascl: label-aware supervised contrastive learning toolkit.
//
// Subcommands: gen-data (synthetic corpus), train, eval (direct nearest-center
// test or linear probe), gradcheck (finite-difference audit), dump (similarity
// matrices / embeddings). Every subcommand accepts --config JSON whose keys
// fill in any value not given explicitly on the command line.
//
// Exit codes: 0 success, 1 usage error, 2 runtime or validation failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lascl/checkpoint.hpp"
#include "lascl/corpus.hpp"
#include "lascl/error.hpp"
#include "lascl/evaluation.hpp"
#include "lascl/gradcheck.hpp"
#include "lascl/label_space.hpp"
#include "lascl/losses.hpp"
#include "lascl/training.hpp"
#include "lascl/tree.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ConfigKey {
  const char* flag;  // CLI flag this key shadows, or nullptr for config-only
  std::function<void(const json&)> set;
};

// Fills options from a JSON config file; values given explicitly on the
// command line win.
void apply_config(CLI::App* sub, const std::string& path,
                  const std::map<std::string, ConfigKey>& keys) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw lascl::Error(lascl::ErrorCode::IoError, "cannot open config " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw lascl::Error(lascl::ErrorCode::ParseError, path + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw lascl::Error(lascl::ErrorCode::ParseError, path + ": expected a JSON object");
  }
  for (const auto& [key, value] : doc.items()) {
    const auto it = keys.find(key);
    if (it == keys.end()) {
      throw lascl::Error(lascl::ErrorCode::InvalidArgument,
                         path + ": unknown config key \"" + key + "\"");
    }
    if (it->second.flag != nullptr && sub->count(it->second.flag) > 0) continue;
    try {
      it->second.set(value);
    } catch (const json::exception& e) {
      throw lascl::Error(lascl::ErrorCode::ParseError,
                         path + ": bad value for \"" + key + "\": " + e.what());
    }
  }
}

std::string default_report_path(const std::string& checkpoint_path, const std::string& mode) {
  fs::path p(checkpoint_path);
  return (p.has_parent_path() ? p.parent_path() : fs::path(".")) /
         ("report-" + mode + ".json");
}

struct GenDataOpts {
  int branches = 4;
  int leaves_per_branch = 3;
  int per_class = 100;
  double noise = 0.1;
  uint64_t seed = 7;
  std::string out = "data.jsonl";
  std::string config;
  int vocab_shared = 50;  // config-only
  int vocab_leaf = 30;    // config-only
};

struct TrainOpts {
  std::string data = "data.jsonl";
  std::string variant = "lisc";
  double tau = 0.3;
  int batch = 32;
  int epochs = 20;
  int64_t reencode_every = 500;
  int kshot = 0;
  int bottom_up_levels = 0;
  std::string template_pattern = "It contains {label} news.";
  std::string descriptions;
  uint64_t seed = 7;
  std::string out = "run_out";
  std::string config;
  // config-only knobs
  double lr = 1e-3;
  double weight_decay = 0.1;
  int64_t eval_every = 256;
  int patience = 5;
  uint32_t buckets = 4096;
  size_t embed_dim = 64;
  size_t hidden_dim = 64;
  size_t out_dim = 32;
};

struct EvalOpts {
  std::string checkpoint = "run_out/checkpoint.json";
  std::string data = "data.jsonl";
  std::string mode = "dt";
  int lp_per_class = 10;
  std::string config;
  // config-only knobs
  int lp_epochs = 10;
  double lp_lr = 5e-3;
  double lp_weight_decay = 0.01;
  int lp_batch = 32;
  uint64_t seed = 7;
  std::string report_out;
};

struct GradcheckOpts {
  int trials = 20;
  uint64_t seed = 7;
  std::string config;
};

struct DumpOpts {
  std::string checkpoint = "run_out/checkpoint.json";
  std::string similarity;
  std::string embeddings;
  std::string data;
  std::string config;
};

int cmd_gen_data(const GenDataOpts& o) {
  lascl::SyntheticSpec spec;
  spec.branches = o.branches;
  spec.leaves_per_branch = o.leaves_per_branch;
  spec.per_class = o.per_class;
  spec.vocab_shared = o.vocab_shared;
  spec.vocab_leaf = o.vocab_leaf;
  spec.noise = o.noise;
  spec.seed = o.seed;
  auto [corpus, tree] = lascl::generate_synthetic(spec);
  lascl::write_jsonl(corpus, tree, o.out);
  const size_t n = corpus.train.examples.size() + corpus.validation.examples.size() +
                   corpus.test.examples.size();
  std::cout << "C=" << tree.num_classes() << " N=" << n
            << " train=" << corpus.train.examples.size()
            << " validation=" << corpus.validation.examples.size()
            << " test=" << corpus.test.examples.size() << " wrote " << o.out << "\n";
  return 0;
}

int cmd_train(const TrainOpts& o) {
  const auto variant = lascl::parse_variant(o.variant);
  if (!variant) {
    throw lascl::Error(lascl::ErrorCode::InvalidArgument, "unknown variant " + o.variant);
  }

  auto [corpus, tree] = lascl::load_jsonl(o.data);
  if (o.kshot > 0) corpus.train = lascl::kshot_sample(corpus.train, o.kshot, o.seed);
  const lascl::LabelTree sentence_tree =
      o.bottom_up_levels >= 1 ? lascl::truncate_bottom_up(tree, o.bottom_up_levels) : tree;

  lascl::Overrides overrides;
  const lascl::Overrides* overrides_ptr = nullptr;
  if (!o.descriptions.empty()) {
    overrides = lascl::load_overrides(o.descriptions, sentence_tree);
    overrides_ptr = &overrides;
  }

  lascl::TrainConfig cfg;
  cfg.variant = *variant;
  cfg.tau = o.tau;
  cfg.batch_size = o.batch;
  cfg.epochs = o.epochs;
  cfg.lr = o.lr;
  cfg.weight_decay = o.weight_decay;
  cfg.reencode_every = o.reencode_every;
  cfg.eval_every = o.eval_every;
  cfg.patience = o.patience;
  cfg.seed = o.seed;
  cfg.dims = lascl::EncoderDims{o.buckets, o.embed_dim, o.hidden_dim, o.out_dim};

  const lascl::TemplateSpec tmpl{o.template_pattern};
  const lascl::TrainResult res = lascl::train(cfg, corpus, sentence_tree, tmpl, overrides_ptr);

  fs::create_directories(o.out);
  lascl::Checkpoint ck;
  ck.params = res.state.best.params;
  ck.labels = res.state.best.labels;
  ck.config = cfg;
  ck.run = lascl::RunInfo{o.kshot,        o.bottom_up_levels,
                          o.template_pattern, o.descriptions,
                          o.data,         res.state.best.val_node_acc,
                          res.state.best.step};
  const std::string ck_path = (fs::path(o.out) / "checkpoint.json").string();
  const std::string history_path = (fs::path(o.out) / "history.csv").string();
  lascl::save_checkpoint(ck, ck_path);
  lascl::write_history_csv(res.history, history_path);

  std::cout << "trained " << lascl::variant_name(cfg.variant) << " for " << res.state.step
            << " steps on " << corpus.train.examples.size() << " examples\n"
            << "val nodeAcc: initial=" << res.state.initial_val_node_acc
            << " best=" << res.state.best.val_node_acc << " at step " << res.state.best.step
            << "\n"
            << "wrote " << ck_path << " and " << history_path << "\n";
  return 0;
}

int cmd_eval(const EvalOpts& o) {
  const lascl::Checkpoint ck = lascl::load_checkpoint(o.checkpoint);
  auto [corpus, tree] = lascl::load_jsonl(o.data);
  if (static_cast<size_t>(tree.num_classes()) != ck.labels.u.cols) {
    throw lascl::Error(lascl::ErrorCode::ShapeMismatch,
                       "checkpoint has " + std::to_string(ck.labels.u.cols) +
                           " classes, dataset has " + std::to_string(tree.num_classes()));
  }

  lascl::MetricsReport report;
  if (o.mode == "dt") {
    report = lascl::direct_test(ck.params, ck.labels, corpus.test, tree);
  } else {
    const auto encode_split = [&](const lascl::Dataset& split, std::vector<lascl::Vec>& z,
                                  std::vector<int>& y) {
      for (const auto& ex : split.examples) {
        z.push_back(lascl::encode(
            ck.params, lascl::hash_vectorize(ex.text, ck.params.dims.buckets)));
        y.push_back(ex.class_index);
      }
    };
    const lascl::Dataset sampled = lascl::kshot_sample(corpus.train, o.lp_per_class, o.seed);
    std::vector<lascl::Vec> train_z, val_z, test_z;
    std::vector<int> train_y, val_y, test_y;
    encode_split(sampled, train_z, train_y);
    encode_split(corpus.validation, val_z, val_y);
    encode_split(corpus.test, test_z, test_y);

    lascl::ProbeConfig pc;
    pc.lr = o.lp_lr;
    pc.weight_decay = o.lp_weight_decay;
    pc.epochs = o.lp_epochs;
    pc.batch_size = o.lp_batch;
    pc.seed = o.seed;
    const lascl::ProbeInit init = (o.mode == "lp-label-init")
                                      ? lascl::ProbeInit::LabelEmbeddings
                                      : lascl::ProbeInit::Random;
    const lascl::LinearProbe probe = lascl::linear_probe_train(
        train_z, train_y, val_z, val_y, tree.num_classes(), init, &ck.labels.u, pc);

    std::vector<int> pred;
    pred.reserve(test_z.size());
    for (const auto& z : test_z) pred.push_back(lascl::probe_predict(probe, z));
    report = lascl::report_from_predictions(tree, test_y, pred, test_z);
  }

  const std::string out_path =
      o.report_out.empty() ? default_report_path(o.checkpoint, o.mode) : o.report_out;
  const std::string text = lascl::metrics_to_json(report, o.mode);
  std::ofstream out(out_path);
  if (!out) throw lascl::Error(lascl::ErrorCode::IoError, "cannot write " + out_path);
  out << text << "\n";
  std::cout << text << "\n";
  std::cerr << "wrote " << out_path << "\n";
  return 0;
}

int cmd_gradcheck(const GradcheckOpts& o) {
  const lascl::GradCheckReport report = lascl::run_gradcheck(o.trials, o.seed);
  for (const auto& entry : report.entries) {
    std::cout << entry.component << ": max_rel_err=" << entry.max_rel_err
              << " coords=" << entry.coords_checked << "\n";
  }
  if (!report.passed()) {
    std::cout << "FAIL (tolerance " << report.tolerance << ")\n";
    return 2;
  }
  std::cout << "PASS (tolerance " << report.tolerance << ", " << o.trials << " trials)\n";
  return 0;
}

int cmd_dump(const DumpOpts& o) {
  const lascl::Checkpoint ck = lascl::load_checkpoint(o.checkpoint);
  if (!o.similarity.empty()) {
    lascl::write_similarity_csv(ck.labels, o.similarity);
    std::cout << "wrote " << o.similarity << "\n";
  } else {
    auto [corpus, tree] = lascl::load_jsonl(o.data);
    if (static_cast<size_t>(tree.num_classes()) != ck.labels.u.cols) {
      throw lascl::Error(lascl::ErrorCode::ShapeMismatch,
                         "checkpoint and dataset class counts differ");
    }
    lascl::export_embeddings_csv(ck.params, corpus.test, ck.labels, o.embeddings);
    std::cout << "wrote " << o.embeddings << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"label-aware supervised contrastive learning toolkit"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  GenDataOpts gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-data", "write a synthetic two-level corpus");
  gen_cmd->add_option("--branches", gen.branches, "top-level branches")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--leaves-per-branch", gen.leaves_per_branch, "leaf classes per branch")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--per-class", gen.per_class, "examples per class")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--noise", gen.noise, "uniform noise token probability")
      ->check(CLI::Validator(
          [](std::string& s) {
            try {
              const double v = std::stod(s);
              if (v >= 0.0 && v < 1.0) return std::string();
            } catch (...) {
            }
            return std::string("noise must be in [0, 1)");
          },
          "FLOAT:[0,1)"));
  gen_cmd->add_option("--seed", gen.seed, "generator seed");
  gen_cmd->add_option("--out", gen.out, "output JSONL path");
  gen_cmd->add_option("--config", gen.config, "JSON config merged under explicit flags");

  TrainOpts tr;
  CLI::App* train_cmd = app.add_subcommand("train", "train an encoder and class centers");
  train_cmd->add_option("--data", tr.data, "JSONL dataset");
  train_cmd->add_option("--variant", tr.variant, "loss variant")
      ->check(CLI::IsMember({"scl", "li", "liuc", "lic", "lisc"}));
  train_cmd->add_option("--tau", tr.tau, "base temperature")->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch", tr.batch, "batch size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--epochs", tr.epochs, "training epochs")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--reencode-every", tr.reencode_every,
                        "steps between label re-encodings")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--kshot", tr.kshot, "per-class training examples (0 = all)")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--bottom-up-levels", tr.bottom_up_levels,
                        "keep only the last L path levels (0 = full hierarchy)")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--template", tr.template_pattern, "label sentence template");
  train_cmd->add_option("--descriptions", tr.descriptions,
                        "JSON map of class paths to replacement sentences");
  train_cmd->add_option("--seed", tr.seed, "training seed");
  train_cmd->add_option("--out", tr.out, "output directory");
  train_cmd->add_option("--config", tr.config, "JSON config merged under explicit flags");

  EvalOpts ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "checkpoint JSON");
  eval_cmd->add_option("--data", ev.data, "JSONL dataset");
  eval_cmd->add_option("--mode", ev.mode, "dt (nearest center) or linear probe")
      ->check(CLI::IsMember({"dt", "lp", "lp-label-init"}));
  eval_cmd->add_option("--lp-per-class", ev.lp_per_class,
                       "probe training examples per class")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--config", ev.config, "JSON config merged under explicit flags");

  GradcheckOpts gc;
  CLI::App* gradcheck_cmd =
      app.add_subcommand("gradcheck", "finite-difference audit of all gradients");
  gradcheck_cmd->add_option("--trials", gc.trials, "random trials")
      ->check(CLI::PositiveNumber);
  gradcheck_cmd->add_option("--seed", gc.seed, "trial seed");
  gradcheck_cmd->add_option("--config", gc.config, "JSON config merged under explicit flags");

  DumpOpts dp;
  CLI::App* dump_cmd = app.add_subcommand("dump", "export similarity matrices or embeddings");
  dump_cmd->add_option("--checkpoint", dp.checkpoint, "checkpoint JSON");
  dump_cmd->add_option("--similarity", dp.similarity, "write W and S as CSV to this path");
  dump_cmd->add_option("--embeddings", dp.embeddings,
                       "write test-split + label embeddings as CSV to this path");
  dump_cmd->add_option("--data", dp.data, "JSONL dataset (required with --embeddings)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(gen_cmd)) {
      apply_config(gen_cmd, gen.config,
                   {{"branches", {"--branches", [&](const json& v) { gen.branches = v.get<int>(); }}},
                    {"leaves_per_branch",
                     {"--leaves-per-branch", [&](const json& v) { gen.leaves_per_branch = v.get<int>(); }}},
                    {"per_class", {"--per-class", [&](const json& v) { gen.per_class = v.get<int>(); }}},
                    {"noise", {"--noise", [&](const json& v) { gen.noise = v.get<double>(); }}},
                    {"seed", {"--seed", [&](const json& v) { gen.seed = v.get<uint64_t>(); }}},
                    {"out", {"--out", [&](const json& v) { gen.out = v.get<std::string>(); }}},
                    {"vocab_shared", {nullptr, [&](const json& v) { gen.vocab_shared = v.get<int>(); }}},
                    {"vocab_leaf", {nullptr, [&](const json& v) { gen.vocab_leaf = v.get<int>(); }}}});
      return cmd_gen_data(gen);
    }
    if (app.got_subcommand(train_cmd)) {
      apply_config(
          train_cmd, tr.config,
          {{"data", {"--data", [&](const json& v) { tr.data = v.get<std::string>(); }}},
           {"variant", {"--variant", [&](const json& v) { tr.variant = v.get<std::string>(); }}},
           {"tau", {"--tau", [&](const json& v) { tr.tau = v.get<double>(); }}},
           {"batch", {"--batch", [&](const json& v) { tr.batch = v.get<int>(); }}},
           {"epochs", {"--epochs", [&](const json& v) { tr.epochs = v.get<int>(); }}},
           {"reencode_every",
            {"--reencode-every", [&](const json& v) { tr.reencode_every = v.get<int64_t>(); }}},
           {"kshot", {"--kshot", [&](const json& v) { tr.kshot = v.get<int>(); }}},
           {"bottom_up_levels",
            {"--bottom-up-levels", [&](const json& v) { tr.bottom_up_levels = v.get<int>(); }}},
           {"template",
            {"--template", [&](const json& v) { tr.template_pattern = v.get<std::string>(); }}},
           {"descriptions",
            {"--descriptions", [&](const json& v) { tr.descriptions = v.get<std::string>(); }}},
           {"seed", {"--seed", [&](const json& v) { tr.seed = v.get<uint64_t>(); }}},
           {"out", {"--out", [&](const json& v) { tr.out = v.get<std::string>(); }}},
           {"lr", {nullptr, [&](const json& v) { tr.lr = v.get<double>(); }}},
           {"weight_decay", {nullptr, [&](const json& v) { tr.weight_decay = v.get<double>(); }}},
           {"eval_every", {nullptr, [&](const json& v) { tr.eval_every = v.get<int64_t>(); }}},
           {"patience", {nullptr, [&](const json& v) { tr.patience = v.get<int>(); }}},
           {"buckets", {nullptr, [&](const json& v) { tr.buckets = v.get<uint32_t>(); }}},
           {"embed_dim", {nullptr, [&](const json& v) { tr.embed_dim = v.get<size_t>(); }}},
           {"hidden_dim", {nullptr, [&](const json& v) { tr.hidden_dim = v.get<size_t>(); }}},
           {"out_dim", {nullptr, [&](const json& v) { tr.out_dim = v.get<size_t>(); }}}});
      return cmd_train(tr);
    }
    if (app.got_subcommand(eval_cmd)) {
      apply_config(
          eval_cmd, ev.config,
          {{"checkpoint",
            {"--checkpoint", [&](const json& v) { ev.checkpoint = v.get<std::string>(); }}},
           {"data", {"--data", [&](const json& v) { ev.data = v.get<std::string>(); }}},
           {"mode", {"--mode", [&](const json& v) { ev.mode = v.get<std::string>(); }}},
           {"lp_per_class",
            {"--lp-per-class", [&](const json& v) { ev.lp_per_class = v.get<int>(); }}},
           {"lp_epochs", {nullptr, [&](const json& v) { ev.lp_epochs = v.get<int>(); }}},
           {"lp_lr", {nullptr, [&](const json& v) { ev.lp_lr = v.get<double>(); }}},
           {"lp_weight_decay",
            {nullptr, [&](const json& v) { ev.lp_weight_decay = v.get<double>(); }}},
           {"lp_batch", {nullptr, [&](const json& v) { ev.lp_batch = v.get<int>(); }}},
           {"seed", {nullptr, [&](const json& v) { ev.seed = v.get<uint64_t>(); }}},
           {"report_out", {nullptr, [&](const json& v) { ev.report_out = v.get<std::string>(); }}}});
      return cmd_eval(ev);
    }
    if (app.got_subcommand(gradcheck_cmd)) {
      apply_config(gradcheck_cmd, gc.config,
                   {{"trials", {"--trials", [&](const json& v) { gc.trials = v.get<int>(); }}},
                    {"seed", {"--seed", [&](const json& v) { gc.seed = v.get<uint64_t>(); }}}});
      return cmd_gradcheck(gc);
    }
    if (app.got_subcommand(dump_cmd)) {
      if (dp.similarity.empty() == dp.embeddings.empty()) {
        std::cerr << "dump: give exactly one of --similarity or --embeddings\n";
        return 1;
      }
      if (!dp.embeddings.empty() && dp.data.empty()) {
        std::cerr << "dump: --embeddings needs --data\n";
        return 1;
      }
      return cmd_dump(dp);
    }
  } catch (const lascl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
