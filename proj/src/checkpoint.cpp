#include "lascl/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "lascl/error.hpp"

namespace lascl {

namespace {

using nlohmann::json;

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (size_t r = 0; r < m.rows; ++r) {
    json row = json::array();
    for (size_t c = 0; c < m.cols; ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& doc, size_t rows, size_t cols, const std::string& what) {
  if (!doc.is_array() || doc.size() != rows) {
    throw Error(ErrorCode::ParseError, what + ": expected " + std::to_string(rows) + " rows");
  }
  Mat m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    const json& row = doc[r];
    if (!row.is_array() || row.size() != cols) {
      throw Error(ErrorCode::ParseError, what + ": expected " + std::to_string(cols) + " cols");
    }
    for (size_t c = 0; c < cols; ++c) m(r, c) = row[c].get<double>();
  }
  return m;
}

Vec vec_from_json(const json& doc, size_t n, const std::string& what) {
  if (!doc.is_array() || doc.size() != n) {
    throw Error(ErrorCode::ParseError, what + ": expected " + std::to_string(n) + " entries");
  }
  Vec v(n);
  for (size_t i = 0; i < n; ++i) v[i] = doc[i].get<double>();
  return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  const EncoderParams& p = checkpoint.params;
  json doc;
  doc["format"] = "lascl-checkpoint-v1";
  doc["dims"] = {{"buckets", p.dims.buckets},
                 {"embed_dim", p.dims.embed_dim},
                 {"hidden_dim", p.dims.hidden_dim},
                 {"out_dim", p.dims.out_dim}};
  doc["seed"] = checkpoint.config.seed;
  doc["encoder"] = {{"embed", mat_to_json(p.embed)},
                    {"w1", mat_to_json(p.w1)},
                    {"b1", p.b1},
                    {"w2", mat_to_json(p.w2)},
                    {"b2", p.b2}};
  doc["label_space"] = {{"sentences", checkpoint.labels.sentences},
                        {"class_paths", checkpoint.labels.class_paths},
                        {"u", mat_to_json(checkpoint.labels.u)},
                        {"w", mat_to_json(checkpoint.labels.w)},
                        {"s", mat_to_json(checkpoint.labels.s)},
                        {"reencode_every", checkpoint.labels.reencode_every},
                        {"last_reencode_step", checkpoint.labels.last_reencode_step}};
  doc["config"] = {{"variant", variant_name(checkpoint.config.variant)},
                   {"tau", checkpoint.config.tau},
                   {"batch_size", checkpoint.config.batch_size},
                   {"epochs", checkpoint.config.epochs},
                   {"lr", checkpoint.config.lr},
                   {"weight_decay", checkpoint.config.weight_decay},
                   {"reencode_every", checkpoint.config.reencode_every},
                   {"eval_every", checkpoint.config.eval_every},
                   {"patience", checkpoint.config.patience},
                   {"seed", checkpoint.config.seed}};
  doc["run"] = {{"kshot", checkpoint.run.kshot},
                {"bottom_up_levels", checkpoint.run.bottom_up_levels},
                {"template", checkpoint.run.template_pattern},
                {"descriptions", checkpoint.run.descriptions_path},
                {"data", checkpoint.run.data_path},
                {"best_val_node_acc", checkpoint.run.best_val_node_acc},
                {"best_step", checkpoint.run.best_step}};

  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << doc.dump(1) << "\n";
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }

  try {
    Checkpoint ck;
    const json& dims = doc.at("dims");
    ck.params.dims.buckets = dims.at("buckets").get<uint32_t>();
    ck.params.dims.embed_dim = dims.at("embed_dim").get<size_t>();
    ck.params.dims.hidden_dim = dims.at("hidden_dim").get<size_t>();
    ck.params.dims.out_dim = dims.at("out_dim").get<size_t>();
    const EncoderDims& d = ck.params.dims;

    const json& enc = doc.at("encoder");
    ck.params.embed = mat_from_json(enc.at("embed"), d.buckets, d.embed_dim, "encoder.embed");
    ck.params.w1 = mat_from_json(enc.at("w1"), d.embed_dim, d.hidden_dim, "encoder.w1");
    ck.params.b1 = vec_from_json(enc.at("b1"), d.hidden_dim, "encoder.b1");
    ck.params.w2 = mat_from_json(enc.at("w2"), d.hidden_dim, d.out_dim, "encoder.w2");
    ck.params.b2 = vec_from_json(enc.at("b2"), d.out_dim, "encoder.b2");

    const json& ls = doc.at("label_space");
    ck.labels.sentences = ls.at("sentences").get<std::vector<std::string>>();
    ck.labels.class_paths = ls.at("class_paths").get<std::vector<std::string>>();
    const size_t C = ck.labels.sentences.size();
    if (C == 0 || ck.labels.class_paths.size() != C) {
      throw Error(ErrorCode::ParseError, "label_space: bad class lists");
    }
    ck.labels.u = mat_from_json(ls.at("u"), d.out_dim, C, "label_space.u");
    ck.labels.w = mat_from_json(ls.at("w"), C, C, "label_space.w");
    ck.labels.s = mat_from_json(ls.at("s"), C, C, "label_space.s");
    ck.labels.reencode_every = ls.at("reencode_every").get<int64_t>();
    ck.labels.last_reencode_step = ls.at("last_reencode_step").get<int64_t>();

    const json& cfg = doc.at("config");
    const auto variant = parse_variant(cfg.at("variant").get<std::string>());
    if (!variant) throw Error(ErrorCode::ParseError, "config: unknown variant");
    ck.config.variant = *variant;
    ck.config.tau = cfg.at("tau").get<double>();
    ck.config.batch_size = cfg.at("batch_size").get<int>();
    ck.config.epochs = cfg.at("epochs").get<int>();
    ck.config.lr = cfg.at("lr").get<double>();
    ck.config.weight_decay = cfg.at("weight_decay").get<double>();
    ck.config.reencode_every = cfg.at("reencode_every").get<int64_t>();
    ck.config.eval_every = cfg.at("eval_every").get<int64_t>();
    ck.config.patience = cfg.at("patience").get<int>();
    ck.config.seed = cfg.at("seed").get<uint64_t>();
    ck.config.dims = d;

    const json& run = doc.at("run");
    ck.run.kshot = run.at("kshot").get<int>();
    ck.run.bottom_up_levels = run.at("bottom_up_levels").get<int>();
    ck.run.template_pattern = run.at("template").get<std::string>();
    ck.run.descriptions_path = run.at("descriptions").get<std::string>();
    ck.run.data_path = run.at("data").get<std::string>();
    ck.run.best_val_node_acc = run.at("best_val_node_acc").get<double>();
    ck.run.best_step = run.at("best_step").get<int64_t>();
    return ck;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

}  // namespace lascl
