#include "lascl/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lascl/error.hpp"
#include "lascl/rng.hpp"

namespace lascl {

namespace {

using nlohmann::json;

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

Dataset* split_of(Corpus& corpus, const std::string& name) {
  if (name == "train") return &corpus.train;
  if (name == "validation") return &corpus.validation;
  if (name == "test") return &corpus.test;
  return nullptr;
}

}  // namespace

std::pair<Corpus, LabelTree> load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);

  Corpus corpus;
  std::map<std::vector<std::string>, int> class_of_path;
  LabelPaths paths_in_order;
  size_t total = 0;

  std::string line;
  for (size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (is_blank(line)) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("text") || !doc["text"].is_string() ||
        !doc.contains("label_path") || !doc["label_path"].is_array()) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) +
                      ": expected {\"text\": str, \"label_path\": [str...], \"split\": str?}");
    }
    std::vector<std::string> label_path;
    for (const auto& part : doc["label_path"]) {
      if (!part.is_string()) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": label_path holds a non-string");
      }
      label_path.push_back(part.get<std::string>());
    }
    std::string split = "train";
    if (doc.contains("split")) {
      if (!doc["split"].is_string()) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": split must be a string");
      }
      split = doc["split"].get<std::string>();
    }
    Dataset* dataset = split_of(corpus, split);
    if (dataset == nullptr) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": split \"" + split +
                      "\" is not train/validation/test");
    }

    auto [it, inserted] =
        class_of_path.emplace(label_path, static_cast<int>(paths_in_order.size()));
    if (inserted) paths_in_order.emplace_back(it->second, label_path);
    dataset->examples.push_back(Example{doc["text"].get<std::string>(), it->second});
    ++total;
  }
  if (total == 0) throw Error(ErrorCode::EmptyDataset, path + " holds no examples");

  LabelTree tree = build_tree(paths_in_order);

  if (corpus.train.examples.empty()) {
    std::cerr << "warning: " << path << " has no train examples\n";
  } else {
    std::set<int> train_classes;
    for (const auto& ex : corpus.train.examples) train_classes.insert(ex.class_index);
    for (int c = 0; c < tree.num_classes(); ++c) {
      if (!train_classes.count(c)) {
        std::cerr << "warning: class " << c << " (" << joined_path(tree, c, "/")
                  << ") is absent from the train split\n";
      }
    }
  }
  return {std::move(corpus), std::move(tree)};
}

void write_jsonl(const Corpus& corpus, const LabelTree& tree, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  for (const Dataset* dataset : {&corpus.train, &corpus.validation, &corpus.test}) {
    for (const auto& ex : dataset->examples) {
      json doc;
      doc["text"] = ex.text;
      doc["label_path"] = ancestor_path(tree, ex.class_index);
      doc["split"] = dataset->split;
      out << doc.dump() << "\n";
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

std::pair<Corpus, LabelTree> generate_synthetic(const SyntheticSpec& spec) {
  if (spec.branches < 1 || spec.leaves_per_branch < 1 || spec.per_class < 1 ||
      spec.vocab_shared < 1 || spec.vocab_leaf < 1) {
    throw Error(ErrorCode::InvalidArgument, "synthetic sizes must be positive");
  }
  if (spec.noise < 0.0 || spec.noise >= 1.0) {
    throw Error(ErrorCode::InvalidArgument, "noise must be in [0, 1)");
  }

  constexpr int kTokensPerExample = 20;
  constexpr int kNoiseVocab = 1000;
  constexpr double kBranchProb = 0.4;

  LabelPaths paths;
  const int num_classes = spec.branches * spec.leaves_per_branch;
  for (int leaf = 0; leaf < num_classes; ++leaf) {
    const int branch = leaf / spec.leaves_per_branch;
    paths.emplace_back(leaf, std::vector<std::string>{"b" + std::to_string(branch),
                                                      "l" + std::to_string(leaf)});
  }
  LabelTree tree = build_tree(paths);

  Corpus corpus;
  Rng rng(spec.seed);
  for (int leaf = 0; leaf < num_classes; ++leaf) {
    const int branch = leaf / spec.leaves_per_branch;
    for (int i = 0; i < spec.per_class; ++i) {
      std::string text;
      for (int t = 0; t < kTokensPerExample; ++t) {
        if (t) text += ' ';
        const double r = rng.unit();
        if (r < kBranchProb) {
          text += "b" + std::to_string(branch) + "w" +
                  std::to_string(rng.below(static_cast<uint64_t>(spec.vocab_shared)));
        } else if (r < 1.0 - spec.noise) {
          text += "l" + std::to_string(leaf) + "w" +
                  std::to_string(rng.below(static_cast<uint64_t>(spec.vocab_leaf)));
        } else {
          text += "z" + std::to_string(rng.below(kNoiseVocab));
        }
      }
      // 80/10/10 round-robin split within the class.
      Dataset* dataset = &corpus.train;
      if (i % 10 == 8) dataset = &corpus.validation;
      if (i % 10 == 9) dataset = &corpus.test;
      dataset->examples.push_back(Example{std::move(text), leaf});
    }
  }
  return {std::move(corpus), std::move(tree)};
}

Dataset kshot_sample(const Dataset& dataset, int k, uint64_t seed) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");

  std::map<int, std::vector<size_t>> by_class;
  for (size_t i = 0; i < dataset.examples.size(); ++i) {
    by_class[dataset.examples[i].class_index].push_back(i);
  }

  Rng rng(seed);
  std::vector<size_t> chosen;
  for (auto& [class_index, indices] : by_class) {
    (void)class_index;
    if (indices.size() <= static_cast<size_t>(k)) {
      chosen.insert(chosen.end(), indices.begin(), indices.end());
      continue;
    }
    // Partial Fisher-Yates: the first k slots end up holding a uniform
    // without-replacement sample.
    for (size_t i = 0; i < static_cast<size_t>(k); ++i) {
      const size_t j = i + static_cast<size_t>(rng.below(indices.size() - i));
      std::swap(indices[i], indices[j]);
    }
    indices.resize(static_cast<size_t>(k));
    std::sort(indices.begin(), indices.end());  // keep the original order
    chosen.insert(chosen.end(), indices.begin(), indices.end());
  }
  std::sort(chosen.begin(), chosen.end());

  Dataset out;
  out.split = dataset.split;
  out.examples.reserve(chosen.size());
  for (size_t i : chosen) out.examples.push_back(dataset.examples[i]);
  return out;
}

uint64_t fnv1a64(const std::string& token) {
  uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : token) {
    hash ^= static_cast<uint64_t>(c);
    hash *= 1099511628211ULL;
  }
  return hash;
}

FeatureVector hash_vectorize(const std::string& text, uint32_t num_buckets) {
  if (num_buckets == 0 || (num_buckets & (num_buckets - 1)) != 0) {
    throw Error(ErrorCode::InvalidArgument,
                "num_buckets must be a power of two, got " + std::to_string(num_buckets));
  }
  constexpr size_t kMaxTokens = 128;

  std::map<uint32_t, double> counts;
  size_t seen = 0;
  std::string token;
  auto flush = [&] {
    if (token.empty() || seen >= kMaxTokens) {
      token.clear();
      return;
    }
    ++seen;
    counts[static_cast<uint32_t>(fnv1a64(token) & (num_buckets - 1))] += 1.0;
    token.clear();
  };
  for (unsigned char c : text) {
    if (std::isspace(c) != 0) {
      flush();
    } else {
      token += static_cast<char>(std::tolower(c));
    }
  }
  flush();

  FeatureVector fv;
  fv.num_buckets = num_buckets;
  fv.entries.assign(counts.begin(), counts.end());
  return fv;
}

Overrides load_overrides(const std::string& path, const LabelTree& tree) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, path + ": expected a JSON object");

  std::map<std::string, int> class_of_path;
  for (int c = 0; c < tree.num_classes(); ++c) class_of_path[joined_path(tree, c, "/")] = c;

  Overrides overrides;
  for (const auto& [key, value] : doc.items()) {
    auto it = class_of_path.find(key);
    if (it == class_of_path.end()) {
      throw Error(ErrorCode::UnknownClass, path + ": no class with path \"" + key + "\"");
    }
    if (!value.is_string()) {
      throw Error(ErrorCode::ParseError, path + ": value for \"" + key + "\" is not a string");
    }
    overrides[it->second] = value.get<std::string>();
  }
  return overrides;
}

}  // namespace lascl
