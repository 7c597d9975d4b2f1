#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lascl/tree.hpp"

namespace lascl {

struct Example {
  std::string text;
  int class_index = -1;
};

// One split of a corpus.
struct Dataset {
  std::vector<Example> examples;
  std::string split = "train";  // train | validation | test
};

struct Corpus {
  Dataset train{{}, "train"};
  Dataset validation{{}, "validation"};
  Dataset test{{}, "test"};
};

// Sparse hashed bag of words: (bucket, count) sorted by bucket, counts > 0.
struct FeatureVector {
  std::vector<std::pair<uint32_t, double>> entries;
  uint32_t num_buckets = 0;
};

// Reads one JSON object per line: {"text": str, "label_path": [str, ...],
// "split": str?}. split defaults to "train". Distinct label paths become
// classes in order of first appearance. Raises ParseError with the line
// number on malformed input; taxonomy errors propagate from build_tree.
std::pair<Corpus, LabelTree> load_jsonl(const std::string& path);

void write_jsonl(const Corpus& corpus, const LabelTree& tree, const std::string& path);

struct SyntheticSpec {
  int branches = 4;
  int leaves_per_branch = 3;
  int per_class = 100;
  int vocab_shared = 50;  // branch-shared token pool per branch
  int vocab_leaf = 30;    // leaf-private token pool per leaf
  double noise = 0.1;     // probability of a uniform noise token
  uint64_t seed = 7;
};

// Two-level taxonomy (branches -> leaves) with token-soup texts: each of the
// 20 tokens per example is branch-shared with p=0.4, leaf-private with
// p=0.6-noise, and uniform noise otherwise. Splits are 80/10/10 round-robin
// within each class. Fully deterministic given the seed.
std::pair<Corpus, LabelTree> generate_synthetic(const SyntheticSpec& spec);

// Balanced few-shot subsample: exactly min(k, class size) examples per class,
// without replacement, original order preserved. Deterministic given seed.
Dataset kshot_sample(const Dataset& dataset, int k, uint64_t seed);

uint64_t fnv1a64(const std::string& token);

// Lowercases (ASCII), splits on whitespace, keeps the first 128 tokens, and
// buckets each token by its 64-bit FNV-1a hash modulo num_buckets (a power of
// two). Pure and identical across platforms.
FeatureVector hash_vectorize(const std::string& text, uint32_t num_buckets);

// Reads a JSON object mapping "/"-joined class name paths to replacement
// description sentences. Unknown paths raise UnknownClass.
Overrides load_overrides(const std::string& path, const LabelTree& tree);

}  // namespace lascl
