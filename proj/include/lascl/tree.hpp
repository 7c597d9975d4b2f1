#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lascl {

struct LabelNode {
  int id = -1;
  std::optional<int> parent;       // empty only for the root
  std::string name;
  int depth = 0;                   // root sits at depth 0
  std::vector<int> children;
  std::optional<int> class_index;  // set on leaves only
};

// Label taxonomy. Classes are exactly the leaves; leaf_ids[c] is the node of
// class c, so leaf order defines the class indexing. Immutable once built.
struct LabelTree {
  std::vector<LabelNode> nodes;
  int root_id = 0;
  std::vector<int> leaf_ids;

  int num_classes() const { return static_cast<int>(leaf_ids.size()); }
  const LabelNode& node(int id) const { return nodes[static_cast<size_t>(id)]; }
};

// Sentence pattern. `{label}` expands to the comma-joined ancestor path of a
// class; `{label[Lk]}` expands to the path component at layer k (1-based,
// counted from just below the root). Any other brace group is an error.
struct TemplateSpec {
  std::string pattern;
};

// (class_index, names from the depth-1 ancestor down to the leaf).
using LabelPaths = std::vector<std::pair<int, std::vector<std::string>>>;

// Per-class replacement text returned verbatim instead of the template.
using Overrides = std::map<int, std::string>;

// Builds the taxonomy from root-exclusive name paths. Paths sharing a prefix
// share nodes; class indices must cover 0..C-1 exactly once. A path that is a
// strict prefix of another raises PrefixConflict (leaves must stay leaves);
// two identical paths raise LeafCollision.
LabelTree build_tree(const LabelPaths& label_paths);

// Names from the depth-1 ancestor down to the leaf, inclusive.
std::vector<std::string> ancestor_path(const LabelTree& tree, int class_index);

std::string joined_path(const LabelTree& tree, int class_index, const std::string& separator);

std::string label_sentence(const LabelTree& tree, int class_index, const TemplateSpec& tmpl,
                           const Overrides* overrides = nullptr);

// Rebuilds the taxonomy keeping only the last min(levels, depth) components
// of every leaf path. Class indices and the leaf set are preserved; paths
// that become identical raise LeafCollision.
LabelTree truncate_bottom_up(const LabelTree& tree, int levels);

// Node id of the ancestor of class_index at the given depth (1..leaf depth;
// the leaf itself at its own depth). Out-of-range depths raise
// DepthOutOfRange.
int ancestor_at_depth(const LabelTree& tree, int class_index, int depth);

}  // namespace lascl
