#include "lascl/tree.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "lascl/error.hpp"

namespace lascl {

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

int find_child(const LabelTree& tree, int node_id, const std::string& name) {
  for (int child : tree.node(node_id).children) {
    if (tree.node(child).name == name) return child;
  }
  return -1;
}

}  // namespace

LabelTree build_tree(const LabelPaths& label_paths) {
  if (label_paths.empty()) throw Error(ErrorCode::EmptyPath, "no label paths given");

  const int num_classes = static_cast<int>(label_paths.size());
  std::vector<const std::vector<std::string>*> path_of(static_cast<size_t>(num_classes), nullptr);
  for (const auto& [class_index, path] : label_paths) {
    if (class_index < 0 || class_index >= num_classes) {
      throw Error(ErrorCode::InvalidArgument,
                  "class indices must cover 0.." + std::to_string(num_classes - 1) +
                      ", got " + std::to_string(class_index));
    }
    if (path_of[static_cast<size_t>(class_index)] != nullptr) {
      throw Error(ErrorCode::DuplicateClass,
                  "class index " + std::to_string(class_index) + " declared twice");
    }
    if (path.empty()) {
      throw Error(ErrorCode::EmptyPath,
                  "class " + std::to_string(class_index) + " has an empty path");
    }
    path_of[static_cast<size_t>(class_index)] = &path;
  }

  LabelTree tree;
  tree.nodes.push_back(LabelNode{0, std::nullopt, "", 0, {}, std::nullopt});
  tree.root_id = 0;
  tree.leaf_ids.assign(static_cast<size_t>(num_classes), -1);

  for (int c = 0; c < num_classes; ++c) {
    const auto& path = *path_of[static_cast<size_t>(c)];
    int cur = tree.root_id;
    for (size_t level = 0; level < path.size(); ++level) {
      // Walking past a node that is already a declared leaf would make that
      // leaf internal.
      if (tree.node(cur).class_index.has_value()) {
        throw Error(ErrorCode::PrefixConflict,
                    "path of class " + std::to_string(c) + " extends through leaf \"" +
                        tree.node(cur).name + "\"");
      }
      int next = find_child(tree, cur, path[level]);
      if (next < 0) {
        next = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(LabelNode{next, cur, path[level],
                                       tree.node(cur).depth + 1, {}, std::nullopt});
        tree.nodes[static_cast<size_t>(cur)].children.push_back(next);
      }
      cur = next;
    }
    LabelNode& leaf = tree.nodes[static_cast<size_t>(cur)];
    if (!leaf.children.empty()) {
      throw Error(ErrorCode::PrefixConflict,
                  "path of class " + std::to_string(c) + " ends at internal node \"" +
                      leaf.name + "\"");
    }
    if (leaf.class_index.has_value()) {
      throw Error(ErrorCode::LeafCollision,
                  "classes " + std::to_string(*leaf.class_index) + " and " + std::to_string(c) +
                      " share the path \"" + join(path, "/") + "\"");
    }
    leaf.class_index = c;
    tree.leaf_ids[static_cast<size_t>(c)] = cur;
  }
  return tree;
}

namespace {

int leaf_of(const LabelTree& tree, int class_index) {
  if (class_index < 0 || class_index >= tree.num_classes()) {
    throw Error(ErrorCode::UnknownClass, "class index " + std::to_string(class_index));
  }
  return tree.leaf_ids[static_cast<size_t>(class_index)];
}

}  // namespace

std::vector<std::string> ancestor_path(const LabelTree& tree, int class_index) {
  std::vector<std::string> names;
  int cur = leaf_of(tree, class_index);
  while (cur != tree.root_id) {
    names.push_back(tree.node(cur).name);
    cur = *tree.node(cur).parent;
  }
  std::reverse(names.begin(), names.end());
  return names;
}

std::string joined_path(const LabelTree& tree, int class_index, const std::string& separator) {
  return join(ancestor_path(tree, class_index), separator);
}

std::string label_sentence(const LabelTree& tree, int class_index, const TemplateSpec& tmpl,
                           const Overrides* overrides) {
  leaf_of(tree, class_index);  // validate the class
  if (overrides != nullptr) {
    auto it = overrides->find(class_index);
    if (it != overrides->end()) return it->second;
  }

  const std::vector<std::string> path = ancestor_path(tree, class_index);
  const std::string& pattern = tmpl.pattern;
  std::string out;
  size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] != '{') {
      out += pattern[i++];
      continue;
    }
    const size_t close = pattern.find('}', i);
    if (close == std::string::npos) {
      throw Error(ErrorCode::UnresolvedPlaceholder, "unterminated '{' in template");
    }
    const std::string inner = pattern.substr(i + 1, close - i - 1);
    if (inner == "label") {
      out += join(path, ", ");
    } else if (inner.size() > 7 && inner.rfind("label[L", 0) == 0 && inner.back() == ']') {
      const std::string digits = inner.substr(7, inner.size() - 8);
      if (digits.empty() ||
          !std::all_of(digits.begin(), digits.end(),
                       [](unsigned char ch) { return std::isdigit(ch) != 0; })) {
        throw Error(ErrorCode::UnresolvedPlaceholder, "bad placeholder {" + inner + "}");
      }
      const size_t layer = static_cast<size_t>(std::stoul(digits));
      if (layer < 1 || layer > path.size()) {
        throw Error(ErrorCode::UnresolvedPlaceholder,
                    "{" + inner + "} out of range for class " + std::to_string(class_index) +
                        " (path depth " + std::to_string(path.size()) + ")");
      }
      out += path[layer - 1];
    } else {
      throw Error(ErrorCode::UnresolvedPlaceholder, "unknown placeholder {" + inner + "}");
    }
    i = close + 1;
  }
  return out;
}

LabelTree truncate_bottom_up(const LabelTree& tree, int levels) {
  if (levels < 1) {
    throw Error(ErrorCode::InvalidArgument, "levels must be >= 1, got " + std::to_string(levels));
  }
  LabelPaths truncated;
  truncated.reserve(static_cast<size_t>(tree.num_classes()));
  for (int c = 0; c < tree.num_classes(); ++c) {
    std::vector<std::string> path = ancestor_path(tree, c);
    const size_t keep = std::min(path.size(), static_cast<size_t>(levels));
    truncated.emplace_back(c, std::vector<std::string>(path.end() - static_cast<long>(keep),
                                                       path.end()));
  }
  return build_tree(truncated);
}

int ancestor_at_depth(const LabelTree& tree, int class_index, int depth) {
  int cur = leaf_of(tree, class_index);
  const int leaf_depth = tree.node(cur).depth;
  if (depth < 1 || depth > leaf_depth) {
    throw Error(ErrorCode::DepthOutOfRange,
                "depth " + std::to_string(depth) + " outside 1.." + std::to_string(leaf_depth) +
                    " for class " + std::to_string(class_index));
  }
  while (tree.node(cur).depth > depth) cur = *tree.node(cur).parent;
  return cur;
}

}  // namespace lascl
