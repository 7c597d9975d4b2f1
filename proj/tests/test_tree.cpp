#include <doctest.h>

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "lascl/error.hpp"
#include "lascl/rng.hpp"
#include "lascl/tree.hpp"

#include "test_support.hpp"

using lascl::Error;
using lascl::ErrorCode;
using lascl::LabelPaths;
using lascl::LabelTree;
using lascl::TemplateSpec;

namespace {

const LabelPaths kNewsPaths = {
    {0, {"recreation", "sport", "hockey"}},
    {1, {"recreation", "sport", "baseball"}},
};

const LabelPaths kDeepPath = {
    {0, {"Computer", "System", "IBM", "PC", "Hardware"}},
    {1, {"Computer", "System", "IBM", "PC", "Software"}},
    {2, {"Science", "Space"}},
};

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("build_tree shares prefixes and orders leaves by class index") {
  const LabelTree tree = lascl::build_tree(kNewsPaths);
  CHECK(tree.num_classes() == 2);
  // root + recreation + sport + two leaves
  CHECK(tree.nodes.size() == 5);
  const auto& hockey = tree.node(tree.leaf_ids[0]);
  const auto& baseball = tree.node(tree.leaf_ids[1]);
  CHECK(hockey.name == "hockey");
  CHECK(baseball.name == "baseball");
  CHECK(hockey.depth == 3);
  CHECK(baseball.depth == 3);
  CHECK(hockey.parent == baseball.parent);  // shared "sport" node
  CHECK(tree.node(*hockey.parent).name == "sport");
  CHECK(tree.node(tree.root_id).depth == 0);
  CHECK(!tree.node(tree.root_id).parent.has_value());
}

TEST_CASE("build_tree single-name path gives a depth-1 leaf") {
  const LabelTree tree = lascl::build_tree({{0, {"science"}}});
  CHECK(tree.num_classes() == 1);
  CHECK(tree.node(tree.leaf_ids[0]).depth == 1);
  CHECK(tree.node(tree.leaf_ids[0]).name == "science");
}

TEST_CASE("five-level path keeps all ancestor names in order") {
  const LabelTree tree = lascl::build_tree(kDeepPath);
  CHECK(tree.node(tree.leaf_ids[0]).depth == 5);
  const std::vector<std::string> expected = {"Computer", "System", "IBM", "PC", "Hardware"};
  CHECK(lascl::ancestor_path(tree, 0) == expected);
  CHECK(lascl::ancestor_path(tree, 2) == std::vector<std::string>{"Science", "Space"});
}

TEST_CASE("build_tree rejects malformed inputs with specific codes") {
  CHECK(code_of([] { lascl::build_tree({}); }) == ErrorCode::EmptyPath);
  CHECK(code_of([] { lascl::build_tree({{0, {}}}); }) == ErrorCode::EmptyPath);
  CHECK(code_of([] {
          lascl::build_tree({{0, {"a"}}, {0, {"b"}}});
        }) == ErrorCode::DuplicateClass);
  CHECK(code_of([] {
          lascl::build_tree({{0, {"a"}}, {2, {"b"}}});
        }) == ErrorCode::InvalidArgument);
  // a declared leaf reused as an internal node, both orders
  CHECK(code_of([] {
          lascl::build_tree({{0, {"a"}}, {1, {"a", "b"}}});
        }) == ErrorCode::PrefixConflict);
  CHECK(code_of([] {
          lascl::build_tree({{0, {"a", "b"}}, {1, {"a"}}});
        }) == ErrorCode::PrefixConflict);
  CHECK(code_of([] {
          lascl::build_tree({{0, {"a", "b"}}, {1, {"a", "b"}}});
        }) == ErrorCode::LeafCollision);
}

TEST_CASE("ancestor_path round-trips build_tree on random taxonomies") {
  lascl::Rng rng(20240817);
  for (int trial = 0; trial < 25; ++trial) {
    const LabelPaths paths = testsup::random_label_paths(rng);
    const LabelTree tree = lascl::build_tree(paths);
    REQUIRE(tree.num_classes() == static_cast<int>(paths.size()));
    for (const auto& [c, names] : paths) {
      CHECK(lascl::ancestor_path(tree, c) == names);
    }
  }
}

TEST_CASE("ancestor_path rejects unknown classes") {
  const LabelTree tree = lascl::build_tree(kNewsPaths);
  CHECK(code_of([&] { lascl::ancestor_path(tree, 2); }) == ErrorCode::UnknownClass);
  CHECK(code_of([&] { lascl::ancestor_path(tree, -1); }) == ErrorCode::UnknownClass);
}

TEST_CASE("label_sentence renders the comma-joined path") {
  const LabelTree tree = lascl::build_tree(kNewsPaths);
  const TemplateSpec tmpl{"It contains {label} news."};
  CHECK(lascl::label_sentence(tree, 0, tmpl) == "It contains recreation, sport, hockey news.");
  CHECK(lascl::label_sentence(tree, 1, tmpl) ==
        "It contains recreation, sport, baseball news.");
}

TEST_CASE("label_sentence resolves per-layer placeholders") {
  const LabelTree tree = lascl::build_tree({{0, {"Place", "Village"}}, {1, {"Place", "Town"}}});
  const TemplateSpec tmpl{"It contains {label[L2]} under {label[L1]} category."};
  CHECK(lascl::label_sentence(tree, 0, tmpl) == "It contains Village under Place category.");
  CHECK(lascl::label_sentence(tree, 1, tmpl) == "It contains Town under Place category.");
}

TEST_CASE("label_sentence overrides bypass the template verbatim") {
  const LabelTree tree = lascl::build_tree(kNewsPaths);
  const lascl::Overrides overrides = {{1, "custom description"}};
  const TemplateSpec tmpl{"It contains {label} news."};
  CHECK(lascl::label_sentence(tree, 1, tmpl, &overrides) == "custom description");
  CHECK(lascl::label_sentence(tree, 0, tmpl, &overrides) ==
        "It contains recreation, sport, hockey news.");
}

TEST_CASE("label_sentence rejects unresolvable placeholders") {
  const LabelTree tree = lascl::build_tree({{0, {"science"}}, {1, {"arts"}}});
  const auto expect_unresolved = [&](const std::string& pattern) {
    CHECK(code_of([&] { lascl::label_sentence(tree, 0, TemplateSpec{pattern}); }) ==
          ErrorCode::UnresolvedPlaceholder);
  };
  expect_unresolved("{label[L2]} is too deep");   // depth-1 leaf has no layer 2
  expect_unresolved("{label[L0]} is not 1-based");
  expect_unresolved("{unknown}");
  expect_unresolved("unterminated {label");
  expect_unresolved("{label[Lx]}");
}

TEST_CASE("truncate_bottom_up keeps the last levels of every path") {
  const LabelTree tree = lascl::build_tree(kDeepPath);

  SUBCASE("levels at or above max depth reproduce the paths") {
    const LabelTree same = lascl::truncate_bottom_up(tree, 5);
    for (int c = 0; c < tree.num_classes(); ++c) {
      CHECK(lascl::ancestor_path(same, c) == lascl::ancestor_path(tree, c));
    }
  }
  SUBCASE("levels=2 keeps the final two names") {
    const LabelTree cut = lascl::truncate_bottom_up(tree, 2);
    CHECK(lascl::ancestor_path(cut, 0) == std::vector<std::string>{"PC", "Hardware"});
    CHECK(lascl::ancestor_path(cut, 2) == std::vector<std::string>{"Science", "Space"});
  }
  SUBCASE("levels=1 flattens every leaf to depth 1") {
    const LabelTree flat = lascl::truncate_bottom_up(tree, 1);
    for (int c = 0; c < flat.num_classes(); ++c) {
      CHECK(flat.node(flat.leaf_ids[c]).depth == 1);
      CHECK(lascl::ancestor_path(flat, c) ==
            std::vector<std::string>{lascl::ancestor_path(tree, c).back()});
    }
  }
}

TEST_CASE("truncate_bottom_up signals colliding truncated paths") {
  const LabelTree tree = lascl::build_tree({{0, {"a", "x"}}, {1, {"b", "x"}}});
  CHECK(code_of([&] { lascl::truncate_bottom_up(tree, 1); }) == ErrorCode::LeafCollision);
  CHECK(code_of([&] { lascl::truncate_bottom_up(tree, 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("repeated truncation composes as the minimum level") {
  lascl::Rng rng(31337);
  for (int trial = 0; trial < 15; ++trial) {
    const LabelPaths paths = testsup::random_label_paths(rng);
    const LabelTree tree = lascl::build_tree(paths);
    for (int l1 = 2; l1 <= 5; ++l1) {
      for (int l2 = 2; l2 <= 5; ++l2) {
        LabelTree twice, once;
        try {
          twice = lascl::truncate_bottom_up(lascl::truncate_bottom_up(tree, l1), l2);
          once = lascl::truncate_bottom_up(tree, std::min(l1, l2));
        } catch (const Error& e) {
          // collisions are possible on random trees; both orders must agree,
          // and the direct form must collide too
          CHECK(e.code() == ErrorCode::LeafCollision);
          continue;
        }
        for (int c = 0; c < tree.num_classes(); ++c) {
          CHECK(lascl::ancestor_path(twice, c) == lascl::ancestor_path(once, c));
        }
      }
    }
  }
}

TEST_CASE("ancestor_at_depth walks the root-to-leaf chain") {
  const LabelTree tree = lascl::build_tree(kDeepPath);
  const int leaf = tree.leaf_ids[0];
  CHECK(lascl::ancestor_at_depth(tree, 0, 5) == leaf);
  CHECK(lascl::ancestor_at_depth(tree, 0, 4) == *tree.node(leaf).parent);
  CHECK(tree.node(lascl::ancestor_at_depth(tree, 0, 1)).name == "Computer");
  CHECK(code_of([&] { lascl::ancestor_at_depth(tree, 0, 0); }) == ErrorCode::DepthOutOfRange);
  CHECK(code_of([&] { lascl::ancestor_at_depth(tree, 0, 6); }) == ErrorCode::DepthOutOfRange);

  // every returned node is on the chain: its parent chain reaches the root
  for (int depth = 1; depth <= 5; ++depth) {
    int id = lascl::ancestor_at_depth(tree, 0, depth);
    CHECK(tree.node(id).depth == depth);
    while (tree.node(id).parent.has_value()) id = *tree.node(id).parent;
    CHECK(id == tree.root_id);
  }
}
