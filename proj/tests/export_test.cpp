#include <gtest/gtest.h>

#include <cstdio>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "reachdiff/export.hpp"
#include "reachdiff/synth.hpp"
#include "test_support.hpp"

using namespace reachdiff;

namespace {

struct Dot {
  std::vector<std::string> labels;
  std::vector<std::string> fills;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

// Minimal reader for the DOT dialect tree_to_dot writes.
Dot parse_dot(const std::string& text) {
  Dot dot;
  const std::regex node(R"re(^\s*n(\d+) \[label="([^"]*)", fillcolor="(#[0-9a-f]{6})".*\];$)re");
  const std::regex edge(R"(^\s*n(\d+) -> n(\d+);$)");
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "digraph causal_tree {");
  std::string last;
  while (std::getline(in, line)) {
    std::smatch m;
    if (std::regex_match(line, m, node)) {
      EXPECT_EQ(std::stoul(m[1]), dot.labels.size());
      dot.labels.push_back(m[2]);
      dot.fills.push_back(m[3]);
    } else if (std::regex_match(line, m, edge)) {
      dot.edges.emplace_back(std::stoul(m[1]), std::stoul(m[2]));
    }
    last = line;
  }
  EXPECT_EQ(last, "}");
  return dot;
}

CausalTree fitted_tree(std::uint64_t seed, std::size_t min_samples = 5) {
  CohortSpec spec = default_cohort_spec();
  spec.n_neurotypical = 4;
  spec.n_post_stroke = 2;
  spec.seed = seed;
  TreeParams p;
  p.seed = seed;
  p.min_samples = min_samples;
  return fit_tree(generate_cohort(spec).training_set(), p);
}

// Edge list of the tree in preorder numbering.
std::vector<std::pair<std::size_t, std::size_t>> preorder_edges(const CausalTree& tree) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t next = 0;
  std::function<void(int)> walk = [&](int n) {
    const std::size_t id = next++;
    if (tree.nodes()[n].is_leaf()) return;
    edges.emplace_back(id, next);
    walk(tree.nodes()[n].left);
    edges.emplace_back(id, next);
    walk(tree.nodes()[n].right);
  };
  walk(0);
  return edges;
}

TEST(Heatmap, DefaultResolution) {
  const FittedModel m = fitted_tree(1);
  const auto rows = heatmap(m, WorkspaceSpec{}, {5, 5, 4});
  ASSERT_EQ(rows.size(), 100u);
  const auto grid = generate_grid(WorkspaceSpec{}, {5, 5, 4});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].target, grid[i]);
    EXPECT_TRUE(contains(WorkspaceSpec{}, rows[i].target));
    EXPECT_EQ(rows[i].tau_hat, predict(m, featurize(grid[i], Cue::kMove)));
  }
  const auto now = heatmap(m, WorkspaceSpec{}, {5, 5, 4}, Cue::kNow);
  for (std::size_t i = 0; i < now.size(); ++i) {
    EXPECT_EQ(now[i].tau_hat, predict(m, featurize(grid[i], Cue::kNow)));
  }
}

TEST(Heatmap, SingleLeafIsConstant) {
  CausalTreeNode leaf;
  leaf.leaf_id = 0;
  leaf.tau_hat = 0.8;
  const FittedModel m = CausalTree({leaf}, feature::kCount, {});
  for (const auto& r : heatmap(m, WorkspaceSpec{}, {7, 9, 3})) EXPECT_EQ(r.tau_hat, 0.8);
}

TEST(Heatmap, NoiseFreeStepFieldHasTwoLevels) {
  CohortSpec spec = default_cohort_spec();
  spec.n_neurotypical = 10;
  spec.n_post_stroke = 1;
  spec.nominal.a = spec.nominal.b = 0.0;
  spec.nominal.sigma = 0.0;
  spec.distraction.p = 0.0;
  const FittedModel m = fit_tree(generate_cohort(spec).training_set(), TreeParams{});
  std::set<double> values;
  for (const auto& r : heatmap(m, WorkspaceSpec{}, {9, 9, 9})) {
    values.insert(r.tau_hat);
    if (r.target.z >= 0.3) EXPECT_NEAR(r.tau_hat, 2.0, 1e-12);
    if (r.target.z <= 0.14) EXPECT_NEAR(r.tau_hat, 0.5, 1e-12);
  }
  EXPECT_EQ(values.size(), 2u);
}

TEST(Heatmap, Csv) {
  const std::vector<HeatmapRow> rows{{{0.1, 0.0, 0.0}, 0.5}, {{0.0, 0.3, 0.4}, 2.25}};
  EXPECT_EQ(heatmap_to_csv(rows), "x,y,z,tau_hat\n0.1,0,0,0.5\n0,0.3,0.4,2.25\n");
}

TEST(Dot, FullDepthMatchesTopology) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const CausalTree tree = fitted_tree(seed, 3);
    const Dot dot = parse_dot(tree_to_dot(tree, SIZE_MAX));
    EXPECT_EQ(dot.labels.size(), tree.nodes().size());
    EXPECT_EQ(dot.edges, preorder_edges(tree));
    EXPECT_EQ(parse_dot(tree_to_dot(tree, tree.height())).labels.size(), tree.nodes().size());
    // Every non-root node has exactly one parent.
    std::map<std::size_t, int> parents;
    for (const auto& [from, to] : dot.edges) {
      EXPECT_LT(from, to);
      parents[to]++;
    }
    EXPECT_EQ(parents.size(), dot.labels.size() - 1);
    for (const auto& [node, count] : parents) EXPECT_EQ(count, 1);
  }
}

TEST(Dot, DepthZeroIsRootAggregate) {
  const CausalTree tree = fitted_tree(4);
  const Dot dot = parse_dot(tree_to_dot(tree, 0));
  ASSERT_EQ(dot.labels.size(), 1u);
  EXPECT_TRUE(dot.edges.empty());
  char expected[64];
  std::snprintf(expected, sizeof(expected), "tau = %.3f s", tree.aggregate(0).first);
  EXPECT_EQ(dot.labels[0].rfind(expected, 0), 0u) << dot.labels[0];
}

TEST(Dot, TruncatedSliceMatchesPartition) {
  const CausalTree tree = fitted_tree(5, 3);
  ASSERT_GE(tree.height(), 2u);
  const Dot dot = parse_dot(tree_to_dot(tree, 1));
  ASSERT_EQ(dot.labels.size(), 3u);
  const auto entries = tree.depth_k_partition(1);
  ASSERT_EQ(entries.size(), 2u);
  const auto& rule = tree.nodes()[0].rule;
  EXPECT_EQ(dot.labels[0].rfind(std::string(feature_name(rule.feature)) + " < ", 0), 0u);
  for (std::size_t i = 0; i < 2; ++i) {
    char expected[64];
    std::snprintf(expected, sizeof(expected), "tau = %.3f s", entries[i].tau_hat);
    EXPECT_EQ(dot.labels[i + 1].rfind(expected, 0), 0u) << dot.labels[i + 1];
    EXPECT_NE(dot.labels[i + 1].find("n_treated = "), std::string::npos);
  }
}

TEST(Dot, DarkerMeansHarder) {
  const CausalTree tree = fitted_tree(6, 3);
  const Dot dot = parse_dot(tree_to_dot(tree, 1));
  const auto entries = tree.depth_k_partition(1);
  ASSERT_EQ(entries.size(), 2u);
  const int left = std::stoi(dot.fills[1].substr(1, 2), nullptr, 16);
  const int right = std::stoi(dot.fills[2].substr(1, 2), nullptr, 16);
  if (entries[0].tau_hat > entries[1].tau_hat) {
    EXPECT_LT(left, right);
  } else if (entries[0].tau_hat < entries[1].tau_hat) {
    EXPECT_GT(left, right);
  }
}

TEST(Dot, LeafLabelsCarryCounts) {
  const CausalTree tree = fitted_tree(7);
  const Dot dot = parse_dot(tree_to_dot(tree, SIZE_MAX));
  std::size_t i = 0;
  std::function<void(int)> walk = [&](int n) {
    const auto& node = tree.nodes()[n];
    const std::string& label = dot.labels[i++];
    if (node.is_leaf()) {
      EXPECT_NE(label.find("n_treated = " + std::to_string(node.n_treated_est) +
                           ", n_control = " + std::to_string(node.n_control_est)),
                std::string::npos);
      return;
    }
    EXPECT_EQ(label.rfind(std::string(feature_name(node.rule.feature)) + " < ", 0), 0u);
    walk(node.left);
    walk(node.right);
  };
  walk(0);
}

}  // namespace
