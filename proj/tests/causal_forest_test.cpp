#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include "reachdiff/causal_forest.hpp"
#include "reachdiff/errors.hpp"
#include "reachdiff/synth.hpp"
#include "test_support.hpp"

using namespace reachdiff;
using reachdiff::testing::step_dataset;

namespace {

TrainingSet small_cohort(std::uint64_t seed) {
  CohortSpec spec = default_cohort_spec();
  spec.n_neurotypical = 3;
  spec.n_post_stroke = 1;
  spec.seed = seed;
  return generate_cohort(spec).training_set();
}

ForestParams quick_params(std::size_t n_trees, std::uint64_t seed) {
  ForestParams p;
  p.n_trees = n_trees;
  p.seed = seed;
  return p;
}

TEST(ForestParams, Validate) {
  ForestParams p;
  EXPECT_NO_THROW(p.validate());
  p.n_trees = 0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = {};
  p.subsample_fraction = 0.0;
  EXPECT_THROW(p.validate(), ValidationError);
  p.subsample_fraction = 1.01;
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Forest, SingleTreeFullSampleEqualsTree) {
  const TrainingSet d = small_cohort(1);
  ForestParams p = quick_params(1, 5);
  p.subsample_fraction = 1.0;
  const CausalForest forest = fit_forest(d, p);
  ASSERT_EQ(forest.trees().size(), 1u);
  const auto& tree = forest.trees()[0];
  // Subsample of everything: every row belongs to the tree.
  std::size_t rows = tree.splitting_rows().size();
  for (const auto& n : tree.nodes()) rows += n.estimation_rows.size();
  EXPECT_EQ(rows, d.size());
  for (const auto& t : generate_grid(WorkspaceSpec{}, {5, 5, 4})) {
    const auto x = featurize(t, Cue::kOk);
    EXPECT_EQ(forest.predict(x), tree.predict(x));
  }
}

TEST(Forest, PredictIsMeanOfTrees) {
  const CausalForest forest = fit_forest(small_cohort(2), quick_params(15, 3));
  EXPECT_EQ(forest.trees().size(), 15u);
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto x = featurize({rng.uniform(-0.3, 0.3), rng.uniform(0, 0.3), rng.uniform(0, 0.4)},
                             kAllCues[rng.uniform_index(4)]);
    const auto per_tree = forest.predict_trees(x);
    double sum = 0;
    for (const auto& t : forest.trees()) sum += t.predict(x);
    EXPECT_EQ(forest.predict(x), sum / 15.0);
    EXPECT_GE(forest.predict(x), *std::min_element(per_tree.begin(), per_tree.end()));
    EXPECT_LE(forest.predict(x), *std::max_element(per_tree.begin(), per_tree.end()));
  }
}

TEST(Forest, HandBuiltMean) {
  CausalTreeNode a;
  a.leaf_id = 0;
  a.tau_hat = 1.0;
  CausalTreeNode b = a;
  b.tau_hat = 2.0;
  const CausalForest forest(ForestParams{}, {CausalTree({a}, 1, {}), CausalTree({b}, 1, {})});
  EXPECT_EQ(forest.predict(std::array{0.3}), 1.5);
  const CausalForest same(ForestParams{}, {CausalTree({a}, 1, {}), CausalTree({a}, 1, {})});
  EXPECT_EQ(same.predict(std::array{0.3}), 1.0);
  EXPECT_THROW(forest.predict(std::array{0.3, 0.1}), ValidationError);
}

TEST(Forest, SubsampleSizesPerArm) {
  const TrainingSet d = step_dataset(101, 0.3, 1);
  ForestParams p = quick_params(4, 9);
  p.tree.min_samples = 2;
  const CausalForest forest = fit_forest(d, p);
  for (const auto& tree : forest.trees()) {
    std::size_t t = 0, c = 0;
    std::vector<std::size_t> used = tree.splitting_rows();
    for (const auto& n : tree.nodes()) {
      used.insert(used.end(), n.estimation_rows.begin(), n.estimation_rows.end());
    }
    std::sort(used.begin(), used.end());
    EXPECT_EQ(std::adjacent_find(used.begin(), used.end()), used.end());  // no replacement
    for (auto r : used) (d.treated[r] ? t : c)++;
    EXPECT_EQ(t, 51u);  // ⌈0.5 · 101⌉
    EXPECT_EQ(c, 51u);
  }
}

TEST(Forest, Deterministic) {
  const TrainingSet d = small_cohort(3);
  const CausalForest a = fit_forest(d, quick_params(10, 42));
  const CausalForest b = fit_forest(d, quick_params(10, 42));
  EXPECT_EQ(a, b);
  const CausalForest c = fit_forest(d, quick_params(10, 43));
  EXPECT_FALSE(a == c);
}

TEST(Forest, ParallelMatchesSequential) {
  const TrainingSet d = small_cohort(4);
  ForestParams p = quick_params(24, 8);
  p.n_threads = 1;
  const CausalForest seq = fit_forest(d, p);
  for (std::size_t threads : {2u, 3u, 8u, 0u}) {
    p.n_threads = threads;
    EXPECT_EQ(fit_forest(d, p), seq) << threads << " threads";
  }
}

TEST(Forest, TreeBDependsOnlyOnIndex) {
  const TrainingSet d = small_cohort(5);
  const CausalForest small = fit_forest(d, quick_params(3, 11));
  const CausalForest large = fit_forest(d, quick_params(6, 11));
  for (std::size_t b = 0; b < 3; ++b) EXPECT_EQ(small.trees()[b], large.trees()[b]);
}

TEST(Forest, ShiftEquivariance) {
  const TrainingSet d = small_cohort(6);
  const ForestParams p = quick_params(20, 17);
  const CausalForest base = fit_forest(d, p);
  TrainingSet shifted = d;
  TrainingSet both = d;
  const double c = 0.6;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.treated[i]) shifted.outcomes[i] += c;
    both.outcomes[i] += c;
  }
  const CausalForest fs = fit_forest(shifted, p);
  const CausalForest fb = fit_forest(both, p);
  for (const auto& t : generate_grid(WorkspaceSpec{}, {5, 5, 4})) {
    for (Cue cue : kAllCues) {
      const auto x = featurize(t, cue);
      EXPECT_NEAR(fs.predict(x), base.predict(x) + c, 1e-9);
      EXPECT_NEAR(fb.predict(x), base.predict(x), 1e-9);
    }
  }
}

TEST(Forest, AveragingBeatsMedianTree) {
  const TrainingSet d = step_dataset(300, 0.3, 12);
  const CausalForest forest = fit_forest(d, quick_params(100, 12));
  std::vector<double> tree_mse(forest.trees().size(), 0.0);
  double forest_mse = 0;
  int n = 0;
  for (double x = 0.005; x < 1.0; x += 0.01, ++n) {
    const double truth = x < 0.5 ? 1.0 : 3.0;
    forest_mse += std::pow(forest.predict(std::array{x}) - truth, 2);
    for (std::size_t b = 0; b < tree_mse.size(); ++b) {
      tree_mse[b] += std::pow(forest.trees()[b].predict(std::array{x}) - truth, 2);
    }
  }
  std::nth_element(tree_mse.begin(), tree_mse.begin() + tree_mse.size() / 2, tree_mse.end());
  EXPECT_LT(forest_mse / n, tree_mse[tree_mse.size() / 2] / n);
}

TEST(Forest, SubsampleTooSmall) {
  const TrainingSet d = step_dataset(30, 0.0, 1);
  ForestParams p = quick_params(2, 1);
  p.subsample_fraction = 0.3;  // 9 rows per arm < 2 · 5
  EXPECT_THROW(fit_forest(d, p), FitError);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  for (std::size_t threads : {1u, 2u, 5u}) {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  parallel_for(0, 4, [](std::size_t) { FAIL(); });
}

TEST(ParallelFor, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw FitError("boom");
                            }),
               FitError);
}

}  // namespace
