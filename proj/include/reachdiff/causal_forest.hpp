#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "reachdiff/causal_tree.hpp"

namespace reachdiff {

struct ForestParams {
  std::size_t n_trees = 100;
  TreeParams tree;
  // Per-arm fraction drawn without replacement for each tree.
  double subsample_fraction = 0.5;
  std::uint64_t seed = 0;
  // Worker threads for fitting; 0 picks hardware concurrency. Does not affect results.
  std::size_t n_threads = 1;

  void validate() const;
};

class CausalForest {
 public:
  CausalForest() = default;
  CausalForest(ForestParams params, std::vector<CausalTree> trees);

  // Mean of the per-tree estimates.
  double predict(std::span<const double> x) const;
  std::vector<double> predict_trees(std::span<const double> x) const;

  const ForestParams& params() const { return params_; }
  const std::vector<CausalTree>& trees() const { return trees_; }
  std::size_t dimension() const { return trees_.empty() ? 0 : trees_.front().dimension(); }
  double mean_leaf_count() const;

  friend bool operator==(const CausalForest& a, const CausalForest& b) {
    return a.trees_ == b.trees_;
  }

 private:
  ForestParams params_;
  std::vector<CausalTree> trees_;
};

// Tree b draws ⌈subsample_fraction · arm size⌉ rows per arm with the child
// seed hash64(seed, b), then fits an honest tree on them. Throws FitError
// when a subsampled arm has fewer than 2 · min_samples rows.
CausalForest fit_forest(const TrainingSet& data, const ForestParams& params);

// Runs fn(i) for i in [0, n) across `threads` workers.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace reachdiff
