#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "reachdiff/core_model.hpp"
#include "reachdiff/random.hpp"

namespace reachdiff {

// Rows with feature < threshold go left, the rest go right.
struct SplitRule {
  std::size_t feature = 0;
  double threshold = 0.0;

  bool goes_left(std::span<const double> x) const { return x[feature] < threshold; }

  friend bool operator==(const SplitRule&, const SplitRule&) = default;
};

struct TreeParams {
  // Minimum rows per treatment arm in every leaf, on both the splitting and
  // the estimation half.
  std::size_t min_samples = 5;
  std::size_t max_depth = 25;
  double honest_fraction = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

// Splits with a heterogeneity score at or below this are never taken.
inline constexpr double kMinSplitScore = 1e-12;
// Scores within this relative distance of the best count as tied, so
// rounding noise in the running sums cannot reorder candidates.
inline constexpr double kSplitTieTolerance = 1e-9;

// (n_L n_R / (n_L + n_R)) (τ_L - τ_R)², with τ the difference of arm means.
double heterogeneity_score(std::size_t n_left, double tau_left, std::size_t n_right,
                           double tau_right);

// Midpoint between two consecutive distinct sorted values, nudged so that
// `lo < threshold <= hi` always holds in floating point.
double split_threshold(double lo, double hi);

// Best admissible split over `rows` of `data`, or nullopt when no candidate
// scores above kMinSplitScore. Candidates are midpoints between consecutive
// distinct values; a candidate is admissible when both children hold at
// least min_samples treated and min_samples control rows. Ties go to the
// lowest feature, then the lowest threshold, where scores within
// kSplitTieTolerance (relative) of the best are ties.
std::optional<SplitRule> best_split(const TrainingSet& data, std::span<const std::size_t> rows,
                                    const TreeParams& params);

// As above, additionally requiring both children to hold min_samples rows
// per arm among `estimation_rows`. Only their features and arms are read.
std::optional<SplitRule> best_split(const TrainingSet& data, std::span<const std::size_t> rows,
                                    std::span<const std::size_t> estimation_rows,
                                    const TreeParams& params);

struct CausalTreeNode {
  // Internal nodes: children are indices into CausalTree::nodes().
  int left = -1;
  int right = -1;
  SplitRule rule;

  // Leaves.
  int leaf_id = -1;
  double tau_hat = 0.0;
  std::size_t n_treated_est = 0;
  std::size_t n_control_est = 0;
  std::vector<std::size_t> estimation_rows;

  bool is_leaf() const { return left < 0; }

  friend bool operator==(const CausalTreeNode&, const CausalTreeNode&) = default;
};

struct PathStep {
  SplitRule rule;
  bool left = true;

  friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct PartitionEntry {
  std::vector<PathStep> path;
  // Estimation-count-weighted mean of the descendant leaf estimates.
  double tau_hat = 0.0;
  std::size_t leaf_count = 0;
  std::size_t n_estimation = 0;
  int node = 0;
};

// Honest causal tree. Structure is grown on one half of each arm and every
// leaf effect is the treated-minus-control mean over the other half. Row
// indices refer to the TrainingSet passed to fit.
class CausalTree {
 public:
  CausalTree() = default;
  CausalTree(std::vector<CausalTreeNode> nodes, std::size_t dimension,
             std::vector<std::size_t> splitting_rows);

  double predict(std::span<const double> x) const;
  int leaf_assignment(std::span<const double> x) const;
  const CausalTreeNode& leaf(int leaf_id) const;

  // Nodes at depth min(k, leaf depth), in depth-first order (left first).
  std::vector<PartitionEntry> depth_k_partition(std::size_t k) const;
  // Index into depth_k_partition(k) that x routes to.
  std::size_t partition_index(std::span<const double> x, std::size_t k) const;

  // Estimation-count-weighted mean leaf effect and count under `node`.
  std::pair<double, std::size_t> aggregate(int node) const;

  const std::vector<CausalTreeNode>& nodes() const { return nodes_; }
  const std::vector<std::size_t>& splitting_rows() const { return splitting_rows_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t leaf_count() const { return leaf_nodes_.size(); }
  std::size_t height() const;

  friend bool operator==(const CausalTree& a, const CausalTree& b) {
    return a.dimension_ == b.dimension_ && a.nodes_ == b.nodes_ &&
           a.splitting_rows_ == b.splitting_rows_;
  }

 private:
  int route(std::span<const double> x, std::size_t max_depth) const;

  std::vector<CausalTreeNode> nodes_;
  std::size_t dimension_ = 0;
  std::vector<std::size_t> splitting_rows_;
  std::vector<int> leaf_nodes_;  // leaf_id -> node index
};

// Fits on every row of `data`. Throws FitError if either arm has fewer
// than 2 * min_samples rows or a half ends up below min_samples.
CausalTree fit_tree(const TrainingSet& data, const TreeParams& params, Rng& rng);
CausalTree fit_tree(const TrainingSet& data, const TreeParams& params);

// Fits on the listed rows only; stored indices still refer to `data`.
CausalTree fit_tree(const TrainingSet& data, std::span<const std::size_t> rows,
                    const TreeParams& params, Rng& rng);

}  // namespace reachdiff
