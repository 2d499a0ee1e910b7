#include "reachdiff/causal_tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "reachdiff/errors.hpp"

namespace reachdiff {

namespace {

using SortedRows = std::vector<std::vector<std::size_t>>;  // one row list per feature

struct ArmTotals {
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  double sum_treated = 0.0;
  double sum_control = 0.0;

  void add(const TrainingSet& data, std::size_t row) {
    if (data.treated[row]) {
      ++n_treated;
      sum_treated += data.outcomes[row];
    } else {
      ++n_control;
      sum_control += data.outcomes[row];
    }
  }

  std::size_t n() const { return n_treated + n_control; }
  double tau() const {
    return sum_treated / static_cast<double>(n_treated) -
           sum_control / static_cast<double>(n_control);
  }
};

SortedRows presort(const TrainingSet& data, std::span<const std::size_t> rows) {
  SortedRows sorted(data.dimension(), std::vector<std::size_t>(rows.begin(), rows.end()));
  for (std::size_t f = 0; f < data.dimension(); ++f) {
    std::sort(sorted[f].begin(), sorted[f].end(), [&](std::size_t a, std::size_t b) {
      const double va = data.features(a, f);
      const double vb = data.features(b, f);
      return va < vb || (va == vb && a < b);
    });
  }
  return sorted;
}

std::optional<SplitRule> find_split(const TrainingSet& data, const SortedRows& split_rows,
                                    const SortedRows* est_rows, std::size_t min_samples) {
  if (split_rows.empty() || split_rows[0].empty()) return std::nullopt;
  ArmTotals total;
  for (auto row : split_rows[0]) total.add(data, row);
  if (total.n_treated < 2 * min_samples || total.n_control < 2 * min_samples) return std::nullopt;

  std::size_t est_treated_total = 0;
  std::size_t est_control_total = 0;
  if (est_rows != nullptr) {
    for (auto row : (*est_rows)[0]) (data.treated[row] ? est_treated_total : est_control_total)++;
    if (est_treated_total < 2 * min_samples || est_control_total < 2 * min_samples) {
      return std::nullopt;
    }
  }

  // Candidates in (feature, threshold) order; near-ties are settled after the scan.
  std::vector<std::pair<double, SplitRule>> candidates;
  double best_score = kMinSplitScore;
  for (std::size_t f = 0; f < data.dimension(); ++f) {
    const auto& order = split_rows[f];
    ArmTotals left;
    std::size_t est_pos = 0;
    std::size_t est_left_treated = 0;
    std::size_t est_left_control = 0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      left.add(data, order[i]);
      const double lo = data.features(order[i], f);
      const double hi = data.features(order[i + 1], f);
      if (!(lo < hi)) continue;
      const double threshold = split_threshold(lo, hi);

      if (left.n_treated < min_samples || left.n_control < min_samples) continue;
      const std::size_t right_treated = total.n_treated - left.n_treated;
      const std::size_t right_control = total.n_control - left.n_control;
      if (right_treated < min_samples || right_control < min_samples) continue;

      if (est_rows != nullptr) {
        const auto& est_order = (*est_rows)[f];
        while (est_pos < est_order.size() && data.features(est_order[est_pos], f) < threshold) {
          (data.treated[est_order[est_pos]] ? est_left_treated : est_left_control)++;
          ++est_pos;
        }
        if (est_left_treated < min_samples || est_left_control < min_samples ||
            est_treated_total - est_left_treated < min_samples ||
            est_control_total - est_left_control < min_samples) {
          continue;
        }
      }

      ArmTotals right;
      right.n_treated = right_treated;
      right.n_control = right_control;
      right.sum_treated = total.sum_treated - left.sum_treated;
      right.sum_control = total.sum_control - left.sum_control;
      const double score = heterogeneity_score(left.n(), left.tau(), right.n(), right.tau());
      if (score > kMinSplitScore) {
        candidates.emplace_back(score, SplitRule{f, threshold});
        best_score = std::max(best_score, score);
      }
    }
  }
  const double floor = best_score * (1.0 - kSplitTieTolerance);
  for (const auto& [score, rule] : candidates) {
    if (score >= floor) return rule;
  }
  return std::nullopt;
}

// Keeps the rows of each per-feature list for which `side[row] == want`.
SortedRows select(const SortedRows& rows, const std::vector<std::uint8_t>& side, std::uint8_t want) {
  SortedRows out(rows.size());
  for (std::size_t f = 0; f < rows.size(); ++f) {
    out[f].reserve(rows[f].size());
    for (auto row : rows[f]) {
      if (side[row] == want) out[f].push_back(row);
    }
  }
  return out;
}

class TreeGrower {
 public:
  TreeGrower(const TrainingSet& data, const TreeParams& params)
      : data_(data), params_(params), side_(data.size(), 0) {}

  std::vector<CausalTreeNode> grow(SortedRows split_rows, SortedRows est_rows) {
    nodes_.clear();
    next_leaf_ = 0;
    grow_node(split_rows, est_rows, 0);
    return std::move(nodes_);
  }

 private:
  int grow_node(const SortedRows& split_rows, const SortedRows& est_rows, std::size_t depth) {
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    std::optional<SplitRule> rule;
    if (depth < params_.max_depth) {
      rule = find_split(data_, split_rows, &est_rows, params_.min_samples);
    }
    if (!rule) {
      make_leaf(nodes_[index], est_rows);
      return index;
    }

    for (auto row : split_rows[0]) side_[row] = rule->goes_left(data_.features.row(row)) ? 1 : 0;
    for (auto row : est_rows[0]) side_[row] = rule->goes_left(data_.features.row(row)) ? 1 : 0;
    SortedRows split_left = select(split_rows, side_, 1);
    SortedRows split_right = select(split_rows, side_, 0);
    SortedRows est_left = select(est_rows, side_, 1);
    SortedRows est_right = select(est_rows, side_, 0);

    nodes_[index].rule = *rule;
    const int left = grow_node(split_left, est_left, depth + 1);
    const int right = grow_node(split_right, est_right, depth + 1);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
  }

  void make_leaf(CausalTreeNode& node, const SortedRows& est_rows) {
    node.leaf_id = next_leaf_++;
    node.estimation_rows = est_rows[0];
    std::sort(node.estimation_rows.begin(), node.estimation_rows.end());
    ArmTotals totals;
    for (auto row : node.estimation_rows) totals.add(data_, row);
    node.n_treated_est = totals.n_treated;
    node.n_control_est = totals.n_control;
    node.tau_hat = totals.tau();
  }

  const TrainingSet& data_;
  const TreeParams& params_;
  std::vector<std::uint8_t> side_;
  std::vector<CausalTreeNode> nodes_;
  int next_leaf_ = 0;
};

}  // namespace

void TreeParams::validate() const {
  if (min_samples < 1) throw ValidationError("tree params: min_samples must be >= 1");
  if (!(honest_fraction > 0.0 && honest_fraction < 1.0)) {
    throw ValidationError("tree params: honest_fraction must lie in (0, 1)");
  }
}

double heterogeneity_score(std::size_t n_left, double tau_left, std::size_t n_right,
                           double tau_right) {
  const double nl = static_cast<double>(n_left);
  const double nr = static_cast<double>(n_right);
  const double diff = tau_left - tau_right;
  return nl * nr / (nl + nr) * diff * diff;
}

double split_threshold(double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  return mid > lo ? mid : hi;
}

std::optional<SplitRule> best_split(const TrainingSet& data, std::span<const std::size_t> rows,
                                    const TreeParams& params) {
  params.validate();
  return find_split(data, presort(data, rows), nullptr, params.min_samples);
}

std::optional<SplitRule> best_split(const TrainingSet& data, std::span<const std::size_t> rows,
                                    std::span<const std::size_t> estimation_rows,
                                    const TreeParams& params) {
  params.validate();
  const SortedRows est = presort(data, estimation_rows);
  return find_split(data, presort(data, rows), &est, params.min_samples);
}

CausalTree::CausalTree(std::vector<CausalTreeNode> nodes, std::size_t dimension,
                       std::vector<std::size_t> splitting_rows)
    : nodes_(std::move(nodes)), dimension_(dimension), splitting_rows_(std::move(splitting_rows)) {
  if (nodes_.empty()) throw ValidationError("causal tree: no nodes");
  std::size_t n_leaves = 0;
  for (const auto& node : nodes_) n_leaves += node.is_leaf() ? 1 : 0;
  leaf_nodes_.assign(n_leaves, -1);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& node = nodes_[i];
    if (node.is_leaf()) {
      if (node.leaf_id < 0 || static_cast<std::size_t>(node.leaf_id) >= n_leaves ||
          leaf_nodes_[node.leaf_id] != -1) {
        throw ValidationError("causal tree: leaf ids must be unique and dense");
      }
      leaf_nodes_[node.leaf_id] = static_cast<int>(i);
    } else {
      const auto n = static_cast<int>(nodes_.size());
      if (node.right < 0 || node.left >= n || node.right >= n ||
          node.left <= static_cast<int>(i) || node.right <= static_cast<int>(i)) {
        throw ValidationError("causal tree: bad child index");
      }
      if (node.rule.feature >= dimension_) throw ValidationError("causal tree: bad split feature");
    }
  }
}

int CausalTree::route(std::span<const double> x, std::size_t max_depth) const {
  if (x.size() != dimension_) {
    throw ValidationError("feature dimension mismatch: tree expects " +
                          std::to_string(dimension_) + ", got " + std::to_string(x.size()));
  }
  int node = 0;
  for (std::size_t depth = 0; depth < max_depth && !nodes_[node].is_leaf(); ++depth) {
    node = nodes_[node].rule.goes_left(x) ? nodes_[node].left : nodes_[node].right;
  }
  return node;
}

double CausalTree::predict(std::span<const double> x) const {
  return nodes_[route(x, SIZE_MAX)].tau_hat;
}

int CausalTree::leaf_assignment(std::span<const double> x) const {
  return nodes_[route(x, SIZE_MAX)].leaf_id;
}

const CausalTreeNode& CausalTree::leaf(int leaf_id) const {
  return nodes_.at(static_cast<std::size_t>(leaf_nodes_.at(static_cast<std::size_t>(leaf_id))));
}

std::size_t CausalTree::height() const {
  std::size_t best = 0;
  std::function<void(int, std::size_t)> walk = [&](int node, std::size_t depth) {
    if (nodes_[node].is_leaf()) {
      best = std::max(best, depth);
      return;
    }
    walk(nodes_[node].left, depth + 1);
    walk(nodes_[node].right, depth + 1);
  };
  walk(0, 0);
  return best;
}

std::pair<double, std::size_t> CausalTree::aggregate(int node) const {
  const auto& n = nodes_.at(static_cast<std::size_t>(node));
  if (n.is_leaf()) return {n.tau_hat, n.n_treated_est + n.n_control_est};
  const auto [tau_l, w_l] = aggregate(n.left);
  const auto [tau_r, w_r] = aggregate(n.right);
  const auto w = w_l + w_r;
  return {(tau_l * static_cast<double>(w_l) + tau_r * static_cast<double>(w_r)) /
              static_cast<double>(w),
          w};
}

std::vector<PartitionEntry> CausalTree::depth_k_partition(std::size_t k) const {
  std::vector<PartitionEntry> out;
  std::vector<PathStep> path;
  std::function<std::size_t(int, std::size_t)> walk = [&](int node, std::size_t depth) {
    const auto& n = nodes_[node];
    if (n.is_leaf() || depth == k) {
      const auto [tau, weight] = aggregate(node);
      std::size_t leaves = 0;
      std::function<void(int)> count = [&](int m) {
        if (nodes_[m].is_leaf()) {
          ++leaves;
        } else {
          count(nodes_[m].left);
          count(nodes_[m].right);
        }
      };
      count(node);
      out.push_back({path, tau, leaves, weight, node});
      return leaves;
    }
    path.push_back({n.rule, true});
    walk(n.left, depth + 1);
    path.back().left = false;
    walk(n.right, depth + 1);
    path.pop_back();
    return std::size_t{0};
  };
  walk(0, 0);
  return out;
}

std::size_t CausalTree::partition_index(std::span<const double> x, std::size_t k) const {
  const int target = route(x, k);
  // Entries are emitted in depth-first order; count those preceding `target`.
  std::size_t index = 0;
  std::function<bool(int, std::size_t)> walk = [&](int node, std::size_t depth) {
    if (node == target) return true;
    if (nodes_[node].is_leaf() || depth == k) {
      ++index;
      return false;
    }
    return walk(nodes_[node].left, depth + 1) || walk(nodes_[node].right, depth + 1);
  };
  walk(0, 0);
  return index;
}

CausalTree fit_tree(const TrainingSet& data, std::span<const std::size_t> rows,
                    const TreeParams& params, Rng& rng) {
  params.validate();
  data.validate();
  if (data.dimension() == 0) throw FitError("causal tree: no features");

  std::vector<std::size_t> treated;
  std::vector<std::size_t> control;
  for (auto row : rows) {
    if (row >= data.size()) throw ValidationError("causal tree: row index out of range");
    (data.treated[row] ? treated : control).push_back(row);
  }
  const std::size_t m = params.min_samples;
  if (treated.size() < 2 * m || control.size() < 2 * m) {
    throw FitError("causal tree: need at least " + std::to_string(2 * m) +
                   " rows per arm, got " + std::to_string(treated.size()) + " treated and " +
                   std::to_string(control.size()) + " control");
  }

  rng.shuffle(std::span(treated));
  rng.shuffle(std::span(control));
  const auto n_split_treated =
      static_cast<std::size_t>(std::floor(params.honest_fraction * treated.size()));
  const auto n_split_control =
      static_cast<std::size_t>(std::floor(params.honest_fraction * control.size()));
  if (n_split_treated < m || treated.size() - n_split_treated < m || n_split_control < m ||
      control.size() - n_split_control < m) {
    throw FitError("causal tree: honest halves hold fewer than min_samples rows in an arm");
  }

  std::vector<std::size_t> split(treated.begin(), treated.begin() + n_split_treated);
  split.insert(split.end(), control.begin(), control.begin() + n_split_control);
  std::vector<std::size_t> est(treated.begin() + n_split_treated, treated.end());
  est.insert(est.end(), control.begin() + n_split_control, control.end());
  std::sort(split.begin(), split.end());
  std::sort(est.begin(), est.end());

  TreeGrower grower(data, params);
  auto nodes = grower.grow(presort(data, split), presort(data, est));
  return CausalTree(std::move(nodes), data.dimension(), std::move(split));
}

CausalTree fit_tree(const TrainingSet& data, const TreeParams& params, Rng& rng) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  return fit_tree(data, rows, params, rng);
}

CausalTree fit_tree(const TrainingSet& data, const TreeParams& params) {
  Rng rng(params.seed);
  return fit_tree(data, params, rng);
}

}  // namespace reachdiff
