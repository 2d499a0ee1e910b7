#include "reachdiff/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "reachdiff/errors.hpp"
#include "reachdiff/random.hpp"

namespace reachdiff {

namespace {

using SortedRows = std::vector<std::vector<std::size_t>>;

void check_dimension(std::size_t expected, std::size_t got) {
  if (expected != got) {
    throw ValidationError("feature dimension mismatch: model expects " + std::to_string(expected) +
                          ", got " + std::to_string(got));
  }
}

class CartGrower {
 public:
  CartGrower(const FeatureMatrix& x, std::span<const double> y, const RegressionTreeParams& params)
      : x_(x), y_(y), params_(params), side_(x.rows(), 0) {}

  std::vector<RegressionTree::Node> grow(std::span<const std::size_t> rows) {
    SortedRows sorted(x_.cols(), std::vector<std::size_t>(rows.begin(), rows.end()));
    for (std::size_t f = 0; f < x_.cols(); ++f) {
      std::sort(sorted[f].begin(), sorted[f].end(), [&](std::size_t a, std::size_t b) {
        return x_(a, f) < x_(b, f) || (x_(a, f) == x_(b, f) && a < b);
      });
    }
    grow_node(sorted, 0);
    return std::move(nodes_);
  }

 private:
  int grow_node(const SortedRows& rows, std::size_t depth) {
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    const auto& any = rows[0];
    double sum = 0.0;
    double sum_sq = 0.0;
    for (auto r : any) {
      sum += y_[r];
      sum_sq += y_[r] * y_[r];
    }
    const auto n = any.size();
    nodes_[index].n = n;
    nodes_[index].value = sum / static_cast<double>(n);

    const double tol = 1e-12 * std::max(sum_sq, 1e-300);
    const double sse = sum_sq - sum * sum / static_cast<double>(n);
    if (depth >= params_.max_depth || n < params_.min_samples_split || sse <= tol) return index;

    double best_gain = tol;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;
    bool found = false;
    const double parent = sum * sum / static_cast<double>(n);
    for (std::size_t f = 0; f < rows.size(); ++f) {
      const auto& order = rows[f];
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += y_[order[i]];
        const std::size_t n_left = i + 1;
        const std::size_t n_right = n - n_left;
        const double lo = x_(order[i], f);
        const double hi = x_(order[i + 1], f);
        if (!(lo < hi)) continue;
        if (n_left < params_.min_samples_leaf || n_right < params_.min_samples_leaf) continue;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                            right_sum * right_sum / static_cast<double>(n_right) - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          const double mid = 0.5 * (lo + hi);
          best_threshold = mid > lo ? mid : hi;
          found = true;
        }
      }
    }
    if (!found) return index;

    for (auto r : any) side_[r] = x_(r, best_feature) < best_threshold ? 1 : 0;
    SortedRows left(rows.size());
    SortedRows right(rows.size());
    for (std::size_t f = 0; f < rows.size(); ++f) {
      for (auto r : rows[f]) (side_[r] ? left[f] : right[f]).push_back(r);
    }
    nodes_[index].feature = best_feature;
    nodes_[index].threshold = best_threshold;
    const int l = grow_node(left, depth + 1);
    const int r = grow_node(right, depth + 1);
    nodes_[index].left = l;
    nodes_[index].right = r;
    return index;
  }

  const FeatureMatrix& x_;
  std::span<const double> y_;
  const RegressionTreeParams& params_;
  std::vector<std::uint8_t> side_;
  std::vector<RegressionTree::Node> nodes_;
};

void validate_tree_params(const RegressionTreeParams& p, std::string_view what) {
  if (p.max_depth < 1 || p.min_samples_split < 1 || p.min_samples_leaf < 1) {
    throw ValidationError(std::string(what) + ": counts must be >= 1");
  }
}

}  // namespace

std::string_view variant_name(RegressorVariant variant) {
  switch (variant) {
    case RegressorVariant::kTree:
      return "tree";
    case RegressorVariant::kForest:
      return "forest";
    case RegressorVariant::kKnn:
      return "knn";
  }
  return "?";
}

RegressorVariant parse_variant(std::string_view text) {
  if (text == "tree") return RegressorVariant::kTree;
  if (text == "forest") return RegressorVariant::kForest;
  if (text == "knn") return RegressorVariant::kKnn;
  throw ValidationError("unknown regressor variant '" + std::string(text) +
                        "' (expected tree, forest, knn)");
}

void RegressorParams::validate() const {
  validate_tree_params(tree, "tree params");
  validate_tree_params(forest.tree, "forest params");
  if (forest.n_estimators < 1) throw ValidationError("forest params: n_estimators must be >= 1");
  if (knn.k < 1) throw ValidationError("knn params: n_neighbors must be >= 1");
}

RegressionTree::RegressionTree(std::vector<Node> nodes, std::size_t dimension)
    : nodes_(std::move(nodes)), dimension_(dimension) {
  if (nodes_.empty()) throw ValidationError("regression tree: no nodes");
  const auto count = static_cast<int>(nodes_.size());
  for (int i = 0; i < count; ++i) {
    const auto& node = nodes_[i];
    if (node.is_leaf()) continue;
    if (node.left <= i || node.right <= i || node.left >= count || node.right >= count ||
        node.feature >= dimension_) {
      throw ValidationError("regression tree: malformed node");
    }
  }
}

double RegressionTree::predict(std::span<const double> x) const {
  check_dimension(dimension_, x.size());
  int node = 0;
  while (!nodes_[node].is_leaf()) {
    node = x[nodes_[node].feature] < nodes_[node].threshold ? nodes_[node].left : nodes_[node].right;
  }
  return nodes_[node].value;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

RegressionTree fit_regression_tree(const FeatureMatrix& x, std::span<const double> y,
                                   std::span<const std::size_t> rows,
                                   const RegressionTreeParams& params) {
  validate_tree_params(params, "tree params");
  if (rows.empty()) throw FitError("regression tree: no rows");
  if (x.rows() != y.size()) throw ValidationError("regression tree: X and Y differ in length");
  CartGrower grower(x, y, params);
  return RegressionTree(grower.grow(rows), x.cols());
}

RandomForestRegressor::RandomForestRegressor(std::vector<RegressionTree> trees)
    : trees_(std::move(trees)) {
  if (trees_.empty()) throw ValidationError("random forest: no trees");
}

double RandomForestRegressor::predict(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(x);
  return sum / static_cast<double>(trees_.size());
}

KnnRegressor::KnnRegressor(FeatureMatrix x, std::vector<double> y, KnnParams params)
    : x_(std::move(x)), y_(std::move(y)), params_(params) {
  if (y_.empty()) throw FitError("knn: no rows");
  if (x_.rows() != y_.size()) throw ValidationError("knn: X and Y differ in length");
  if (params_.k < 1) throw ValidationError("knn: n_neighbors must be >= 1");
}

double KnnRegressor::predict(std::span<const double> x) const {
  check_dimension(x_.cols(), x.size());
  const std::size_t n = y_.size();
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x_.row(i);
    double d = 0.0;
    if (params_.metric == KnnMetric::kManhattan) {
      for (std::size_t c = 0; c < row.size(); ++c) d += std::abs(row[c] - x[c]);
    } else {
      for (std::size_t c = 0; c < row.size(); ++c) d += (row[c] - x[c]) * (row[c] - x[c]);
      d = std::sqrt(d);
    }
    dist[i] = {d, i};
  }
  const std::size_t k = std::min(params_.k, n);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

  if (params_.weighting == KnnWeighting::kUniform) {
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += y_[dist[i].second];
    return sum / static_cast<double>(k);
  }
  if (dist[0].first == 0.0) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < k && dist[i].first == 0.0; ++i, ++count) sum += y_[dist[i].second];
    return sum / static_cast<double>(count);
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double w = 1.0 / dist[i].first;
    num += w * y_[dist[i].second];
    den += w;
  }
  return num / den;
}

double Regressor::predict(std::span<const double> x) const {
  return std::visit([&](const auto& m) { return m.predict(x); }, model_);
}

std::size_t Regressor::dimension() const {
  return std::visit([](const auto& m) { return m.dimension(); }, model_);
}

Regressor fit_regressor(const FeatureMatrix& x, std::span<const double> y,
                        const RegressorParams& params) {
  params.validate();
  if (y.empty() || x.rows() == 0) throw FitError("regressor: empty training data");
  if (x.rows() != y.size()) throw ValidationError("regressor: X and Y differ in length");

  std::vector<std::size_t> all(y.size());
  std::iota(all.begin(), all.end(), 0);
  switch (params.variant) {
    case RegressorVariant::kTree:
      return Regressor(fit_regression_tree(x, y, all, params.tree));
    case RegressorVariant::kForest: {
      std::vector<RegressionTree> trees;
      trees.reserve(params.forest.n_estimators);
      std::vector<std::size_t> sample(y.size());
      for (std::size_t b = 0; b < params.forest.n_estimators; ++b) {
        if (params.forest.bootstrap) {
          Rng rng(hash64(params.seed, b));
          for (auto& s : sample) s = static_cast<std::size_t>(rng.uniform_index(y.size()));
        } else {
          sample = all;
        }
        trees.push_back(fit_regression_tree(x, y, sample, params.forest.tree));
      }
      return Regressor(RandomForestRegressor(std::move(trees)));
    }
    case RegressorVariant::kKnn:
      return Regressor(KnnRegressor(x, std::vector<double>(y.begin(), y.end()), params.knn));
  }
  throw ValidationError("regressor: unknown variant");
}

TLearner::TLearner(Regressor treated, Regressor control)
    : treated_(std::move(treated)), control_(std::move(control)) {
  if (treated_.dimension() != control_.dimension()) {
    throw ValidationError("t-learner: arm models disagree on dimension");
  }
}

double TLearner::predict(std::span<const double> x) const {
  return treated_.predict(x) - control_.predict(x);
}

TLearner tlearner_fit(const TrainingSet& data, const RegressorParams& params) {
  data.validate();
  FeatureMatrix xs(0, data.dimension());
  FeatureMatrix xn(0, data.dimension());
  std::vector<double> ys;
  std::vector<double> yn;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.treated[i]) {
      xs.append_row(data.features.row(i));
      ys.push_back(data.outcomes[i]);
    } else {
      xn.append_row(data.features.row(i));
      yn.push_back(data.outcomes[i]);
    }
  }
  if (ys.empty()) throw FitError("t-learner: no treated rows (condition = 1)");
  if (yn.empty()) throw FitError("t-learner: no control rows (condition = 0)");
  // Both arms share the seed so that swapping arm labels exactly negates predictions.
  return TLearner(fit_regressor(xs, ys, params), fit_regressor(xn, yn, params));
}

}  // namespace reachdiff
