#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "reachdiff/core_model.hpp"

namespace reachdiff {

enum class RegressorVariant : std::uint8_t { kTree, kForest, kKnn };

std::string_view variant_name(RegressorVariant variant);
RegressorVariant parse_variant(std::string_view text);

struct RegressionTreeParams {
  std::size_t max_depth = 10;
  std::size_t min_samples_split = 10;
  std::size_t min_samples_leaf = 4;
};

struct RandomForestParams {
  std::size_t n_estimators = 100;
  RegressionTreeParams tree{100, 2, 1};
  // false trains every tree on the rows as given (no resampling).
  bool bootstrap = true;
};

enum class KnnWeighting : std::uint8_t { kUniform, kInverseDistance };
enum class KnnMetric : std::uint8_t { kManhattan, kEuclidean };

struct KnnParams {
  std::size_t k = 15;
  KnnWeighting weighting = KnnWeighting::kInverseDistance;
  KnnMetric metric = KnnMetric::kManhattan;
  friend bool operator==(const KnnParams&, const KnnParams&) = default;
};

struct RegressorParams {
  RegressorVariant variant = RegressorVariant::kTree;
  RegressionTreeParams tree;
  RandomForestParams forest;
  KnnParams knn;
  std::uint64_t seed = 0;

  void validate() const;
};

// CART regression tree: variance-reduction splits, leaf value = mean outcome.
class RegressionTree {
 public:
  struct Node {
    int left = -1;
    int right = -1;
    std::size_t feature = 0;
    double threshold = 0.0;
    double value = 0.0;
    std::size_t n = 0;

    bool is_leaf() const { return left < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  RegressionTree() = default;
  RegressionTree(std::vector<Node> nodes, std::size_t dimension);

  double predict(std::span<const double> x) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t leaf_count() const;

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

 private:
  std::vector<Node> nodes_;
  std::size_t dimension_ = 0;
};

RegressionTree fit_regression_tree(const FeatureMatrix& x, std::span<const double> y,
                                   std::span<const std::size_t> rows,
                                   const RegressionTreeParams& params);

class RandomForestRegressor {
 public:
  RandomForestRegressor() = default;
  explicit RandomForestRegressor(std::vector<RegressionTree> trees);

  double predict(std::span<const double> x) const;
  const std::vector<RegressionTree>& trees() const { return trees_; }
  std::size_t dimension() const { return trees_.empty() ? 0 : trees_.front().dimension(); }

  friend bool operator==(const RandomForestRegressor&, const RandomForestRegressor&) = default;

 private:
  std::vector<RegressionTree> trees_;
};

class KnnRegressor {
 public:
  KnnRegressor() = default;
  KnnRegressor(FeatureMatrix x, std::vector<double> y, KnnParams params);

  // Any zero-distance neighbor short-circuits inverse-distance weighting:
  // the prediction is the mean outcome of the zero-distance neighbors.
  double predict(std::span<const double> x) const;

  const FeatureMatrix& features() const { return x_; }
  const std::vector<double>& outcomes() const { return y_; }
  const KnnParams& params() const { return params_; }
  std::size_t dimension() const { return x_.cols(); }

  friend bool operator==(const KnnRegressor&, const KnnRegressor&) = default;

 private:
  FeatureMatrix x_;
  std::vector<double> y_;
  KnnParams params_;
};

class Regressor {
 public:
  using Model = std::variant<RegressionTree, RandomForestRegressor, KnnRegressor>;

  Regressor() = default;
  explicit Regressor(Model model) : model_(std::move(model)) {}

  double predict(std::span<const double> x) const;
  std::size_t dimension() const;
  RegressorVariant variant() const { return static_cast<RegressorVariant>(model_.index()); }
  const Model& model() const { return model_; }

  friend bool operator==(const Regressor&, const Regressor&) = default;

 private:
  Model model_;
};

// Throws FitError on empty data.
Regressor fit_regressor(const FeatureMatrix& x, std::span<const double> y,
                        const RegressorParams& params);

// f_s(x) - f_n(x), with f_s fit on treated rows and f_n on control rows.
class TLearner {
 public:
  TLearner() = default;
  TLearner(Regressor treated, Regressor control);

  double predict(std::span<const double> x) const;
  const Regressor& treated_model() const { return treated_; }
  const Regressor& control_model() const { return control_; }
  std::size_t dimension() const { return treated_.dimension(); }

  friend bool operator==(const TLearner&, const TLearner&) = default;

 private:
  Regressor treated_;
  Regressor control_;
};

// Throws FitError if either arm is empty.
TLearner tlearner_fit(const TrainingSet& data, const RegressorParams& params);

}  // namespace reachdiff
