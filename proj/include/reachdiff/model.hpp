#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "reachdiff/baselines.hpp"
#include "reachdiff/causal_forest.hpp"
#include "reachdiff/causal_tree.hpp"

namespace reachdiff {

enum class ModelKind : std::uint8_t { kCausalForest, kCausalTree, kTLearner };

// A configured learner. Names are report keys: causal_forest, causal_tree,
// tlearner_tree, tlearner_forest, tlearner_knn.
struct ModelSpec {
  std::string name;
  ModelKind kind = ModelKind::kCausalForest;
  ForestParams forest;
  TreeParams tree;
  RegressorParams regressor;
};

ModelSpec causal_forest_spec(const ForestParams& params = {});
ModelSpec causal_tree_spec(const TreeParams& params = {});
ModelSpec tlearner_spec(const RegressorParams& params);

// Spec for a model name with that model's default hyperparameters.
ModelSpec default_model_spec(std::string_view name);

using FittedModel = std::variant<CausalForest, CausalTree, TLearner>;

// `seed` overrides the seed stored in the spec's params.
FittedModel fit_model(const ModelSpec& spec, const TrainingSet& data, std::uint64_t seed);

double predict(const FittedModel& model, std::span<const double> x);
std::size_t model_dimension(const FittedModel& model);
std::string_view model_kind_name(const FittedModel& model);

// Leaf count; for a causal forest the mean over trees.
double model_leaf_count(const FittedModel& model);

}  // namespace reachdiff
