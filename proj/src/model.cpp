#include "reachdiff/model.hpp"

#include "reachdiff/errors.hpp"

namespace reachdiff {

ModelSpec causal_forest_spec(const ForestParams& params) {
  ModelSpec spec;
  spec.name = "causal_forest";
  spec.kind = ModelKind::kCausalForest;
  spec.forest = params;
  spec.tree = params.tree;
  return spec;
}

ModelSpec causal_tree_spec(const TreeParams& params) {
  ModelSpec spec;
  spec.name = "causal_tree";
  spec.kind = ModelKind::kCausalTree;
  spec.tree = params;
  return spec;
}

ModelSpec tlearner_spec(const RegressorParams& params) {
  ModelSpec spec;
  spec.name = "tlearner_" + std::string(variant_name(params.variant));
  spec.kind = ModelKind::kTLearner;
  spec.regressor = params;
  return spec;
}

ModelSpec default_model_spec(std::string_view name) {
  if (name == "causal_forest") return causal_forest_spec();
  if (name == "causal_tree") return causal_tree_spec();
  constexpr std::string_view prefix = "tlearner_";
  if (name.substr(0, prefix.size()) == prefix) {
    RegressorParams params;
    params.variant = parse_variant(name.substr(prefix.size()));
    return tlearner_spec(params);
  }
  throw ValidationError("unknown model '" + std::string(name) +
                        "' (expected causal_forest, causal_tree, tlearner_tree, "
                        "tlearner_forest, tlearner_knn)");
}

FittedModel fit_model(const ModelSpec& spec, const TrainingSet& data, std::uint64_t seed) {
  switch (spec.kind) {
    case ModelKind::kCausalForest: {
      ForestParams params = spec.forest;
      params.seed = seed;
      return fit_forest(data, params);
    }
    case ModelKind::kCausalTree: {
      TreeParams params = spec.tree;
      params.seed = seed;
      return fit_tree(data, params);
    }
    case ModelKind::kTLearner: {
      RegressorParams params = spec.regressor;
      params.seed = seed;
      return tlearner_fit(data, params);
    }
  }
  throw ValidationError("unknown model kind");
}

double predict(const FittedModel& model, std::span<const double> x) {
  return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

std::size_t model_dimension(const FittedModel& model) {
  return std::visit([](const auto& m) { return m.dimension(); }, model);
}

std::string_view model_kind_name(const FittedModel& model) {
  switch (model.index()) {
    case 0:
      return "causal_forest";
    case 1:
      return "causal_tree";
    default:
      return "tlearner";
  }
}

double model_leaf_count(const FittedModel& model) {
  if (const auto* f = std::get_if<CausalForest>(&model)) return f->mean_leaf_count();
  if (const auto* t = std::get_if<CausalTree>(&model)) return static_cast<double>(t->leaf_count());
  const auto& tl = std::get<TLearner>(model);
  auto leaves = [](const Regressor& r) -> double {
    if (const auto* tree = std::get_if<RegressionTree>(&r.model())) {
      return static_cast<double>(tree->leaf_count());
    }
    if (const auto* forest = std::get_if<RandomForestRegressor>(&r.model())) {
      double sum = 0.0;
      for (const auto& t : forest->trees()) sum += static_cast<double>(t.leaf_count());
      return sum / static_cast<double>(forest->trees().size());
    }
    return 0.0;
  };
  return leaves(tl.treated_model()) + leaves(tl.control_model());
}

}  // namespace reachdiff
