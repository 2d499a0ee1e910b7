#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "reachdiff/eval.hpp"
#include "reachdiff/model.hpp"
#include "reachdiff/synth.hpp"
#include "reachdiff/workspace.hpp"

namespace reachdiff {

using Json = nlohmann::ordered_json;

// Everything a CLI run needs. Sections missing from the file keep their
// defaults; unknown keys are rejected.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  WorkspaceSpec workspace;
  CohortSpec cohort = default_cohort_spec();
  EvalConfig evaluation;
  ForestParams causal_forest;
  TreeParams causal_tree;
  std::vector<RegressorParams> baselines;

  // All models named by the config, in report order.
  std::vector<ModelSpec> model_specs() const;
  ModelSpec model_spec(const std::string& name) const;

  // Pushes the top-level seed into the cohort and evaluation sections.
  void apply_seed(std::uint64_t value);
};

// Defaults with the three T-learner baselines configured.
ExperimentConfig default_experiment_config();

// Throws ValidationError (with a JSON path) for bad structure or values.
ExperimentConfig parse_experiment_config(const Json& j);
ExperimentConfig parse_experiment_config_text(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);
Json to_json(const ExperimentConfig& config);

WorkspaceSpec parse_workspace(const Json& j);
Json to_json(const WorkspaceSpec& spec);

Json to_json(const TreeParams& params);
Json to_json(const ForestParams& params);
Json to_json(const RegressorParams& params);

// Threads are excluded: they never change results.
Json eval_config_to_json(const EvalConfig& config);
std::string eval_config_hash(const EvalConfig& config);

Json to_json(const CausalTree& tree);
CausalTree causal_tree_from_json(const Json& j);
Json to_json(const Regressor& regressor);
Regressor regressor_from_json(const Json& j);

Json model_to_json(const FittedModel& model);
FittedModel model_from_json(const Json& j);
void save_model(const FittedModel& model, const std::string& path);
FittedModel load_model(const std::string& path);

Json report_json(const ExperimentReport& report);

// 64-bit FNV-1a, lowercase hex.
std::string fnv1a_hex(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace reachdiff
