#include "reachdiff/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>

#include "reachdiff/errors.hpp"
#include "reachdiff/eval.hpp"
#include "reachdiff/export.hpp"
#include "reachdiff/serialize.hpp"
#include "reachdiff/synth.hpp"

namespace reachdiff {

namespace {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
};

ExperimentConfig load_config(const GlobalOptions& g) {
  ExperimentConfig config =
      g.config.empty() ? default_experiment_config() : load_experiment_config(g.config);
  if (g.seed) config.apply_seed(*g.seed);
  return config;
}

void require_out(const GlobalOptions& g) {
  if (g.out.empty()) throw ValidationError("--out is required");
}

std::string text_report_path(const std::string& json_path) {
  const std::string ext = ".json";
  if (json_path.size() > ext.size() &&
      json_path.compare(json_path.size() - ext.size(), ext.size(), ext) == 0) {
    return json_path.substr(0, json_path.size() - ext.size()) + ".txt";
  }
  return json_path + ".txt";
}

GridCounts parse_resolution(const std::string& text) {
  GridCounts counts;
  unsigned long r = 0;
  unsigned long t = 0;
  unsigned long z = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lu,%lu,%lu%c", &r, &t, &z, &tail) != 3 || r == 0 || t == 0 ||
      z == 0) {
    throw ValidationError("--resolution must look like 5,5,4 with counts >= 1");
  }
  counts.n_r = r;
  counts.n_theta = t;
  counts.n_z = z;
  return counts;
}

int cmd_generate(const GlobalOptions& g, std::ostream& out) {
  require_out(g);
  const auto config = load_config(g);
  const Dataset data = generate_cohort(config.cohort);
  write_records_file(data, g.out);
  out << "wrote " << data.size() << " records to " << g.out << "\n";
  return kExitOk;
}

int cmd_fit(const GlobalOptions& g, const std::string& data_path, const std::string& participant,
            const std::string& model_name, std::ostream& out) {
  require_out(g);
  const auto config = load_config(g);
  const ModelSpec spec = config.model_spec(model_name);
  const Dataset data = read_records_file(data_path);
  const Dataset treated = data.filter_participant(participant).filter_condition(Condition::kTreated);
  if (treated.empty()) {
    throw std::runtime_error("unknown participant '" + participant +
                             "' (no rows with condition = 1)");
  }
  const Dataset control = data.filter_condition(Condition::kControl);
  if (control.empty()) {
    throw std::runtime_error("no control rows: column 'condition' has no entries equal to 0");
  }
  const FittedModel model = fit_model(spec, concat(treated, control).training_set(), config.seed);
  save_model(model, g.out);
  char line[128];
  if (std::holds_alternative<CausalForest>(model)) {
    std::snprintf(line, sizeof(line), "mean leaves per tree: %.2f", model_leaf_count(model));
  } else {
    std::snprintf(line, sizeof(line), "leaves: %.0f", model_leaf_count(model));
  }
  out << spec.name << " fit on " << treated.size() << " treated + " << control.size()
      << " control rows; " << line << "\n";
  return kExitOk;
}

int cmd_evaluate(const GlobalOptions& g, const std::string& data_path, std::ostream& out) {
  require_out(g);
  const auto config = load_config(g);
  const Dataset data = read_records_file(data_path);
  const auto report = run_experiment(config.evaluation, data);
  const auto text = report_to_text(report);
  write_text_file(g.out, report_to_json(report));
  write_text_file(text_report_path(g.out), text);
  out << text;
  return kExitOk;
}

int cmd_export_heatmap(const GlobalOptions& g, const std::string& model_path,
                       const std::string& resolution, const std::string& cue,
                       std::ostream& out) {
  require_out(g);
  const auto config = load_config(g);
  const auto counts = parse_resolution(resolution);
  const Cue fixed_cue = parse_cue(cue);
  const auto model = load_model(model_path);
  const auto rows = heatmap(model, config.workspace, counts, fixed_cue);
  write_text_file(g.out, heatmap_to_csv(rows));
  out << "wrote " << rows.size() << " heatmap rows to " << g.out << "\n";
  return kExitOk;
}

int cmd_export_tree(const GlobalOptions& g, const std::string& model_path, std::size_t index,
                    std::size_t max_depth, std::ostream& out) {
  require_out(g);
  const auto model = load_model(model_path);
  const CausalTree* tree = nullptr;
  if (const auto* f = std::get_if<CausalForest>(&model)) {
    if (index >= f->trees().size()) {
      throw ValidationError("--tree-index " + std::to_string(index) + " out of range; forest has " +
                            std::to_string(f->trees().size()) + " trees");
    }
    tree = &f->trees()[index];
  } else if (const auto* t = std::get_if<CausalTree>(&model)) {
    if (index != 0) throw ValidationError("--tree-index must be 0 for a single causal tree");
    tree = t;
  } else {
    throw ValidationError("export-tree needs a causal forest or causal tree model");
  }
  write_text_file(g.out, tree_to_dot(*tree, max_depth));
  out << "wrote tree " << index << " (height " << tree->height() << ") to " << g.out << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Personalized reach difficulty with honest causal forests", "reachdiff"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed override (cohort, fits, evaluation)");
  app.add_option("--config", g.config, "Experiment config JSON");
  app.add_option("--out", g.out, "Output path");

  auto* generate = app.add_subcommand("generate", "Write a synthetic reach-log CSV");
  generate->fallthrough();

  std::string data_path;
  std::string participant;
  std::string model_name = "causal_forest";
  auto* fit = app.add_subcommand("fit", "Fit a model for one participant");
  fit->fallthrough();
  fit->add_option("--data", data_path, "Reach-log CSV")->required();
  fit->add_option("--participant", participant, "Treated participant id")->required();
  fit->add_option("--model", model_name,
                  "causal_forest | causal_tree | tlearner_tree | tlearner_forest | tlearner_knn");

  auto* evaluate = app.add_subcommand("evaluate", "Run the multi-seed evaluation");
  evaluate->fallthrough();
  evaluate->add_option("--data", data_path, "Reach-log CSV")->required();

  std::string model_path;
  std::string resolution = "5,5,4";
  std::string cue = "move";
  auto* export_heatmap = app.add_subcommand("export-heatmap", "Write tau_hat over a workspace grid");
  export_heatmap->fallthrough();
  export_heatmap->add_option("--model", model_path, "Model JSON")->required();
  export_heatmap->add_option("--resolution", resolution, "Grid counts n_r,n_theta,n_z");
  export_heatmap->add_option("--cue", cue, "Cue held fixed (move, ok, reach, now)");

  std::size_t tree_index = 0;
  std::size_t max_depth = SIZE_MAX;
  auto* export_tree = app.add_subcommand("export-tree", "Write a DOT diagram of one tree");
  export_tree->fallthrough();
  export_tree->add_option("--model", model_path, "Model JSON")->required();
  export_tree->add_option("--tree-index", tree_index, "Tree within the forest");
  export_tree->add_option("--max-depth", max_depth, "Truncation depth");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(g, out);
    if (fit->parsed()) return cmd_fit(g, data_path, participant, model_name, out);
    if (evaluate->parsed()) return cmd_evaluate(g, data_path, out);
    if (export_heatmap->parsed()) {
      return cmd_export_heatmap(g, model_path, resolution, cue, out);
    }
    if (export_tree->parsed()) return cmd_export_tree(g, model_path, tree_index, max_depth, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace reachdiff
