#include "reachdiff/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "reachdiff/errors.hpp"

namespace reachdiff {

namespace {

constexpr const char* kModelFormat = "reachdiff-model";
constexpr const char* kReportFormat = "reachdiff-report";
constexpr int kFormatVersion = 1;

// Typed access to one JSON object with path-qualified errors.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError((path_.empty() ? std::string("config") : path_) + ": " + what);
  }

  void allow(std::initializer_list<std::string_view> keys) const {
    for (const auto& [key, value] : j_.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        fail("unknown key '" + key + "'");
      }
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const Json& raw(const std::string& key) const {
    if (!has(key)) fail("missing key '" + key + "'");
    return j_.at(key);
  }
  std::string path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  Reader child(const std::string& key) const { return Reader(raw(key), path(key)); }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return number(key);
  }
  double number(const std::string& key) const {
    const auto& v = raw(key);
    if (!v.is_number()) fail("'" + key + "' must be a number");
    return v.get<double>();
  }
  std::size_t count(const std::string& key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    return count(key);
  }
  std::size_t count(const std::string& key) const {
    const auto& v = raw(key);
    if (!v.is_number_unsigned()) fail("'" + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
  }
  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_number_unsigned()) fail("'" + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  }
  std::string string(const std::string& key) const {
    const auto& v = raw(key);
    if (!v.is_string()) fail("'" + key + "' must be a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    return has(key) ? string(key) : fallback;
  }
  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_boolean()) fail("'" + key + "' must be a boolean");
    return v.get<bool>();
  }
  std::vector<double> numbers(const std::string& key, std::size_t expected) const {
    const auto& v = raw(key);
    if (!v.is_array() || v.size() != expected) {
      fail("'" + key + "' must be an array of " + std::to_string(expected) + " numbers");
    }
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail("'" + key + "' must hold numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

 private:
  const Json& j_;
  std::string path_;
};

template <typename F>
auto rethrow_as_validation(const std::string& what, F&& fn) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw ValidationError(what + ": " + e.what());
  }
}

TreeParams parse_tree_params(const Reader& r, TreeParams p) {
  r.allow({"min_samples", "max_depth", "honest_fraction"});
  p.min_samples = r.count("min_samples", p.min_samples);
  p.max_depth = r.count("max_depth", p.max_depth);
  p.honest_fraction = r.number("honest_fraction", p.honest_fraction);
  try {
    p.validate();
  } catch (const ValidationError& e) {
    r.fail(e.what());
  }
  return p;
}

ForestParams parse_forest_params(const Reader& r) {
  r.allow({"n_estimators", "min_samples", "max_depth", "honest_fraction", "subsample_fraction",
           "threads"});
  ForestParams p;
  p.n_trees = r.count("n_estimators", p.n_trees);
  p.tree.min_samples = r.count("min_samples", p.tree.min_samples);
  p.tree.max_depth = r.count("max_depth", p.tree.max_depth);
  p.tree.honest_fraction = r.number("honest_fraction", p.tree.honest_fraction);
  p.subsample_fraction = r.number("subsample_fraction", p.subsample_fraction);
  p.n_threads = r.count("threads", p.n_threads);
  try {
    p.validate();
  } catch (const ValidationError& e) {
    r.fail(e.what());
  }
  return p;
}

RegressionTreeParams parse_cart_params(const Reader& r, RegressionTreeParams p) {
  p.max_depth = r.count("max_depth", p.max_depth);
  p.min_samples_split = r.count("min_samples_split", p.min_samples_split);
  p.min_samples_leaf = r.count("min_samples_leaf", p.min_samples_leaf);
  return p;
}

RegressorParams parse_regressor(const Reader& r) {
  r.allow({"variant", "params"});
  RegressorParams p;
  try {
    p.variant = parse_variant(r.string("variant"));
  } catch (const ValidationError& e) {
    r.fail(e.what());
  }
  if (r.has("params")) {
    const Reader params = r.child("params");
    switch (p.variant) {
      case RegressorVariant::kTree:
        params.allow({"max_depth", "min_samples_split", "min_samples_leaf"});
        p.tree = parse_cart_params(params, p.tree);
        break;
      case RegressorVariant::kForest:
        params.allow({"n_estimators", "max_depth", "min_samples_split", "min_samples_leaf",
                      "bootstrap"});
        p.forest.n_estimators = params.count("n_estimators", p.forest.n_estimators);
        p.forest.tree = parse_cart_params(params, p.forest.tree);
        p.forest.bootstrap = params.boolean("bootstrap", p.forest.bootstrap);
        break;
      case RegressorVariant::kKnn: {
        params.allow({"n_neighbors", "weights", "metric"});
        p.knn.k = params.count("n_neighbors", p.knn.k);
        const auto weights = params.string("weights", "distance");
        if (weights == "distance") {
          p.knn.weighting = KnnWeighting::kInverseDistance;
        } else if (weights == "uniform") {
          p.knn.weighting = KnnWeighting::kUniform;
        } else {
          params.fail("weights must be 'distance' or 'uniform'");
        }
        const auto metric = params.string("metric", "manhattan");
        if (metric == "manhattan") {
          p.knn.metric = KnnMetric::kManhattan;
        } else if (metric == "euclidean") {
          p.knn.metric = KnnMetric::kEuclidean;
        } else {
          params.fail("metric must be 'manhattan' or 'euclidean'");
        }
        break;
      }
    }
  }
  try {
    p.validate();
  } catch (const ValidationError& e) {
    r.fail(e.what());
  }
  return p;
}

Json cart_json(const RegressionTreeParams& p) {
  return Json{{"max_depth", p.max_depth},
              {"min_samples_split", p.min_samples_split},
              {"min_samples_leaf", p.min_samples_leaf}};
}

DifficultyField parse_field(const Reader& r) {
  r.allow({"default_tau", "regions"});
  DifficultyField f;
  f.default_tau = r.number("default_tau", 0.0);
  if (r.has("regions")) {
    const auto& regions = r.raw("regions");
    if (!regions.is_array()) r.fail("'regions' must be an array");
    for (std::size_t i = 0; i < regions.size(); ++i) {
      const Reader region(regions[i], r.path("regions") + "[" + std::to_string(i) + "]");
      region.allow({"lo", "hi", "tau"});
      DifficultyRegion out;
      const auto lo = region.numbers("lo", 3);
      const auto hi = region.numbers("hi", 3);
      std::copy(lo.begin(), lo.end(), out.box.lo.begin());
      std::copy(hi.begin(), hi.end(), out.box.hi.begin());
      out.tau = region.number("tau");
      f.regions.push_back(out);
    }
  }
  try {
    f.validate();
  } catch (const ValidationError& e) {
    r.fail(e.what());
  }
  return f;
}

Json field_json(const DifficultyField& f) {
  Json regions = Json::array();
  for (const auto& r : f.regions) {
    regions.push_back(Json{{"lo", r.box.lo}, {"hi", r.box.hi}, {"tau", r.tau}});
  }
  return Json{{"default_tau", f.default_tau}, {"regions", regions}};
}

void parse_cohort(const Reader& r, CohortSpec& c) {
  r.allow({"n_neurotypical", "n_post_stroke", "sessions_per_stroke", "reaches_per_session", "grid",
           "nominal", "distraction", "fields"});
  c.n_neurotypical = r.count("n_neurotypical", c.n_neurotypical);
  c.n_post_stroke = r.count("n_post_stroke", c.n_post_stroke);
  c.sessions_per_stroke = r.count("sessions_per_stroke", c.sessions_per_stroke);
  c.reaches_per_session = r.count("reaches_per_session", c.reaches_per_session);
  if (r.has("grid")) {
    const auto g = r.numbers("grid", 3);
    for (double v : g) {
      if (!(v >= 1.0) || v != std::floor(v)) r.fail("'grid' entries must be integers >= 1");
    }
    c.grid = {static_cast<std::size_t>(g[0]), static_cast<std::size_t>(g[1]),
              static_cast<std::size_t>(g[2])};
  }
  if (r.has("nominal")) {
    const Reader n = r.child("nominal");
    n.allow({"t0", "a", "b", "sigma"});
    c.nominal.t0 = n.number("t0", c.nominal.t0);
    c.nominal.a = n.number("a", c.nominal.a);
    c.nominal.b = n.number("b", c.nominal.b);
    c.nominal.sigma = n.number("sigma", c.nominal.sigma);
  }
  if (r.has("distraction")) {
    const Reader d = r.child("distraction");
    d.allow({"p", "delay"});
    c.distraction.p = d.number("p", c.distraction.p);
    if (d.has("delay")) {
      const auto delay = d.numbers("delay", 2);
      c.distraction.delay_lo = delay[0];
      c.distraction.delay_hi = delay[1];
    }
  }
  if (r.has("fields")) {
    const auto& fields = r.raw("fields");
    if (!fields.is_array() || fields.empty()) r.fail("'fields' must be a non-empty array");
    c.fields.clear();
    for (std::size_t i = 0; i < fields.size(); ++i) {
      c.fields.push_back(parse_field(Reader(fields[i], r.path("fields") + "[" + std::to_string(i) + "]")));
    }
  }
}

Json cohort_json(const CohortSpec& c) {
  Json fields = Json::array();
  for (const auto& f : c.fields) fields.push_back(field_json(f));
  return Json{{"n_neurotypical", c.n_neurotypical},
              {"n_post_stroke", c.n_post_stroke},
              {"sessions_per_stroke", c.sessions_per_stroke},
              {"reaches_per_session", c.reaches_per_session},
              {"grid", {c.grid.n_r, c.grid.n_theta, c.grid.n_z}},
              {"nominal",
               {{"t0", c.nominal.t0}, {"a", c.nominal.a}, {"b", c.nominal.b},
                {"sigma", c.nominal.sigma}}},
              {"distraction",
               {{"p", c.distraction.p},
                {"delay", {c.distraction.delay_lo, c.distraction.delay_hi}}}},
              {"fields", fields}};
}

Json model_spec_json(const ModelSpec& spec) {
  Json j{{"name", spec.name}};
  switch (spec.kind) {
    case ModelKind::kCausalForest:
      j["params"] = to_json(spec.forest);
      break;
    case ModelKind::kCausalTree:
      j["params"] = to_json(spec.tree);
      break;
    case ModelKind::kTLearner:
      j["params"] = to_json(spec.regressor);
      break;
  }
  return j;
}

std::vector<std::size_t> index_array(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ValidationError(what + " must be an array");
  std::vector<std::size_t> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number_unsigned()) throw ValidationError(what + " must hold row indices");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

}  // namespace

std::vector<ModelSpec> ExperimentConfig::model_specs() const {
  std::vector<ModelSpec> out{causal_forest_spec(causal_forest), causal_tree_spec(causal_tree)};
  for (const auto& b : baselines) out.push_back(tlearner_spec(b));
  return out;
}

ModelSpec ExperimentConfig::model_spec(const std::string& name) const {
  for (const auto& spec : model_specs()) {
    if (spec.name == name) return spec;
  }
  return default_model_spec(name);
}

void ExperimentConfig::apply_seed(std::uint64_t value) {
  seed = value;
  cohort.seed = value;
  evaluation.seed = value;
}

ExperimentConfig default_experiment_config() {
  ExperimentConfig config;
  for (auto v : {RegressorVariant::kTree, RegressorVariant::kForest, RegressorVariant::kKnn}) {
    RegressorParams p;
    p.variant = v;
    config.baselines.push_back(p);
  }
  config.evaluation.models = config.model_specs();
  return config;
}

WorkspaceSpec parse_workspace(const Json& j) {
  const Reader r(j, "workspace");
  r.allow({"r_min", "r_max", "arc_deg", "z_min", "z_max"});
  WorkspaceSpec w;
  w.r_min = r.number("r_min", w.r_min);
  w.r_max = r.number("r_max", w.r_max);
  w.arc = r.number("arc_deg", 180.0) * std::numbers::pi / 180.0;
  w.z_min = r.number("z_min", w.z_min);
  w.z_max = r.number("z_max", w.z_max);
  try {
    w.validate();
  } catch (const ValidationError& e) {
    r.fail(e.what());
  }
  return w;
}

Json to_json(const WorkspaceSpec& w) {
  return Json{{"r_min", w.r_min},
              {"r_max", w.r_max},
              {"arc_deg", w.arc * 180.0 / std::numbers::pi},
              {"z_min", w.z_min},
              {"z_max", w.z_max}};
}

ExperimentConfig parse_experiment_config(const Json& j) {
  const Reader r(j, "");
  r.allow({"seed", "workspace", "cohort", "evaluation", "causal_forest", "causal_tree",
           "baselines"});
  ExperimentConfig c = default_experiment_config();
  if (r.has("workspace")) c.workspace = parse_workspace(r.raw("workspace"));
  c.cohort.workspace = c.workspace;
  if (r.has("cohort")) parse_cohort(r.child("cohort"), c.cohort);
  if (r.has("causal_forest")) c.causal_forest = parse_forest_params(r.child("causal_forest"));
  if (r.has("causal_tree")) {
    c.causal_tree = parse_tree_params(r.child("causal_tree"), c.causal_tree);
  }
  if (r.has("baselines")) {
    const auto& b = r.raw("baselines");
    if (!b.is_array()) r.fail("'baselines' must be an array");
    c.baselines.clear();
    for (std::size_t i = 0; i < b.size(); ++i) {
      c.baselines.push_back(parse_regressor(Reader(b[i], "baselines[" + std::to_string(i) + "]")));
    }
  }
  c.evaluation.models = c.model_specs();
  if (r.has("evaluation")) {
    const Reader e = r.child("evaluation");
    e.allow({"n_seeds", "train_fraction", "ball_radius", "threads", "models"});
    c.evaluation.n_seeds = e.count("n_seeds", c.evaluation.n_seeds);
    c.evaluation.train_fraction = e.number("train_fraction", c.evaluation.train_fraction);
    c.evaluation.ball_radius = e.number("ball_radius", c.evaluation.ball_radius);
    c.evaluation.n_threads = e.count("threads", c.evaluation.n_threads);
    if (e.has("models")) {
      const auto& names = e.raw("models");
      if (!names.is_array()) e.fail("'models' must be an array of model names");
      const auto available = c.model_specs();
      c.evaluation.models.clear();
      for (const auto& name : names) {
        if (!name.is_string()) e.fail("'models' must hold strings");
        const auto it = std::find_if(available.begin(), available.end(), [&](const ModelSpec& s) {
          return s.name == name.get<std::string>();
        });
        if (it == available.end()) {
          e.fail("model '" + name.get<std::string>() + "' is not configured");
        }
        c.evaluation.models.push_back(*it);
      }
    }
  }
  c.apply_seed(r.seed("seed", 0));
  try {
    c.cohort.validate();
    c.evaluation.validate();
  } catch (const ValidationError& e) {
    r.fail(e.what());
  }
  return c;
}

ExperimentConfig parse_experiment_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what());
  }
  return parse_experiment_config(j);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config_text(read_text_file(path));
}

Json to_json(const ExperimentConfig& c) {
  Json baselines = Json::array();
  for (const auto& b : c.baselines) baselines.push_back(to_json(b));
  Json models = Json::array();
  for (const auto& m : c.evaluation.models) models.push_back(m.name);
  Json forest = to_json(c.causal_forest);
  forest.erase("seed");
  forest["threads"] = c.causal_forest.n_threads;
  Json tree = to_json(c.causal_tree);
  tree.erase("seed");
  return Json{{"seed", c.seed},
              {"workspace", to_json(c.workspace)},
              {"cohort", cohort_json(c.cohort)},
              {"evaluation",
               {{"n_seeds", c.evaluation.n_seeds},
                {"train_fraction", c.evaluation.train_fraction},
                {"ball_radius", c.evaluation.ball_radius},
                {"threads", c.evaluation.n_threads},
                {"models", models}}},
              {"causal_forest", forest},
              {"causal_tree", tree},
              {"baselines", baselines}};
}

Json to_json(const TreeParams& p) {
  return Json{{"min_samples", p.min_samples},
              {"max_depth", p.max_depth},
              {"honest_fraction", p.honest_fraction},
              {"seed", p.seed}};
}

Json to_json(const ForestParams& p) {
  return Json{{"n_estimators", p.n_trees},
              {"min_samples", p.tree.min_samples},
              {"max_depth", p.tree.max_depth},
              {"honest_fraction", p.tree.honest_fraction},
              {"subsample_fraction", p.subsample_fraction},
              {"seed", p.seed}};
}

Json to_json(const RegressorParams& p) {
  Json params;
  switch (p.variant) {
    case RegressorVariant::kTree:
      params = cart_json(p.tree);
      break;
    case RegressorVariant::kForest:
      params = cart_json(p.forest.tree);
      params["n_estimators"] = p.forest.n_estimators;
      params["bootstrap"] = p.forest.bootstrap;
      break;
    case RegressorVariant::kKnn:
      params = Json{{"n_neighbors", p.knn.k},
                    {"weights", p.knn.weighting == KnnWeighting::kInverseDistance ? "distance"
                                                                                 : "uniform"},
                    {"metric", p.knn.metric == KnnMetric::kManhattan ? "manhattan" : "euclidean"}};
      break;
  }
  return Json{{"variant", variant_name(p.variant)}, {"params", params}};
}

Json eval_config_to_json(const EvalConfig& c) {
  Json models = Json::array();
  for (const auto& m : c.models) {
    Json spec = model_spec_json(m);
    spec["params"].erase("seed");
    models.push_back(spec);
  }
  return Json{{"train_fraction", c.train_fraction},
              {"ball_radius", c.ball_radius},
              {"n_seeds", c.n_seeds},
              {"seed", c.seed},
              {"models", models}};
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string eval_config_hash(const EvalConfig& config) {
  return fnv1a_hex(eval_config_to_json(config).dump());
}

Json to_json(const CausalTree& tree) {
  Json nodes = Json::array();
  for (const auto& n : tree.nodes()) {
    if (n.is_leaf()) {
      nodes.push_back(Json{{"leaf_id", n.leaf_id},
                           {"tau_hat", n.tau_hat},
                           {"n_treated_est", n.n_treated_est},
                           {"n_control_est", n.n_control_est},
                           {"estimation_rows", n.estimation_rows}});
    } else {
      nodes.push_back(Json{{"feature", n.rule.feature},
                           {"threshold", n.rule.threshold},
                           {"left", n.left},
                           {"right", n.right}});
    }
  }
  return Json{{"dimension", tree.dimension()},
              {"splitting_rows", tree.splitting_rows()},
              {"nodes", nodes}};
}

CausalTree causal_tree_from_json(const Json& j) {
  return rethrow_as_validation("causal tree", [&] {
    std::vector<CausalTreeNode> nodes;
    for (const auto& n : j.at("nodes")) {
      CausalTreeNode node;
      if (n.contains("leaf_id")) {
        node.leaf_id = n.at("leaf_id").get<int>();
        node.tau_hat = n.at("tau_hat").get<double>();
        node.n_treated_est = n.at("n_treated_est").get<std::size_t>();
        node.n_control_est = n.at("n_control_est").get<std::size_t>();
        node.estimation_rows = index_array(n.at("estimation_rows"), "estimation_rows");
      } else {
        node.rule.feature = n.at("feature").get<std::size_t>();
        node.rule.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
      }
      nodes.push_back(std::move(node));
    }
    return CausalTree(std::move(nodes), j.at("dimension").get<std::size_t>(),
                      index_array(j.at("splitting_rows"), "splitting_rows"));
  });
}

Json to_json(const Regressor& regressor) {
  auto tree_json = [](const RegressionTree& t) {
    Json nodes = Json::array();
    for (const auto& n : t.nodes()) {
      nodes.push_back(Json{{"feature", n.feature},
                           {"threshold", n.threshold},
                           {"left", n.left},
                           {"right", n.right},
                           {"value", n.value},
                           {"n", n.n}});
    }
    return Json{{"dimension", t.dimension()}, {"nodes", nodes}};
  };
  return std::visit(
      [&](const auto& m) -> Json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RegressionTree>) {
          Json j = tree_json(m);
          j["type"] = "tree";
          return j;
        } else if constexpr (std::is_same_v<T, RandomForestRegressor>) {
          Json trees = Json::array();
          for (const auto& t : m.trees()) trees.push_back(tree_json(t));
          return Json{{"type", "forest"}, {"trees", trees}};
        } else {
          Json rows = Json::array();
          for (std::size_t i = 0; i < m.features().rows(); ++i) {
            const auto row = m.features().row(i);
            rows.push_back(std::vector<double>(row.begin(), row.end()));
          }
          RegressorParams p;
          p.variant = RegressorVariant::kKnn;
          p.knn = m.params();
          return Json{{"type", "knn"},
                      {"params", to_json(p)["params"]},
                      {"dimension", m.dimension()},
                      {"X", rows},
                      {"y", m.outcomes()}};
        }
      },
      regressor.model());
}

Regressor regressor_from_json(const Json& j) {
  return rethrow_as_validation("regressor", [&]() -> Regressor {
    auto tree_from = [](const Json& t) {
      std::vector<RegressionTree::Node> nodes;
      for (const auto& n : t.at("nodes")) {
        RegressionTree::Node node;
        node.feature = n.at("feature").get<std::size_t>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
        node.value = n.at("value").get<double>();
        node.n = n.at("n").get<std::size_t>();
        nodes.push_back(node);
      }
      return RegressionTree(std::move(nodes), t.at("dimension").get<std::size_t>());
    };
    const auto type = j.at("type").get<std::string>();
    if (type == "tree") return Regressor(tree_from(j));
    if (type == "forest") {
      std::vector<RegressionTree> trees;
      for (const auto& t : j.at("trees")) trees.push_back(tree_from(t));
      return Regressor(RandomForestRegressor(std::move(trees)));
    }
    if (type == "knn") {
      const auto dim = j.at("dimension").get<std::size_t>();
      FeatureMatrix x(0, dim);
      for (const auto& row : j.at("X")) x.append_row(row.get<std::vector<double>>());
      const Json params{{"variant", "knn"}, {"params", j.at("params")}};
      return Regressor(KnnRegressor(std::move(x), j.at("y").get<std::vector<double>>(),
                                    parse_regressor(Reader(params, "knn")).knn));
    }
    throw ValidationError("regressor: unknown type '" + type + "'");
  });
}

Json model_to_json(const FittedModel& model) {
  Json j{{"format", kModelFormat}, {"version", kFormatVersion}, {"kind", model_kind_name(model)}};
  if (const auto* f = std::get_if<CausalForest>(&model)) {
    j["params"] = to_json(f->params());
    Json trees = Json::array();
    for (const auto& t : f->trees()) trees.push_back(to_json(t));
    j["trees"] = trees;
  } else if (const auto* t = std::get_if<CausalTree>(&model)) {
    j["tree"] = to_json(*t);
  } else {
    const auto& tl = std::get<TLearner>(model);
    j["treated"] = to_json(tl.treated_model());
    j["control"] = to_json(tl.control_model());
  }
  return j;
}

FittedModel model_from_json(const Json& j) {
  return rethrow_as_validation("model", [&]() -> FittedModel {
    if (j.at("format").get<std::string>() != kModelFormat) {
      throw ValidationError("model: not a reachdiff model file");
    }
    if (j.at("version").get<int>() != kFormatVersion) {
      throw ValidationError("model: unsupported format version");
    }
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "causal_forest") {
      const auto& p = j.at("params");
      ForestParams params;
      params.n_trees = p.at("n_estimators").get<std::size_t>();
      params.tree.min_samples = p.at("min_samples").get<std::size_t>();
      params.tree.max_depth = p.at("max_depth").get<std::size_t>();
      params.tree.honest_fraction = p.at("honest_fraction").get<double>();
      params.subsample_fraction = p.at("subsample_fraction").get<double>();
      params.seed = p.at("seed").get<std::uint64_t>();
      std::vector<CausalTree> trees;
      for (const auto& t : j.at("trees")) trees.push_back(causal_tree_from_json(t));
      return CausalForest(params, std::move(trees));
    }
    if (kind == "causal_tree") return causal_tree_from_json(j.at("tree"));
    if (kind == "tlearner") {
      return TLearner(regressor_from_json(j.at("treated")), regressor_from_json(j.at("control")));
    }
    throw ValidationError("model: unknown kind '" + kind + "'");
  });
}

void save_model(const FittedModel& model, const std::string& path) {
  write_text_file(path, model_to_json(model).dump() + "\n");
}

FittedModel load_model(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw ValidationError(path + ": invalid JSON: " + e.what());
  }
  return model_from_json(j);
}

Json report_json(const ExperimentReport& report) {
  auto number_or_null = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  Json summary = Json::array();
  for (const auto& m : report.models) {
    summary.push_back(Json{{"model", m.model},
                           {"mse", m.mse_mean},
                           {"mse_se", m.mse_se},
                           {"r2", m.r2_mean},
                           {"r2_se", m.r2_se},
                           {"seed_mse", m.seed_mse},
                           {"seed_r2", m.seed_r2}});
  }
  Json cells = Json::array();
  for (const auto& c : report.cells) {
    cells.push_back(Json{{"model", c.model},
                         {"participant", c.participant},
                         {"seed", c.seed},
                         {"mse", number_or_null(c.mse)},
                         {"n_test", c.n_test},
                         {"n_skipped", c.n_skipped}});
  }
  return Json{{"format", kReportFormat},
              {"version", kFormatVersion},
              {"config_hash", report.config_hash},
              {"seeds", report.seeds},
              {"participants", report.participants},
              {"skipped_points", report.skipped_points},
              {"summary", summary},
              {"cells", cells}};
}

std::string report_to_json(const ExperimentReport& report) {
  return report_json(report).dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace reachdiff
