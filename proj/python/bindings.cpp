#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "reachdiff/causal_forest.hpp"
#include "reachdiff/causal_tree.hpp"
#include "reachdiff/errors.hpp"
#include "reachdiff/eval.hpp"
#include "reachdiff/export.hpp"
#include "reachdiff/serialize.hpp"
#include "reachdiff/synth.hpp"
#include "reachdiff/workspace.hpp"

namespace py = pybind11;
using namespace reachdiff;

namespace {

using Matrix = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Vector = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Flags = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

FeatureMatrix to_matrix(const Matrix& x) {
  if (x.ndim() != 2) throw py::value_error("X must be 2-dimensional");
  const auto rows = static_cast<std::size_t>(x.shape(0));
  const auto cols = static_cast<std::size_t>(x.shape(1));
  FeatureMatrix out(rows, cols);
  auto view = x.unchecked<2>();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = view(r, c);
  }
  return out;
}

TrainingSet to_training_set(const Matrix& x, const Vector& y, const Flags& treated) {
  TrainingSet data;
  data.features = to_matrix(x);
  if (y.ndim() != 1 || treated.ndim() != 1) throw py::value_error("y and treated must be 1-D");
  data.outcomes.assign(y.data(), y.data() + y.size());
  for (py::ssize_t i = 0; i < treated.size(); ++i) {
    const auto v = treated.data()[i];
    if (v != 0 && v != 1) throw py::value_error("treated must hold 0/1 flags");
    data.treated.push_back(static_cast<std::uint8_t>(v));
  }
  data.validate();
  return data;
}

template <typename Model>
py::array_t<double> predict_rows(const Model& model, const Matrix& x) {
  const FeatureMatrix m = to_matrix(x);
  py::array_t<double> out(static_cast<py::ssize_t>(m.rows()));
  auto view = out.mutable_unchecked<1>();
  for (std::size_t r = 0; r < m.rows(); ++r) view(r) = model.predict(m.row(r));
  return out;
}

py::array_t<double> matrix_to_numpy(const FeatureMatrix& m) {
  py::array_t<double> out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) view(r, c) = m(r, c);
  }
  return out;
}

ExperimentConfig config_from(const std::string& json_text) {
  return parse_experiment_config_text(json_text.empty() ? "{}" : json_text);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Honest causal trees and forests for personalized reach difficulty";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);
  py::register_exception<UndefinedGroundTruth>(m, "UndefinedGroundTruth", PyExc_ArithmeticError);
  py::register_exception<UndefinedMetric>(m, "UndefinedMetric", PyExc_ArithmeticError);

  m.attr("FEATURE_NAMES") = [] {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < feature::kCount; ++i) names.emplace_back(feature_name(i));
    return names;
  }();

  m.def(
      "featurize",
      [](double x, double y, double z, const std::string& cue) {
        const auto f = featurize({x, y, z}, parse_cue(cue));
        return std::vector<double>(f.begin(), f.end());
      },
      py::arg("x"), py::arg("y"), py::arg("z"), py::arg("cue") = "move");

  py::class_<WorkspaceSpec>(m, "WorkspaceSpec")
      .def(py::init<>())
      .def_readwrite("r_min", &WorkspaceSpec::r_min)
      .def_readwrite("r_max", &WorkspaceSpec::r_max)
      .def_readwrite("z_min", &WorkspaceSpec::z_min)
      .def_readwrite("z_max", &WorkspaceSpec::z_max)
      .def_property(
          "arc_deg", [](const WorkspaceSpec& w) { return w.arc * 180.0 / std::numbers::pi; },
          [](WorkspaceSpec& w, double deg) { w.arc = deg * std::numbers::pi / 180.0; });

  m.def(
      "generate_grid",
      [](const WorkspaceSpec& spec, std::size_t n_r, std::size_t n_theta, std::size_t n_z) {
        const auto pts = generate_grid(spec, {n_r, n_theta, n_z});
        py::array_t<double> out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{3}});
        auto view = out.mutable_unchecked<2>();
        for (std::size_t i = 0; i < pts.size(); ++i) {
          view(i, 0) = pts[i].x;
          view(i, 1) = pts[i].y;
          view(i, 2) = pts[i].z;
        }
        return out;
      },
      py::arg("spec") = WorkspaceSpec{}, py::arg("n_r") = 5, py::arg("n_theta") = 5,
      py::arg("n_z") = 4);

  m.def(
      "contains",
      [](const WorkspaceSpec& spec, double x, double y, double z) {
        return contains(spec, {x, y, z});
      },
      py::arg("spec"), py::arg("x"), py::arg("y"), py::arg("z"));

  py::class_<Dataset>(m, "Dataset")
      .def_static("from_csv", [](const std::string& text) { return parse_records(text); })
      .def_static("read", &read_records_file)
      .def("to_csv", &write_records)
      .def("write", [](const Dataset& d, const std::string& path) { write_records_file(d, path); })
      .def("__len__", &Dataset::size)
      .def("features", [](const Dataset& d) { return matrix_to_numpy(d.features()); })
      .def("outcomes",
           [](const Dataset& d) {
             std::vector<double> y;
             for (const auto& r : d) y.push_back(r.time_s);
             return py::array_t<double>(static_cast<py::ssize_t>(y.size()), y.data());
           })
      .def("treated",
           [](const Dataset& d) {
             std::vector<std::int64_t> w;
             for (const auto& r : d) w.push_back(r.treated() ? 1 : 0);
             return py::array_t<std::int64_t>(static_cast<py::ssize_t>(w.size()), w.data());
           })
      .def("participants", &Dataset::treated_participants)
      .def("participant", &Dataset::filter_participant, py::arg("participant_id"))
      .def("control", [](const Dataset& d) { return d.filter_condition(Condition::kControl); });

  m.def(
      "generate_cohort",
      [](const std::string& config_json) { return generate_cohort(config_from(config_json).cohort); },
      py::arg("config_json") = "{}");

  py::class_<CausalTree>(m, "CausalTree")
      .def_static(
          "fit",
          [](const Matrix& x, const Vector& y, const Flags& treated, std::size_t min_samples,
             std::size_t max_depth, double honest_fraction, std::uint64_t seed) {
            TreeParams p;
            p.min_samples = min_samples;
            p.max_depth = max_depth;
            p.honest_fraction = honest_fraction;
            p.seed = seed;
            return fit_tree(to_training_set(x, y, treated), p);
          },
          py::arg("X"), py::arg("y"), py::arg("treated"), py::arg("min_samples") = 5,
          py::arg("max_depth") = 25, py::arg("honest_fraction") = 0.5, py::arg("seed") = 0)
      .def("predict", [](const CausalTree& t, const Matrix& x) { return predict_rows(t, x); })
      .def("leaf_assignment",
           [](const CausalTree& t, const Matrix& x) {
             const FeatureMatrix fm = to_matrix(x);
             std::vector<int> ids;
             for (std::size_t r = 0; r < fm.rows(); ++r) ids.push_back(t.leaf_assignment(fm.row(r)));
             return ids;
           })
      .def_property_readonly("leaf_count", &CausalTree::leaf_count)
      .def_property_readonly("height", &CausalTree::height)
      .def("depth_k_partition",
           [](const CausalTree& t, std::size_t k) {
             py::list out;
             for (const auto& e : t.depth_k_partition(k)) {
               py::list path;
               for (const auto& s : e.path) {
                 path.append(py::make_tuple(feature_name(s.rule.feature), s.rule.threshold,
                                            s.left ? "<" : ">="));
               }
               py::dict d;
               d["path"] = path;
               d["tau_hat"] = e.tau_hat;
               d["leaf_count"] = e.leaf_count;
               d["n_estimation"] = e.n_estimation;
               out.append(d);
             }
             return out;
           },
           py::arg("k"))
      .def("to_dot", &tree_to_dot, py::arg("max_depth") = SIZE_MAX);

  py::class_<CausalForest>(m, "CausalForest")
      .def_static(
          "fit",
          [](const Matrix& x, const Vector& y, const Flags& treated, std::size_t n_estimators,
             std::size_t min_samples, std::size_t max_depth, double honest_fraction,
             double subsample_fraction, std::uint64_t seed, std::size_t threads) {
            ForestParams p;
            p.n_trees = n_estimators;
            p.tree.min_samples = min_samples;
            p.tree.max_depth = max_depth;
            p.tree.honest_fraction = honest_fraction;
            p.subsample_fraction = subsample_fraction;
            p.seed = seed;
            p.n_threads = threads;
            const TrainingSet data = to_training_set(x, y, treated);
            py::gil_scoped_release release;
            return fit_forest(data, p);
          },
          py::arg("X"), py::arg("y"), py::arg("treated"), py::arg("n_estimators") = 100,
          py::arg("min_samples") = 5, py::arg("max_depth") = 25, py::arg("honest_fraction") = 0.5,
          py::arg("subsample_fraction") = 0.5, py::arg("seed") = 0, py::arg("threads") = 1)
      .def("predict", [](const CausalForest& f, const Matrix& x) { return predict_rows(f, x); })
      .def_property_readonly("n_trees", [](const CausalForest& f) { return f.trees().size(); })
      .def("tree", [](const CausalForest& f, std::size_t i) { return f.trees().at(i); })
      .def("to_json", [](const CausalForest& f) { return model_to_json(FittedModel(f)).dump(); })
      .def_static("from_json", [](const std::string& text) {
        return std::get<CausalForest>(model_from_json(Json::parse(text)));
      });

  py::class_<TLearner>(m, "TLearner")
      .def_static(
          "fit",
          [](const Matrix& x, const Vector& y, const Flags& treated, const std::string& spec_json,
             std::uint64_t seed) {
            auto j = Json::parse(spec_json);
            Json cfg{{"baselines", Json::array({j})}};
            auto params = parse_experiment_config(cfg).baselines.at(0);
            params.seed = seed;
            return tlearner_fit(to_training_set(x, y, treated), params);
          },
          py::arg("X"), py::arg("y"), py::arg("treated"),
          py::arg("spec_json") = R"({"variant": "tree"})", py::arg("seed") = 0)
      .def("predict", [](const TLearner& t, const Matrix& x) { return predict_rows(t, x); });

  m.def(
      "ground_truth_tau",
      [](const Dataset& participant, const Dataset& control, double x, double y, double z,
         double radius) { return ground_truth_tau(participant, control, {x, y, z}, radius); },
      py::arg("participant"), py::arg("control"), py::arg("x"), py::arg("y"), py::arg("z"),
      py::arg("radius") = 0.05);

  m.def("per_subject_mse", [](const std::vector<double>& p, const std::vector<double>& t) {
    return per_subject_mse(p, t);
  });
  m.def("aggregated_r2", [](const std::vector<double>& p, const std::vector<double>& t) {
    return aggregated_r2(p, t);
  });

  m.def(
      "run_experiment_json",
      [](const std::string& config_json, const Dataset& cohort) {
        const auto config = config_from(config_json);
        py::gil_scoped_release release;
        return report_to_json(run_experiment(config.evaluation, cohort));
      },
      py::arg("config_json"), py::arg("cohort"));
}
