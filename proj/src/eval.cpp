#include "reachdiff/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "reachdiff/errors.hpp"
#include "reachdiff/random.hpp"
#include "reachdiff/serialize.hpp"
#include "reachdiff/workspace.hpp"

namespace reachdiff {

namespace {

double ball_mean(std::span<const ReachRecord> records, const ReachTarget& center, double radius,
                 const char* group) {
  const auto idx = ball_query_indices(records, center, radius);
  if (idx.empty()) {
    throw UndefinedGroundTruth(std::string("no ") + group + " reaches within the ball");
  }
  double sum = 0.0;
  for (auto i : idx) sum += records[i].time_s;
  return sum / static_cast<double>(idx.size());
}

struct ModelCell {
  std::vector<double> predictions;
  std::vector<double> truths;
};

struct CellOutput {
  std::vector<ModelCell> models;
  std::size_t n_skipped = 0;
};

}  // namespace

double ground_truth_tau(std::span<const ReachRecord> participant,
                        std::span<const ReachRecord> control, const ReachTarget& center,
                        double radius) {
  if (!(radius > 0.0)) throw ValidationError("ground truth: radius must be > 0");
  return ball_mean(participant, center, radius, "participant") -
         ball_mean(control, center, radius, "control");
}

double ground_truth_tau(const Dataset& participant, const Dataset& control,
                        const ReachTarget& center, double radius) {
  return ground_truth_tau(std::span(participant.records()), std::span(control.records()), center,
                          radius);
}

TrainTestSplit split_train_test(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("split: train_fraction must lie in (0, 1)");
  }
  if (n < 5) throw ValidationError("split: need at least 5 rows, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span(order));
  auto n_train = static_cast<std::size_t>(std::ceil(train_fraction * static_cast<double>(n)));
  n_train = std::min(n_train, n - 1);
  TrainTestSplit out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

double per_subject_mse(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size()) {
    throw ValidationError("mse: predictions and truths differ in length");
  }
  if (predictions.empty()) throw ValidationError("mse: no values");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - truths[i];
    sum += d * d;
  }
  return sum / static_cast<double>(predictions.size());
}

double aggregated_r2(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size()) {
    throw ValidationError("r2: predictions and truths differ in length");
  }
  if (predictions.empty()) throw ValidationError("r2: no values");
  const double mean =
      std::accumulate(truths.begin(), truths.end(), 0.0) / static_cast<double>(truths.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    ss_res += (truths[i] - predictions[i]) * (truths[i] - predictions[i]);
    ss_tot += (truths[i] - mean) * (truths[i] - mean);
  }
  if (ss_tot == 0.0) throw UndefinedMetric("r2: truths are constant");
  return 1.0 - ss_res / ss_tot;
}

std::pair<double, double> mean_and_se(std::span<const double> values) {
  if (values.empty()) throw ValidationError("mean_and_se: no values");
  const auto n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

void EvalConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("evaluation: train_fraction must lie in (0, 1)");
  }
  if (!(ball_radius > 0.0)) throw ValidationError("evaluation: ball_radius must be > 0");
  if (n_seeds < 1) throw ValidationError("evaluation: n_seeds must be >= 1");
  if (models.empty()) throw ValidationError("evaluation: no models configured");
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (models[i].name == models[j].name) {
        throw ValidationError("evaluation: duplicate model name '" + models[i].name + "'");
      }
    }
  }
}

std::vector<std::uint64_t> EvalConfig::seed_list() const {
  std::vector<std::uint64_t> seeds(n_seeds);
  for (std::size_t i = 0; i < n_seeds; ++i) seeds[i] = seed + i;
  return seeds;
}

const ModelSummary& ExperimentReport::summary(std::string_view model) const {
  for (const auto& m : models) {
    if (m.model == model) return m;
  }
  throw ValidationError("report: no model named '" + std::string(model) + "'");
}

ExperimentReport run_experiment(const EvalConfig& config, const Dataset& cohort) {
  config.validate();
  const Dataset control = cohort.filter_condition(Condition::kControl);
  const auto participants = cohort.treated_participants();
  if (control.empty()) throw ValidationError("cohort has no control rows (condition = 0)");
  if (participants.empty()) throw ValidationError("cohort has no treated rows (condition = 1)");

  std::vector<Dataset> participant_data;
  participant_data.reserve(participants.size());
  for (const auto& id : participants) {
    participant_data.push_back(cohort.filter_participant(id).filter_condition(Condition::kTreated));
  }
  const TrainingSet control_set = control.training_set();

  const auto seeds = config.seed_list();
  const std::size_t n_models = config.models.size();
  const std::size_t n_cells = seeds.size() * participants.size();
  std::vector<CellOutput> outputs(n_cells);

  parallel_for(n_cells, config.n_threads, [&](std::size_t cell) {
    const std::size_t s = cell / participants.size();
    const std::size_t p = cell % participants.size();
    const std::uint64_t seed = seeds[s];
    const Dataset& pdata = participant_data[p];
    const auto split = split_train_test(pdata.size(), config.train_fraction, hash64(seed, 2 * p));

    TrainingSet train;
    train.features = FeatureMatrix(0, feature::kCount);
    for (auto i : split.train) {
      train.features.append_row(pdata.features().row(i));
      train.outcomes.push_back(pdata[i].time_s);
      train.treated.push_back(1);
    }
    for (std::size_t i = 0; i < control_set.size(); ++i) {
      train.features.append_row(control_set.features.row(i));
      train.outcomes.push_back(control_set.outcomes[i]);
      train.treated.push_back(0);
    }

    std::vector<std::size_t> scored;
    std::vector<double> truths;
    CellOutput& out = outputs[cell];
    for (auto i : split.test) {
      try {
        truths.push_back(ground_truth_tau(pdata, control, pdata[i].target, config.ball_radius));
        scored.push_back(i);
      } catch (const UndefinedGroundTruth&) {
        ++out.n_skipped;
      }
    }

    out.models.resize(n_models);
    const std::uint64_t model_seed = hash64(seed, 2 * p + 1);
    for (std::size_t m = 0; m < n_models; ++m) {
      const auto& spec = config.models[m];
      FittedModel model;
      try {
        model = fit_model(spec, train, hash64(model_seed, m));
      } catch (const std::exception& e) {
        throw FitError("model " + spec.name + ", participant " + participants[p] + ", seed " +
                       std::to_string(seed) + ": " + e.what());
      }
      auto& mc = out.models[m];
      mc.truths = truths;
      for (auto i : scored) mc.predictions.push_back(predict(model, pdata.features().row(i)));
    }
  });

  ExperimentReport report;
  report.config_hash = eval_config_hash(config);
  report.seeds = seeds;
  report.participants = participants;
  for (const auto& o : outputs) report.skipped_points += o.n_skipped;

  for (std::size_t m = 0; m < n_models; ++m) {
    ModelSummary summary;
    summary.model = config.models[m].name;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      std::vector<double> subject_mse;
      std::vector<double> pooled_pred;
      std::vector<double> pooled_truth;
      for (std::size_t p = 0; p < participants.size(); ++p) {
        const auto& mc = outputs[s * participants.size() + p].models[m];
        if (mc.predictions.empty()) continue;
        subject_mse.push_back(per_subject_mse(mc.predictions, mc.truths));
        pooled_pred.insert(pooled_pred.end(), mc.predictions.begin(), mc.predictions.end());
        pooled_truth.insert(pooled_truth.end(), mc.truths.begin(), mc.truths.end());
      }
      if (subject_mse.empty()) {
        throw UndefinedGroundTruth("seed " + std::to_string(seeds[s]) +
                                   ": every test point lacks ground truth");
      }
      summary.seed_mse.push_back(mean_and_se(subject_mse).first);
      summary.seed_r2.push_back(aggregated_r2(pooled_pred, pooled_truth));
    }
    std::tie(summary.mse_mean, summary.mse_se) = mean_and_se(summary.seed_mse);
    std::tie(summary.r2_mean, summary.r2_se) = mean_and_se(summary.seed_r2);
    report.models.push_back(std::move(summary));
  }

  for (std::size_t s = 0; s < seeds.size(); ++s) {
    for (std::size_t p = 0; p < participants.size(); ++p) {
      const auto& o = outputs[s * participants.size() + p];
      for (std::size_t m = 0; m < n_models; ++m) {
        const auto& mc = o.models[m];
        CellResult c;
        c.model = config.models[m].name;
        c.participant = participants[p];
        c.seed = seeds[s];
        c.n_test = mc.predictions.size();
        c.n_skipped = o.n_skipped;
        c.mse = mc.predictions.empty() ? std::numeric_limits<double>::quiet_NaN()
                                       : per_subject_mse(mc.predictions, mc.truths);
        report.cells.push_back(std::move(c));
      }
    }
  }
  return report;
}

std::string report_to_text(const ExperimentReport& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-18s %-22s %-22s\n", "model", "MSE (s^2) +/- SE",
                "agg. r2 +/- SE");
  out += line;
  for (const auto& m : report.models) {
    char mse[64];
    char r2[64];
    std::snprintf(mse, sizeof(mse), "%.4f +/- %.4f", m.mse_mean, m.mse_se);
    std::snprintf(r2, sizeof(r2), "%.4f +/- %.4f", m.r2_mean, m.r2_se);
    std::snprintf(line, sizeof(line), "%-18s %-22s %-22s\n", m.model.c_str(), mse, r2);
    out += line;
  }
  std::snprintf(line, sizeof(line), "seeds: %zu  participants: %zu  skipped test points: %zu\n",
                report.seeds.size(), report.participants.size(), report.skipped_points);
  out += line;
  out += "config: " + report.config_hash + "\n";
  return out;
}

}  // namespace reachdiff
