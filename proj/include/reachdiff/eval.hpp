#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "reachdiff/core_model.hpp"
#include "reachdiff/model.hpp"

namespace reachdiff {

// Mean participant time minus mean control time over reaches whose targets
// lie within `radius` of `center`. Throws UndefinedGroundTruth when either
// ball is empty.
double ground_truth_tau(std::span<const ReachRecord> participant,
                        std::span<const ReachRecord> control, const ReachTarget& center,
                        double radius);
double ground_truth_tau(const Dataset& participant, const Dataset& control,
                        const ReachTarget& center, double radius);

struct TrainTestSplit {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

// Uniform random partition of row indices [0, n): ⌈fraction · n⌉ train rows.
// Throws ValidationError for n < 5 or fraction outside (0, 1).
TrainTestSplit split_train_test(std::size_t n, double train_fraction, std::uint64_t seed);

double per_subject_mse(std::span<const double> predictions, std::span<const double> truths);

// 1 - SS_res / SS_tot over pooled values. Throws UndefinedMetric for constant truths.
double aggregated_r2(std::span<const double> predictions, std::span<const double> truths);

// Sample mean and standard error (stdev / sqrt(n)); SE is 0 for a single value.
std::pair<double, double> mean_and_se(std::span<const double> values);

struct EvalConfig {
  double train_fraction = 0.8;
  double ball_radius = 0.05;
  std::size_t n_seeds = 20;
  std::uint64_t seed = 0;
  std::vector<ModelSpec> models;
  // Cell-level workers; 0 picks hardware concurrency. Does not affect results.
  std::size_t n_threads = 1;

  void validate() const;
  // Seed values in run order: seed, seed + 1, ...
  std::vector<std::uint64_t> seed_list() const;
};

struct CellResult {
  std::string model;
  std::string participant;
  std::uint64_t seed = 0;
  // NaN when every test point of the cell was skipped.
  double mse = 0.0;
  std::size_t n_test = 0;
  std::size_t n_skipped = 0;
};

struct ModelSummary {
  std::string model;
  double mse_mean = 0.0;
  double mse_se = 0.0;
  double r2_mean = 0.0;
  double r2_se = 0.0;
  std::vector<double> seed_mse;  // mean per-subject MSE for each seed
  std::vector<double> seed_r2;   // pooled r² for each seed
};

struct ExperimentReport {
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> participants;
  std::vector<ModelSummary> models;
  std::vector<CellResult> cells;  // seed-major, then participant, then model
  std::size_t skipped_points = 0;

  const ModelSummary& summary(std::string_view model) const;
};

// For each seed and treated participant: split that participant's rows,
// fit every model on train ∪ all control rows, and score predictions at the
// test reaches against ground_truth_tau over the participant's full data.
ExperimentReport run_experiment(const EvalConfig& config, const Dataset& cohort);

std::string report_to_json(const ExperimentReport& report);
std::string report_to_text(const ExperimentReport& report);

}  // namespace reachdiff
