#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "reachdiff/core_model.hpp"
#include "reachdiff/random.hpp"

namespace reachdiff::testing {

inline std::string tmp_path(const std::string& name) {
  const char* dir = std::getenv("REACHDIFF_TMP");
  const std::filesystem::path base = dir ? dir : std::filesystem::temp_directory_path();
  return (base / name).string();
}

// Rows of `cols` features drawn uniformly from [0, 1).
inline TrainingSet random_training_set(std::size_t n, std::size_t cols, Rng& rng) {
  TrainingSet d;
  d.features = FeatureMatrix(n, cols);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < cols; ++c) d.features(i, c) = rng.uniform01();
    d.treated.push_back(i % 2 == 0 ? 1 : 0);
    d.outcomes.push_back(0.0);
  }
  return d;
}

// One feature on an even grid in [0, 1). Treated outcome 1.0 below 0.5 and
// 3.0 above, control 0, optional Gaussian noise on every row.
inline TrainingSet step_dataset(std::size_t n_per_arm, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  TrainingSet d;
  d.features = FeatureMatrix(2 * n_per_arm, 1);
  for (std::size_t arm = 0; arm < 2; ++arm) {
    for (std::size_t i = 0; i < n_per_arm; ++i) {
      const std::size_t r = arm * n_per_arm + i;
      const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(n_per_arm);
      d.features(r, 0) = x;
      const double base = arm == 1 ? (x < 0.5 ? 1.0 : 3.0) : 0.0;
      d.outcomes.push_back(base + sigma * rng.normal());
      d.treated.push_back(static_cast<std::uint8_t>(arm));
    }
  }
  return d;
}

inline ReachRecord record(std::string id, Condition c, ReachTarget t, double time,
                          Cue cue = Cue::kMove) {
  ReachRecord r;
  r.participant_id = std::move(id);
  r.condition = c;
  r.target = t;
  r.time_s = time;
  r.cue = cue;
  return r;
}

}  // namespace reachdiff::testing
