#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "reachdiff/core_model.hpp"
#include "reachdiff/random.hpp"
#include "reachdiff/workspace.hpp"

namespace reachdiff {

// Closed axis-aligned box over (x, y, z).
struct Box {
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};

  bool contains(const ReachTarget& t) const {
    return t.x >= lo[0] && t.x <= hi[0] && t.y >= lo[1] && t.y <= hi[1] && t.z >= lo[2] &&
           t.z <= hi[2];
  }
};

struct DifficultyRegion {
  Box box;
  double tau = 0.0;
};

// Ground-truth extra time for one participant. First matching region wins.
struct DifficultyField {
  std::vector<DifficultyRegion> regions;
  double default_tau = 0.0;

  void validate() const;
};

double true_tau(const DifficultyField& field, const ReachTarget& target);

// Neurotypical reach time: t0 + a·|target| + b·z + N(0, sigma²).
struct NominalTimeModel {
  double t0 = 0.8;
  double a = 2.0;
  double b = 1.0;
  double sigma = 0.3;

  void validate() const;
  double expected(const ReachTarget& target) const;
};

// Missed-cue outliers: with probability p the reach is delayed by U(lo, hi).
struct DistractionModel {
  double p = 0.05;
  double delay_lo = 1.0;
  double delay_hi = 3.0;

  void validate() const;
};

inline constexpr double kMinReachTime = 0.05;

// Draw order: noise, outlier coin, then the delay if the coin came up.
// The result is clamped to at least kMinReachTime.
double simulate_reach(const NominalTimeModel& nominal, const DistractionModel& distraction,
                      const DifficultyField* field, const ReachTarget& target, Rng& rng);

struct CohortSpec {
  std::size_t n_neurotypical = 10;
  std::size_t n_post_stroke = 15;
  std::size_t sessions_per_stroke = 3;
  std::size_t reaches_per_session = 100;
  WorkspaceSpec workspace;
  GridCounts grid;
  NominalTimeModel nominal;
  DistractionModel distraction;
  // Post-stroke participant i uses fields[i % fields.size()].
  std::vector<DifficultyField> fields;
  std::uint64_t seed = 0;

  void validate() const;
  const DifficultyField& field_for(std::size_t participant) const {
    return fields[participant % fields.size()];
  }
};

// Two regions: 2.0 s at z >= 0.25 m, 0.5 s elsewhere.
DifficultyField default_field();

// The bundled benchmark cohort with default_field() for every participant.
CohortSpec default_cohort_spec();

std::string neurotypical_id(std::size_t index);
std::string post_stroke_id(std::size_t index);

// Neurotypical participants first (one session each, condition 0), then
// post-stroke participants (condition 1). Each session walks freshly
// shuffled passes over the workspace grid; cues are uniform over the four levels.
Dataset generate_cohort(const CohortSpec& spec);

}  // namespace reachdiff
