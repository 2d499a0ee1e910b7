#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "reachdiff/core_model.hpp"

namespace reachdiff {

// Half-annular reaching region in front of the home position. The arc is
// centered on the forward (+y) axis; angles are measured from +x.
struct WorkspaceSpec {
  double r_min = 0.10;
  double r_max = 0.30;
  double arc = std::numbers::pi;
  double z_min = 0.0;
  double z_max = 0.40;

  // Throws ValidationError unless 0 < r_min < r_max, 0 < arc <= 2π, z_min < z_max.
  void validate() const;

  double arc_start() const { return std::numbers::pi / 2 - arc / 2; }
};

struct GridCounts {
  std::size_t n_r = 5;
  std::size_t n_theta = 5;
  std::size_t n_z = 4;

  std::size_t total() const { return n_r * n_theta * n_z; }
};

// Cylindrical lattice, r-major then θ then z. Endpoints of every span are
// included; a count of 1 places the single sample at the lower bound.
std::vector<ReachTarget> generate_grid(const WorkspaceSpec& spec, const GridCounts& counts);

// Inclusive on every boundary.
bool contains(const WorkspaceSpec& spec, const ReachTarget& p);

double distance(const ReachTarget& a, const ReachTarget& b);

// Indices of records within `radius` of `center` (inclusive), in record order.
std::vector<std::size_t> ball_query_indices(std::span<const ReachRecord> records,
                                            const ReachTarget& center, double radius);

std::vector<ReachRecord> ball_query(const Dataset& dataset, const ReachTarget& center,
                                    double radius);

}  // namespace reachdiff
