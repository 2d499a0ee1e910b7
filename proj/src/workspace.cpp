#include "reachdiff/workspace.hpp"

#include <cmath>

#include "reachdiff/errors.hpp"

namespace reachdiff {

namespace {

// Slack for points generated on the arc/radius boundary by cos/sin.
constexpr double kBoundaryTol = 1e-12;

double lattice(double lo, double hi, std::size_t i, std::size_t n) {
  if (n == 1) return lo;
  if (i + 1 == n) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

}  // namespace

void WorkspaceSpec::validate() const {
  if (!(0.0 < r_min && r_min < r_max)) throw ValidationError("workspace: need 0 < r_min < r_max");
  if (!(0.0 < arc && arc <= 2.0 * std::numbers::pi)) {
    throw ValidationError("workspace: need 0 < arc <= 360 degrees");
  }
  if (!(z_min < z_max)) throw ValidationError("workspace: need z_min < z_max");
}

std::vector<ReachTarget> generate_grid(const WorkspaceSpec& spec, const GridCounts& counts) {
  spec.validate();
  if (counts.n_r == 0 || counts.n_theta == 0 || counts.n_z == 0) {
    throw ValidationError("generate_grid: every count must be >= 1");
  }
  // A full circle would repeat its first angle at the end.
  const bool full_circle = spec.arc >= 2.0 * std::numbers::pi;
  const std::size_t theta_slots = full_circle ? counts.n_theta + 1 : counts.n_theta;

  std::vector<ReachTarget> points;
  points.reserve(counts.total());
  for (std::size_t ir = 0; ir < counts.n_r; ++ir) {
    const double r = lattice(spec.r_min, spec.r_max, ir, counts.n_r);
    for (std::size_t it = 0; it < counts.n_theta; ++it) {
      const double theta =
          spec.arc_start() + lattice(0.0, spec.arc, it, theta_slots);
      for (std::size_t iz = 0; iz < counts.n_z; ++iz) {
        points.push_back({r * std::cos(theta), r * std::sin(theta),
                          lattice(spec.z_min, spec.z_max, iz, counts.n_z)});
      }
    }
  }
  return points;
}

bool contains(const WorkspaceSpec& spec, const ReachTarget& p) {
  if (!(p.z >= spec.z_min && p.z <= spec.z_max)) return false;
  const double r = std::hypot(p.x, p.y);
  if (r < spec.r_min - kBoundaryTol || r > spec.r_max + kBoundaryTol) return false;
  if (spec.arc >= 2.0 * std::numbers::pi) return true;
  // Angular offset from the forward axis, in [-π, π].
  const double offset = std::atan2(p.x, p.y);
  return std::abs(offset) <= spec.arc / 2 + kBoundaryTol;
}

double distance(const ReachTarget& a, const ReachTarget& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::vector<std::size_t> ball_query_indices(std::span<const ReachRecord> records,
                                            const ReachTarget& center, double radius) {
  if (!(radius > 0.0)) throw ValidationError("ball_query: radius must be > 0");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (distance(records[i].target, center) <= radius) out.push_back(i);
  }
  return out;
}

std::vector<ReachRecord> ball_query(const Dataset& dataset, const ReachTarget& center,
                                    double radius) {
  std::vector<ReachRecord> out;
  for (auto i : ball_query_indices(dataset.records(), center, radius)) out.push_back(dataset[i]);
  return out;
}

}  // namespace reachdiff
