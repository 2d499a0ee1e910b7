#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "reachdiff/causal_tree.hpp"
#include "reachdiff/model.hpp"
#include "reachdiff/workspace.hpp"

namespace reachdiff {

struct HeatmapRow {
  ReachTarget target;
  double tau_hat = 0.0;
};

// Model evaluated over generate_grid(spec, resolution) with a fixed cue.
std::vector<HeatmapRow> heatmap(const FittedModel& model, const WorkspaceSpec& spec,
                                const GridCounts& resolution, Cue cue = Cue::kMove);

// CSV with header `x,y,z,tau_hat`.
std::string heatmap_to_csv(const std::vector<HeatmapRow>& rows);

// Graphviz DOT view of a causal tree truncated at `max_depth`. Internal
// nodes read "feature < threshold"; terminal nodes show the (aggregated)
// estimate and estimation-half arm counts. Fill gets darker as tau_hat grows.
std::string tree_to_dot(const CausalTree& tree, std::size_t max_depth);

}  // namespace reachdiff
