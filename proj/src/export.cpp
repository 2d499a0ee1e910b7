#include "reachdiff/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace reachdiff {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Light gray for the easiest node, near-black for the hardest.
std::string fill_color(double tau, double lo, double hi) {
  const double t = hi > lo ? (tau - lo) / (hi - lo) : 0.0;
  const int level = static_cast<int>(std::lround(235.0 - 200.0 * t));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", level, level, level);
  return buf;
}

}  // namespace

std::vector<HeatmapRow> heatmap(const FittedModel& model, const WorkspaceSpec& spec,
                                const GridCounts& resolution, Cue cue) {
  std::vector<HeatmapRow> rows;
  for (const auto& t : generate_grid(spec, resolution)) {
    rows.push_back({t, predict(model, featurize(t, cue))});
  }
  return rows;
}

std::string heatmap_to_csv(const std::vector<HeatmapRow>& rows) {
  std::string out = "x,y,z,tau_hat\n";
  for (const auto& r : rows) {
    out += format_double(r.target.x) + "," + format_double(r.target.y) + "," +
           format_double(r.target.z) + "," + format_double(r.tau_hat) + "\n";
  }
  return out;
}

std::string tree_to_dot(const CausalTree& tree, std::size_t max_depth) {
  const auto& nodes = tree.nodes();
  struct Shown {
    int node;
    bool terminal;
    double tau;
    std::size_t n_treated;
    std::size_t n_control;
  };
  std::vector<Shown> shown;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  std::function<std::pair<std::size_t, std::size_t>(int)> arm_counts = [&](int n) {
    if (nodes[n].is_leaf()) return std::pair{nodes[n].n_treated_est, nodes[n].n_control_est};
    const auto l = arm_counts(nodes[n].left);
    const auto r = arm_counts(nodes[n].right);
    return std::pair{l.first + r.first, l.second + r.second};
  };
  std::function<std::size_t(int, std::size_t)> walk = [&](int n, std::size_t depth) {
    const std::size_t id = shown.size();
    const bool terminal = nodes[n].is_leaf() || depth == max_depth;
    const auto [treated, control] = arm_counts(n);
    shown.push_back({n, terminal, tree.aggregate(n).first, treated, control});
    if (!terminal) {
      edges.emplace_back(id, shown.size());
      walk(nodes[n].left, depth + 1);
      edges.emplace_back(id, shown.size());
      walk(nodes[n].right, depth + 1);
    }
    return id;
  };
  walk(0, 0);

  double lo = shown.front().tau;
  double hi = shown.front().tau;
  for (const auto& s : shown) {
    lo = std::min(lo, s.tau);
    hi = std::max(hi, s.tau);
  }

  std::string out = "digraph causal_tree {\n";
  out += "  node [shape=box, style=\"rounded,filled\", fontname=\"Helvetica\"];\n";
  for (std::size_t i = 0; i < shown.size(); ++i) {
    const auto& s = shown[i];
    std::string label;
    if (s.terminal) {
      label = "tau = " + fixed(s.tau, 3) + " s\\nn_treated = " + std::to_string(s.n_treated) +
              ", n_control = " + std::to_string(s.n_control);
    } else {
      const auto& rule = nodes[s.node].rule;
      label = std::string(rule.feature < feature::kCount ? feature_name(rule.feature)
                                                         : "f" + std::to_string(rule.feature)) +
              " < " + fixed(rule.threshold, 3) + "\\ntau = " + fixed(s.tau, 3) + " s";
    }
    const double level = hi > lo ? (s.tau - lo) / (hi - lo) : 0.0;
    out += "  n" + std::to_string(i) + " [label=\"" + label + "\", fillcolor=\"" +
           fill_color(s.tau, lo, hi) + "\"" + (level > 0.5 ? ", fontcolor=\"white\"" : "") +
           "];\n";
  }
  for (const auto& [from, to] : edges) {
    out += "  n" + std::to_string(from) + " -> n" + std::to_string(to) + ";\n";
  }
  out += "}\n";
  return out;
}

}  // namespace reachdiff
