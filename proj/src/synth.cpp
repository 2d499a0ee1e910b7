#include "reachdiff/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "reachdiff/errors.hpp"

namespace reachdiff {

namespace {

std::string participant_id(char prefix, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%02zu", prefix, index + 1);
  return buf;
}

}  // namespace

void DifficultyField::validate() const {
  if (!(default_tau >= 0.0) || !std::isfinite(default_tau)) {
    throw ValidationError("difficulty field: default_tau must be finite and >= 0");
  }
  for (const auto& r : regions) {
    if (!(r.tau >= 0.0) || !std::isfinite(r.tau)) {
      throw ValidationError("difficulty field: region tau must be finite and >= 0");
    }
  }
}

double true_tau(const DifficultyField& field, const ReachTarget& target) {
  for (const auto& r : field.regions) {
    if (r.box.contains(target)) return r.tau;
  }
  return field.default_tau;
}

void NominalTimeModel::validate() const {
  if (!(t0 > 0.0)) throw ValidationError("nominal model: t0 must be > 0");
  if (!(sigma >= 0.0)) throw ValidationError("nominal model: sigma must be >= 0");
}

double NominalTimeModel::expected(const ReachTarget& target) const {
  const double dist = std::sqrt(target.x * target.x + target.y * target.y + target.z * target.z);
  return t0 + a * dist + b * target.z;
}

void DistractionModel::validate() const {
  if (!(p >= 0.0 && p < 1.0)) throw ValidationError("distraction: p must lie in [0, 1)");
  if (!(delay_lo <= delay_hi)) throw ValidationError("distraction: need delay lo <= hi");
}

double simulate_reach(const NominalTimeModel& nominal, const DistractionModel& distraction,
                      const DifficultyField* field, const ReachTarget& target, Rng& rng) {
  double time = nominal.expected(target) + nominal.sigma * rng.normal();
  if (field != nullptr) time += true_tau(*field, target);
  if (rng.bernoulli(distraction.p)) time += rng.uniform(distraction.delay_lo, distraction.delay_hi);
  return std::max(time, kMinReachTime);
}

void CohortSpec::validate() const {
  if (n_neurotypical < 1 || n_post_stroke < 1 || sessions_per_stroke < 1 ||
      reaches_per_session < 1) {
    throw ValidationError("cohort: counts must be >= 1");
  }
  if (grid.total() == 0) throw ValidationError("cohort: grid counts must be >= 1");
  workspace.validate();
  nominal.validate();
  distraction.validate();
  if (fields.empty()) throw ValidationError("cohort: at least one difficulty field is required");
  for (const auto& f : fields) f.validate();
  for (const auto& t : generate_grid(workspace, grid)) {
    if (!(nominal.expected(t) > 0.0)) {
      throw ValidationError("cohort: nominal time must be positive over the workspace");
    }
  }
}

DifficultyField default_field() {
  DifficultyField field;
  field.default_tau = 0.5;
  field.regions.push_back({Box{{-1.0, -1.0, 0.25}, {1.0, 1.0, 1.0}}, 2.0});
  return field;
}

CohortSpec default_cohort_spec() {
  CohortSpec spec;
  spec.fields.push_back(default_field());
  return spec;
}

std::string neurotypical_id(std::size_t index) { return participant_id('N', index); }
std::string post_stroke_id(std::size_t index) { return participant_id('S', index); }

Dataset generate_cohort(const CohortSpec& spec) {
  spec.validate();
  const auto grid = generate_grid(spec.workspace, spec.grid);
  Rng rng(spec.seed);
  std::vector<ReachRecord> records;
  records.reserve(spec.n_neurotypical * spec.reaches_per_session +
                  spec.n_post_stroke * spec.sessions_per_stroke * spec.reaches_per_session);

  auto run_session = [&](const std::string& id, int session, Condition condition,
                         const DifficultyField* field) {
    std::vector<std::size_t> order;
    for (std::size_t trial = 0; trial < spec.reaches_per_session; ++trial) {
      if (trial % grid.size() == 0) {
        order.resize(grid.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(std::span(order));
      }
      const auto& target = grid[order[trial % grid.size()]];
      ReachRecord r;
      r.participant_id = id;
      r.session = session;
      r.trial = static_cast<int>(trial + 1);
      r.target = target;
      r.cue = static_cast<Cue>(rng.uniform_index(kNumCues));
      r.time_s = simulate_reach(spec.nominal, spec.distraction, field, target, rng);
      r.condition = condition;
      records.push_back(std::move(r));
    }
  };

  for (std::size_t p = 0; p < spec.n_neurotypical; ++p) {
    run_session(neurotypical_id(p), 1, Condition::kControl, nullptr);
  }
  for (std::size_t p = 0; p < spec.n_post_stroke; ++p) {
    for (std::size_t s = 0; s < spec.sessions_per_stroke; ++s) {
      run_session(post_stroke_id(p), static_cast<int>(s + 1), Condition::kTreated,
                  &spec.field_for(p));
    }
  }
  return Dataset(std::move(records));
}

}  // namespace reachdiff
