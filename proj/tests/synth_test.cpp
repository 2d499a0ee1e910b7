#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "reachdiff/errors.hpp"
#include "reachdiff/synth.hpp"

using namespace reachdiff;

namespace {

NominalTimeModel quiet_nominal() {
  NominalTimeModel m;
  m.sigma = 0.0;
  return m;
}

DistractionModel no_distraction() {
  DistractionModel d;
  d.p = 0.0;
  return d;
}

// Target with |target| = 0.2 and z = 0.1.
ReachTarget dist02_z01() { return {0.0, std::sqrt(0.04 - 0.01), 0.1}; }

TEST(TrueTau, EmptyRegionsUseDefault) {
  DifficultyField f;
  f.default_tau = 0.7;
  EXPECT_EQ(true_tau(f, {0, 0.2, 0.1}), 0.7);
  EXPECT_EQ(true_tau(f, {-0.3, 0.0, 0.4}), 0.7);
}

TEST(TrueTau, ContainmentAndPrecedence) {
  DifficultyField f;
  f.default_tau = 0.1;
  f.regions.push_back({Box{{-1, -1, 0.2}, {1, 1, 0.4}}, 1.5});
  f.regions.push_back({Box{{-1, -1, 0.0}, {1, 1, 0.4}}, 9.0});
  EXPECT_EQ(true_tau(f, {0, 0.2, 0.3}), 1.5);  // first of two overlapping boxes
  EXPECT_EQ(true_tau(f, {0, 0.2, 0.1}), 9.0);
  EXPECT_EQ(true_tau(f, {0, 0.2, 0.5}), 0.1);
}

TEST(TrueTau, DefaultField) {
  const DifficultyField f = default_field();
  EXPECT_EQ(true_tau(f, {0, 0.2, 0.25}), 2.0);
  EXPECT_EQ(true_tau(f, {0, 0.2, 0.4}), 2.0);
  EXPECT_EQ(true_tau(f, {0, 0.2, 0.24}), 0.5);
  EXPECT_EQ(true_tau(f, {0.3, 0.0, 0.0}), 0.5);
}

TEST(Simulate, NoiseFreeHandArithmetic) {
  Rng rng(1);
  const ReachTarget t = dist02_z01();
  EXPECT_NEAR(simulate_reach(quiet_nominal(), no_distraction(), nullptr, t, rng), 1.3, 1e-12);
  DifficultyField f;
  f.default_tau = 2.0;
  EXPECT_NEAR(simulate_reach(quiet_nominal(), no_distraction(), &f, t, rng), 3.3, 1e-12);
}

TEST(Simulate, ForcedOutlier) {
  Rng rng(2);
  DistractionModel d;
  d.p = 1.0;
  d.delay_lo = d.delay_hi = 1.0;
  EXPECT_NEAR(simulate_reach(quiet_nominal(), d, nullptr, dist02_z01(), rng), 2.3, 1e-12);
}

TEST(Simulate, ClampedBelow) {
  NominalTimeModel m;
  m.t0 = 0.01;
  m.a = m.b = 0.0;
  m.sigma = 0.0;
  Rng rng(3);
  EXPECT_EQ(simulate_reach(m, no_distraction(), nullptr, {0, 0.2, 0}, rng), kMinReachTime);
  m.sigma = 5.0;
  for (int i = 0; i < 1000; ++i) {
    EXPECT_GE(simulate_reach(m, no_distraction(), nullptr, {0, 0.2, 0}, rng), kMinReachTime);
  }
}

TEST(Simulate, OutlierFrequencyMatchesP) {
  NominalTimeModel m = quiet_nominal();
  DistractionModel d;
  d.p = 0.05;
  d.delay_lo = 1.0;
  d.delay_hi = 3.0;
  Rng rng(4);
  const int n = 20000;
  int outliers = 0;
  const ReachTarget t = dist02_z01();
  for (int i = 0; i < n; ++i) {
    const double time = simulate_reach(m, d, nullptr, t, rng);
    if (time > 1.3 + 0.5) {
      ++outliers;
      EXPECT_GE(time, 1.3 + 1.0 - 1e-12);
      EXPECT_LE(time, 1.3 + 3.0 + 1e-12);
    }
  }
  const double sd = std::sqrt(n * d.p * (1 - d.p));
  EXPECT_LE(std::abs(outliers - n * d.p), 4 * sd);
}

TEST(Simulate, NoiseScale) {
  NominalTimeModel m;
  m.sigma = 0.3;
  Rng rng(5);
  const int n = 20000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double e = simulate_reach(m, no_distraction(), nullptr, dist02_z01(), rng) - 1.3;
    sum += e;
    sq += e * e;
  }
  EXPECT_NEAR(sum / n, 0.0, 4 * 0.3 / std::sqrt(n));
  EXPECT_NEAR(std::sqrt(sq / n), 0.3, 0.01);
}

TEST(CohortSpec, Validate) {
  EXPECT_NO_THROW(default_cohort_spec().validate());
  CohortSpec s = default_cohort_spec();
  s.n_post_stroke = 0;
  EXPECT_THROW(s.validate(), ValidationError);
  s = default_cohort_spec();
  s.distraction.p = 1.0;
  EXPECT_THROW(s.validate(), ValidationError);
  s = default_cohort_spec();
  s.distraction.delay_lo = 4.0;
  EXPECT_THROW(s.validate(), ValidationError);
  s = default_cohort_spec();
  s.fields.clear();
  EXPECT_THROW(s.validate(), ValidationError);
  s = default_cohort_spec();
  s.nominal.t0 = 0.0;
  EXPECT_THROW(s.validate(), ValidationError);
  s = default_cohort_spec();
  s.fields[0].default_tau = -1.0;
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(Cohort, DefaultSizesAndLayout) {
  const Dataset d = generate_cohort(default_cohort_spec());
  ASSERT_EQ(d.size(), 1000u + 4500u);
  EXPECT_EQ(d.filter_condition(Condition::kControl).size(), 1000u);
  EXPECT_EQ(d.filter_condition(Condition::kTreated).size(), 4500u);
  EXPECT_EQ(d[0].participant_id, "N01");
  EXPECT_EQ(d[999].participant_id, "N10");
  EXPECT_EQ(d[1000].participant_id, "S01");
  EXPECT_EQ(d[5499].participant_id, "S15");
  EXPECT_EQ(d.treated_participants().size(), 15u);
  for (const auto& id : d.treated_participants()) {
    const Dataset p = d.filter_participant(id);
    EXPECT_EQ(p.size(), 300u);
    std::map<int, int> per_session;
    for (const auto& r : p) per_session[r.session]++;
    EXPECT_EQ(per_session, (std::map<int, int>{{1, 100}, {2, 100}, {3, 100}}));
  }
  std::map<Cue, int> cues;
  for (const auto& r : d) {
    EXPECT_TRUE(contains(WorkspaceSpec{}, r.target));
    EXPECT_GT(r.time_s, 0.0);
    EXPECT_NO_THROW(validate(r));
    cues[r.cue]++;
  }
  for (Cue c : kAllCues) EXPECT_NEAR(cues[c], 5500 / 4.0, 4 * std::sqrt(5500 * 0.1875));
}

TEST(Cohort, EachSessionVisitsEveryGridPointOnce) {
  const Dataset d = generate_cohort(default_cohort_spec());
  const auto grid = generate_grid(WorkspaceSpec{}, GridCounts{});
  std::map<std::pair<std::string, int>, std::map<std::size_t, int>> visits;
  for (const auto& r : d) {
    std::size_t k = 0;
    while (!(grid[k] == r.target)) ++k;
    visits[{r.participant_id, r.session}][k]++;
  }
  EXPECT_EQ(visits.size(), 10u + 45u);
  for (const auto& [key, counts] : visits) {
    EXPECT_EQ(counts.size(), 100u);
    for (const auto& [k, c] : counts) EXPECT_EQ(c, 1);
  }
}

TEST(Cohort, Deterministic) {
  CohortSpec s = default_cohort_spec();
  s.seed = 77;
  EXPECT_EQ(generate_cohort(s), generate_cohort(s));
  CohortSpec t = s;
  t.seed = 78;
  EXPECT_FALSE(generate_cohort(s) == generate_cohort(t));
}

TEST(Cohort, NoiseFreeIdentity) {
  CohortSpec s = default_cohort_spec();
  s.nominal.sigma = 0.0;
  s.distraction.p = 0.0;
  const Dataset d = generate_cohort(s);
  std::map<std::tuple<double, double, double>, std::pair<double, int>> control;
  for (const auto& r : d) {
    if (r.treated()) continue;
    auto& [sum, n] = control[{r.target.x, r.target.y, r.target.z}];
    sum += r.time_s;
    ++n;
  }
  for (const auto& r : d) {
    if (!r.treated()) continue;
    const auto& [sum, n] = control.at({r.target.x, r.target.y, r.target.z});
    EXPECT_NEAR(r.time_s - sum / n, true_tau(default_field(), r.target), 1e-12);
  }
}

TEST(Cohort, FieldsCycleOverParticipants) {
  CohortSpec s = default_cohort_spec();
  s.nominal.sigma = 0.0;
  s.distraction.p = 0.0;
  s.n_post_stroke = 3;
  DifficultyField flat;
  flat.default_tau = 1.0;
  s.fields.push_back(flat);
  const Dataset d = generate_cohort(s);
  const NominalTimeModel& m = s.nominal;
  for (const auto& r : d) {
    if (!r.treated()) continue;
    const DifficultyField& f = r.participant_id == "S02" ? flat : s.fields[0];
    EXPECT_NEAR(r.time_s - m.expected(r.target), true_tau(f, r.target), 1e-12);
  }
}

TEST(Ids, Format) {
  EXPECT_EQ(neurotypical_id(0), "N01");
  EXPECT_EQ(post_stroke_id(14), "S15");
  EXPECT_EQ(post_stroke_id(99), "S100");
}

}  // namespace
