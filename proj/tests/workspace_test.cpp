#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "reachdiff/errors.hpp"
#include "reachdiff/workspace.hpp"
#include "test_support.hpp"

using namespace reachdiff;
using reachdiff::testing::record;

namespace {

TEST(WorkspaceSpec, Validate) {
  EXPECT_NO_THROW(WorkspaceSpec{}.validate());
  WorkspaceSpec s;
  s.r_min = 0.3;
  EXPECT_THROW(s.validate(), ValidationError);
  s = {};
  s.arc = 0.0;
  EXPECT_THROW(s.validate(), ValidationError);
  s.arc = 2 * std::numbers::pi + 0.1;
  EXPECT_THROW(s.validate(), ValidationError);
  s = {};
  s.z_max = s.z_min;
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(Grid, DefaultHundredDistinctContained) {
  const auto pts = generate_grid(WorkspaceSpec{}, {5, 5, 4});
  ASSERT_EQ(pts.size(), 100u);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_TRUE(contains(WorkspaceSpec{}, pts[i]));
    for (std::size_t j = i + 1; j < pts.size(); ++j) EXPECT_GT(distance(pts[i], pts[j]), 1e-9);
  }
  EXPECT_EQ(pts, generate_grid(WorkspaceSpec{}, {5, 5, 4}));
}

TEST(Grid, SinglePointAtLowerBounds) {
  const WorkspaceSpec s;
  const auto pts = generate_grid(s, {1, 1, 1});
  ASSERT_EQ(pts.size(), 1u);
  // Arc starts at θ = 0 (the +x axis) for a 180° arc.
  EXPECT_NEAR(pts[0].x, s.r_min, 1e-15);
  EXPECT_NEAR(pts[0].y, 0.0, 1e-15);
  EXPECT_EQ(pts[0].z, s.z_min);
}

TEST(Grid, LatticeOrderAndSpacing) {
  const WorkspaceSpec s;
  const auto pts = generate_grid(s, {5, 5, 4});
  // z varies fastest, then θ, then r.
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(pts[k].z, 0.4 * k / 3.0, 1e-15);
  for (std::size_t ri = 0; ri < 5; ++ri) {
    for (std::size_t ti = 0; ti < 5; ++ti) {
      const auto& p = pts[(ri * 5 + ti) * 4];
      const double r = std::hypot(p.x, p.y);
      const double theta = std::atan2(p.y, p.x);
      EXPECT_NEAR(r, 0.1 + 0.05 * ri, 1e-12);
      EXPECT_NEAR(theta, std::numbers::pi * ti / 4.0, 1e-12);
    }
  }
}

TEST(Grid, RejectsZeroCounts) {
  EXPECT_THROW(generate_grid(WorkspaceSpec{}, {0, 5, 4}), ValidationError);
  EXPECT_THROW(generate_grid(WorkspaceSpec{}, {5, 0, 4}), ValidationError);
  EXPECT_THROW(generate_grid(WorkspaceSpec{}, {5, 5, 0}), ValidationError);
}

TEST(Grid, NarrowArcStaysContained) {
  WorkspaceSpec s;
  s.arc = std::numbers::pi / 3;
  for (const auto& p : generate_grid(s, {3, 7, 2})) EXPECT_TRUE(contains(s, p));
}

TEST(Contains, HandExamples) {
  const WorkspaceSpec s;
  EXPECT_TRUE(contains(s, {0, 0.20, 0.10}));
  EXPECT_FALSE(contains(s, {0, 0.05, 0.10}));
  EXPECT_FALSE(contains(s, {0, 0.20, 0.50}));
  EXPECT_FALSE(contains(s, {0, -0.20, 0.10}));  // behind the home position
  EXPECT_TRUE(contains(s, {0.30, 0.0, 0.0}));   // boundary corner, inclusive
  EXPECT_TRUE(contains(s, {-0.10, 0.0, 0.40}));
  EXPECT_FALSE(contains(s, {0.31, 0.0, 0.0}));
}

TEST(BallQuery, HandExamples) {
  const std::vector<ReachRecord> recs{
      record("a", Condition::kTreated, {0, 0.24, 0.1}, 1.0),
      record("b", Condition::kTreated, {0, 0.26, 0.1}, 1.0),
      record("c", Condition::kTreated, {0, 0.20, 0.1}, 1.0),
  };
  const ReachTarget center{0, 0.20, 0.1};
  // 0.04 away (in), 0.06 away (out), exact hit (in).
  EXPECT_EQ(ball_query_indices(recs, center, 0.05), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(ball_query_indices(recs, center, 1e-9), (std::vector<std::size_t>{2}));
  EXPECT_EQ(ball_query_indices(recs, center, 10.0), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_THROW(ball_query_indices(recs, center, 0.0), ValidationError);
  EXPECT_EQ(ball_query(Dataset(recs), center, 0.05).size(), 2u);
}

TEST(BallQuery, MonotoneInRadius) {
  Rng rng(21);
  std::vector<ReachRecord> recs;
  for (int i = 0; i < 300; ++i) {
    recs.push_back(record("p", Condition::kControl,
                          {rng.uniform(-0.3, 0.3), rng.uniform(0, 0.3), rng.uniform(0, 0.4)}, 1.0));
  }
  for (int trial = 0; trial < 200; ++trial) {
    const ReachTarget c{rng.uniform(-0.3, 0.3), rng.uniform(0, 0.3), rng.uniform(0, 0.4)};
    double r1 = rng.uniform(1e-6, 0.3);
    double r2 = rng.uniform(1e-6, 0.3);
    if (r1 > r2) std::swap(r1, r2);
    const auto a = ball_query_indices(recs, c, r1);
    const auto b = ball_query_indices(recs, c, r2);
    EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    // Brute-force membership.
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const bool in = distance(recs[i].target, c) <= r2;
      EXPECT_EQ(in, std::binary_search(b.begin(), b.end(), i));
    }
  }
}

}  // namespace
