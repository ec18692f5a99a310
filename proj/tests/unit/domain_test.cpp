#include <gtest/gtest.h>

#include <random>

#include "support/fixtures.hpp"
#include "trajpred/core/domain.hpp"
#include "trajpred/core/error.hpp"

namespace trajpred {
namespace {

Trajectory from_points(const std::vector<Vec2>& pts) {
  Trajectory t{"a", {}, kDefaultDt};
  for (std::size_t k = 0; k < pts.size(); ++k) {
    AgentState s;
    s.x = pts[k].x;
    s.y = pts[k].y;
    s.timestep_index = static_cast<std::int64_t>(k);
    t.states.push_back(s);
  }
  return t;
}

TEST(DeriveActions, FiniteDifference) {
  const auto a = derive_actions(from_points({{0, 0}, {1, 0}, {1, 2}}));
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0], (Action{1, 0}));
  EXPECT_EQ(a[1], (Action{0, 2}));
}

TEST(DeriveActions, ZeroMotion) {
  const auto a = derive_actions(from_points({{5, 5}, {5, 5}, {5, 5}, {5, 5}}));
  ASSERT_EQ(a.size(), 3u);
  for (const auto& x : a) EXPECT_EQ(x, (Action{0, 0}));
}

TEST(DeriveActions, TooShortThrows) {
  EXPECT_THROW(derive_actions(from_points({{0, 0}})), InvalidInput);
}

TEST(DeriveActions, RandomWalkRoundTripIsExact) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> step(-8, 8);
  // Multiples of 1/8 keep every partial sum exactly representable.
  std::vector<Vec2> pts{{0.0, 0.0}};
  for (int k = 0; k < 19; ++k) pts.push_back({pts.back().x + step(rng) / 8.0, pts.back().y + step(rng) / 8.0});
  const auto traj = from_points(pts);
  const auto rec = reconstruct_positions(pts.front(), derive_actions(traj));
  ASSERT_EQ(rec.size(), pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) EXPECT_EQ(rec[k], pts[k]);
}

TEST(DeriveActions, RandomRealWalkRoundTrip) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d(0.0, 3.0);
  std::vector<Vec2> pts{{d(rng), d(rng)}};
  for (int k = 0; k < 19; ++k) pts.push_back({pts.back().x + d(rng), pts.back().y + d(rng)});
  const auto rec = reconstruct_positions(pts.front(), derive_actions(from_points(pts)));
  for (std::size_t k = 0; k < pts.size(); ++k) {
    EXPECT_NEAR(rec[k].x, pts[k].x, 1e-12);
    EXPECT_NEAR(rec[k].y, pts[k].y, 1e-12);
  }
}

TEST(Validate, RejectsGapsAndNonFinite) {
  auto t = testing::line("a", 0, 0, 1, 0, 5);
  EXPECT_NO_THROW(validate(t));
  auto gap = t;
  gap.states[3].timestep_index += 1;
  EXPECT_THROW(validate(gap), InvalidInput);
  auto nan = t;
  nan.states[2].vx = std::nan("");
  EXPECT_THROW(validate(nan), InvalidInput);
  auto short_t = t;
  short_t.states.resize(1);
  EXPECT_THROW(validate(short_t), InvalidInput);
}

TEST(WindowInstances, ExactFit) {
  const auto out = window_instances({testing::line("a", 0, 0, 1, 0, 55)}, 15, 40, 1);
  EXPECT_EQ(out.size(), 1u);
  const auto out2 = window_instances({testing::line("a", 0, 0, 1, 0, 56)}, 15, 40, 1);
  EXPECT_EQ(out2.size(), 2u);
}

TEST(WindowInstances, CountMatchesFormula) {
  for (int n = 1; n <= 100; ++n) {
    Trajectory t = testing::line("a", 0, 0, 1, 0, std::max(n, 1));
    const auto out = window_instances({t}, 15, 25, 1);
    EXPECT_EQ(static_cast<int>(out.size()), std::max(0, n - 40 + 1)) << "n=" << n;
  }
}

TEST(WindowInstances, HistoryAndFutureAreContiguous) {
  const auto out = window_instances({testing::line("a", 0, 0, 1, 0, 50, 7)}, 10, 5, 3);
  ASSERT_FALSE(out.empty());
  for (const auto& inst : out) {
    EXPECT_EQ(inst.history_length(), 10);
    EXPECT_EQ(inst.horizon(), 5);
    EXPECT_EQ(inst.target_future.first_step(), inst.target_history.last_step() + 1);
    EXPECT_EQ(inst.origin.x, inst.target_history.states.back().x);
  }
}

TEST(WindowInstances, NeighborCountEqualsAgentsPresentDuringObservation) {
  // a: steps 0..59, b: steps 10..29, c: steps 100..140 (never overlaps a).
  std::vector<Trajectory> rec = {testing::line("a", 0, 0, 1, 0, 60, 0), testing::line("b", 0, 5, 1, 0, 20, 10),
                                 testing::line("c", 0, 9, 1, 0, 41, 100)};
  const int L = 5, H = 5;
  const auto out = window_instances(rec, L, H, 1);
  for (const auto& inst : out) {
    const auto s0 = inst.target_history.first_step();
    const auto s1 = inst.target_history.last_step();
    std::size_t brute = 0;
    for (const auto& other : rec) {
      if (other.agent_id == inst.target_history.agent_id) continue;
      bool overlap = false;
      for (const auto& s : other.states) overlap |= (s.timestep_index >= s0 && s.timestep_index <= s1);
      brute += overlap ? 1 : 0;
    }
    EXPECT_EQ(inst.neighbor_histories.size(), brute);
    for (const auto& nb : inst.neighbor_histories) EXPECT_EQ(nb.mask.size(), static_cast<std::size_t>(L));
  }
}

TEST(WindowInstances, AbsentNeighborStepsAreMasked) {
  std::vector<Trajectory> rec = {testing::line("a", 0, 0, 1, 0, 20, 0), testing::line("b", 0, 5, 1, 0, 10, 3)};
  const auto out = window_instances(rec, 6, 2, 100);
  ASSERT_EQ(out.size(), 2u);  // one window per agent
  const auto& inst = out[0];
  ASSERT_EQ(inst.neighbor_histories.size(), 1u);
  const auto& nb = inst.neighbor_histories[0];
  EXPECT_EQ(nb.valid_count(), 3u);  // b appears at step 3
  EXPECT_EQ(nb.mask[0], 0);
  EXPECT_EQ(nb.mask[3], 1);
  EXPECT_EQ(nb.traj.states[0].x, 0.0);
  EXPECT_EQ(nb.last_valid(), 5);
}

TEST(ScenarioDefaults, Values) {
  EXPECT_EQ(scenario_window_defaults(Scenario::intersection).history, 15);
  EXPECT_EQ(scenario_window_defaults(Scenario::intersection).horizon, 25);
  EXPECT_EQ(scenario_window_defaults(Scenario::roundabout).history, 15);
  EXPECT_EQ(scenario_window_defaults(Scenario::roundabout).horizon, 25);
  EXPECT_EQ(scenario_window_defaults(Scenario::highway).history, 10);
  EXPECT_EQ(scenario_window_defaults(Scenario::highway).horizon, 25);
  EXPECT_THROW(scenario_window_defaults("parking"), InvalidInput);
  EXPECT_EQ(parse_scenario(to_string(Scenario::highway)), Scenario::highway);
}

TEST(LocalFrame, RoundTrip) {
  std::vector<Trajectory> rec = {testing::line("a", 3, 4, 2, 1, 30, 0), testing::line("b", 10, -2, -1, 0, 30, 0)};
  const auto inst = window_instances(rec, 5, 5, 100).front();
  const auto local = to_local(inst);
  EXPECT_TRUE(local.local_frame);
  EXPECT_DOUBLE_EQ(local.target_history.states.back().x, 0.0);
  EXPECT_DOUBLE_EQ(local.target_history.states.back().y, 0.0);
  std::vector<Vec2> pts;
  for (const auto& s : local.target_future.states) pts.push_back({s.x, s.y});
  const auto global = to_global(local, pts);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    EXPECT_NEAR(global[k].x, inst.target_future.states[k].x, 1e-12);
    EXPECT_NEAR(global[k].y, inst.target_future.states[k].y, 1e-12);
  }
  // Idempotent on an already local instance.
  EXPECT_DOUBLE_EQ(to_local(local).target_history.states.front().x, local.target_history.states.front().x);
}

TEST(WrapAngle, Range) {
  for (double a : {-10.0, -3.5, -std::numbers::pi, 0.0, 1.0, std::numbers::pi, 7.0}) {
    const double w = wrap_angle(a);
    EXPECT_GT(w, -std::numbers::pi - 1e-12);
    EXPECT_LE(w, std::numbers::pi + 1e-12);
    EXPECT_NEAR(std::cos(w), std::cos(a), 1e-12);
    EXPECT_NEAR(std::sin(w), std::sin(a), 1e-12);
  }
}

}  // namespace
}  // namespace trajpred
