#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "gaildrive/common/error.hpp"
#include "gaildrive/sim/environment.hpp"

namespace gaildrive::sim {
namespace {

constexpr double kPi = std::numbers::pi;

RouteSpec straight_route(double length = 200.0, std::size_t dense = 161) {
  return build_route(custom_layout(length, 0, dense, 4));
}

TEST(Route, ShortCounts) {
  const auto r = make_route(RouteKind::kShort);
  EXPECT_EQ(r.dense_points.size(), 80u);
  EXPECT_EQ(r.sparse_points.size(), 4u);
  EXPECT_EQ(r.commands.size(), 4u);
  EXPECT_NEAR(r.length, 100.0, 1e-9);
}

TEST(Route, LongCounts) {
  const auto r = make_route(RouteKind::kLong);
  EXPECT_EQ(r.dense_points.size(), 760u);
  EXPECT_EQ(r.sparse_points.size(), 20u);
  EXPECT_NEAR(r.length, 2500.0, 1e-9);
}

TEST(Route, ShortSpacing) {
  const auto r = make_route(RouteKind::kShort);
  const double expected = 100.0 / 79.0;  // 1.2658
  for (std::size_t i = 0; i + 1 < r.dense_points.size(); ++i) {
    // Chords on the 10 m arc are shorter by ~1e-4 m.
    EXPECT_NEAR(norm(r.dense_points[i + 1] - r.dense_points[i]), expected, 1e-3) << i;
  }
}

TEST(Route, ShortGeometry) {
  // 45 m east, quarter left turn of radius 10 (towards -y), then south.
  const auto r = make_route(RouteKind::kShort);
  const double tail = 100.0 - 45.0 - 5.0 * kPi;
  EXPECT_NEAR(r.dense_points.front().x, 0.0, 1e-12);
  EXPECT_NEAR(r.dense_points.back().x, 55.0, 1e-9);
  EXPECT_NEAR(r.dense_points.back().y, -10.0 - tail, 1e-9);
  EXPECT_EQ(r.sparse_dense_index, (std::vector<std::size_t>{20, 40, 59, 79}));
  EXPECT_EQ(r.commands, (std::vector<Command>{Command::kLaneFollow, Command::kLeft, Command::kLeft,
                                              Command::kLaneFollow}));
}

TEST(Route, LongTurns) {
  const auto r = make_route(RouteKind::kLong);
  // The first 100 m coincide with the short route.
  const auto s = make_route(RouteKind::kShort);
  const auto p = r.dense_points[10];
  EXPECT_NEAR(p.x, 10 * 2500.0 / 759.0, 1e-9);
  EXPECT_NEAR(norm(s.dense_points[0] - r.dense_points[0]), 0.0, 1e-12);
  // Turn commands appear in the order left, right.
  std::vector<Command> turns;
  for (auto c : r.commands) {
    if (c != Command::kLaneFollow && (turns.empty() || turns.back() != c)) turns.push_back(c);
  }
  EXPECT_EQ(turns, (std::vector<Command>{Command::kLeft, Command::kRight}));
  std::size_t left = 0, right = 0;
  for (auto c : r.commands) {
    left += c == Command::kLeft;
    right += c == Command::kRight;
  }
  EXPECT_GE(left, 2u);
  EXPECT_GE(right, 2u);
}

TEST(Route, SeedKeepsLengthAndCounts) {
  const auto a = make_route(RouteKind::kLong, 7);
  const auto b = make_route(RouteKind::kLong, 7);
  const auto c = make_route(RouteKind::kLong, 0);
  EXPECT_NEAR(a.length, 2500.0, 1e-9);
  EXPECT_EQ(a.dense_points, b.dense_points);
  EXPECT_NE(a.dense_points, c.dense_points);
  EXPECT_EQ(a.dense_points.size(), 760u);
}

TEST(Route, SparsePointsLieOnDensePolyline) {
  for (auto kind : {RouteKind::kShort, RouteKind::kLong}) {
    const auto r = make_route(kind);
    for (const auto& sp : r.sparse_points) EXPECT_LT(project(r, sp).distance, 1e-9);
    EXPECT_EQ(r.sparse_points.back(), r.dense_points.back());
  }
}

TEST(Route, DumpRoundTrip) {
  const auto r = make_route(RouteKind::kShort);
  std::stringstream ss;
  write_route_dump(r, ss);
  const auto back = read_route_dump(ss);
  EXPECT_EQ(back.kind, r.kind);
  ASSERT_EQ(back.dense_points.size(), r.dense_points.size());
  ASSERT_EQ(back.sparse_points.size(), r.sparse_points.size());
  EXPECT_EQ(back.commands, r.commands);
  for (std::size_t i = 0; i < r.dense_points.size(); ++i) {
    EXPECT_NEAR(back.dense_points[i].x, r.dense_points[i].x, 1e-6);
    EXPECT_NEAR(back.dense_points[i].y, r.dense_points[i].y, 1e-6);
  }
}

TEST(Route, DumpRejectsGarbage) {
  std::stringstream ss("not a route\n");
  EXPECT_THROW(read_route_dump(ss), FormatError);
  std::stringstream truncated("# gaildrive route kind=short dense=3 sparse=1 length=2\n0 0\n");
  EXPECT_THROW(read_route_dump(truncated), FormatError);
}

TEST(Dynamics, AtRestStaysPut) {
  VehicleState s{1.0, 2.0, 0.3, 0.0};
  EXPECT_EQ(step_dynamics(s, {0.7, 0.0}, {}), s);
}

TEST(Dynamics, ZeroSteerKeepsHeading) {
  VehicleState s{0.0, 0.0, 0.8, 4.0};
  for (int i = 0; i < 20; ++i) s = step_dynamics(s, {0.0, 0.5}, {});
  EXPECT_EQ(s.heading, 0.8);
}

TEST(Dynamics, StraightLineNoDrag) {
  VehicleParams p;
  p.drag = 0.0;
  const auto s = step_dynamics({0.0, 0.0, 0.0, 5.0}, {0.0, 0.0}, p);
  EXPECT_DOUBLE_EQ(s.x, 0.5);
  EXPECT_DOUBLE_EQ(s.y, 0.0);
  EXPECT_DOUBLE_EQ(s.speed, 5.0);
}

TEST(Dynamics, SteerAndThrottle) {
  // heading += v/L tan(35 deg * 0.5) dt; speed += (3 * 1 - 0.3 * 4) * 0.1
  const auto s = step_dynamics({0.0, 0.0, 0.0, 4.0}, {0.5, 1.0}, {});
  EXPECT_NEAR(s.heading, 4.0 / 2.5 * std::tan(17.5 * kPi / 180.0) * 0.1, 1e-15);
  EXPECT_NEAR(s.speed, 4.18, 1e-12);
  EXPECT_GT(s.heading, 0.0);  // positive steer turns right
}

TEST(Dynamics, SpeedNeverNegative) {
  VehicleParams p;
  p.drag = 50.0;
  const auto s = step_dynamics({0.0, 0.0, 0.0, 1.0}, {0.0, 0.0}, p);
  EXPECT_EQ(s.speed, 0.0);
}

TEST(Planner, IdentityFrame) {
  RouteSpec r;
  r.sparse_points = {{10.0, 0.0}, {20.0, 0.0}};
  r.commands = {Command::kLaneFollow, Command::kLeft};
  const auto p = plan(r, {0.0, 0.0, 0.0, 0.0}, 0);
  EXPECT_EQ(p.index, 0u);
  EXPECT_NEAR(p.target.x, 10.0, 1e-12);
  EXPECT_NEAR(p.target.y, 0.0, 1e-12);
}

TEST(Planner, RotatedFrame) {
  RouteSpec r;
  r.sparse_points = {{0.0, 10.0}};
  r.commands = {Command::kLaneFollow};
  const auto p = plan(r, {0.0, 0.0, kPi / 2, 0.0}, 0);
  EXPECT_NEAR(p.target.x, 10.0, 1e-12);
  EXPECT_NEAR(p.target.y, 0.0, 1e-12);
}

TEST(Planner, AdvancesWithinRadius) {
  RouteSpec r;
  r.sparse_points = {{10.0, 0.0}, {20.0, 0.0}};
  r.commands = {Command::kLaneFollow, Command::kLeft};
  r.crossing_radius = 2.0;
  auto p = plan(r, {8.5, 0.0, 0.0, 0.0}, 0);
  EXPECT_EQ(p.index, 1u);
  EXPECT_EQ(p.command, Command::kLeft);
  EXPECT_NEAR(p.target.x, 11.5, 1e-12);
  // The last point is never passed, and the index never goes back.
  p = plan(r, {20.0, 0.0, 0.0, 0.0}, 1);
  EXPECT_EQ(p.index, 1u);
  p = plan(r, {0.0, 0.0, 0.0, 0.0}, 1);
  EXPECT_EQ(p.index, 1u);
}

TEST(Planner, TargetDistancePreserved) {
  Rng rng(5);
  RouteSpec r;
  r.sparse_points = {{3.0, -7.0}};
  r.commands = {Command::kLaneFollow};
  for (int i = 0; i < 100; ++i) {
    VehicleState s{20 * uniform01(rng) - 10, 20 * uniform01(rng) - 10, 2 * kPi * uniform01(rng) - kPi, 0};
    const auto p = plan(r, s, 0);
    EXPECT_NEAR(norm(p.target), norm(r.sparse_points[0] - s.position()), 1e-9);
  }
}

TEST(Infraction, LaneBoundary) {
  const auto r = straight_route();
  EXPECT_FALSE(detect_lane_invasion({50.0, 0.0, 0.0, 0.0}, r));
  EXPECT_FALSE(detect_lane_invasion({50.0, r.lane_half_width - 0.01, 0.0, 0.0}, r));
  EXPECT_EQ(detect_lane_invasion({50.0, r.lane_half_width + 0.01, 0.0, 0.0}, r),
            InfractionKind::kLaneInvasion);
  EXPECT_EQ(detect_lane_invasion({50.0, -r.lane_half_width - 0.01, 0.0, 0.0}, r),
            InfractionKind::kLaneInvasion);
}

TEST(Environment, FirstResetAtStart) {
  Environment env(make_route(RouteKind::kShort));
  Rng rng(1);
  env.reset(rng);
  EXPECT_EQ(env.state().position(), env.route().dense_points[0]);
  EXPECT_EQ(env.state().speed, 0.0);
  EXPECT_EQ(env.state().heading, 0.0);
  EXPECT_EQ(env.crossed(), 0u);
  EXPECT_EQ(env.sparse_index(), 0u);
}

TEST(Environment, ZeroActionsStagnateAtFifty) {
  Environment env(make_route(RouteKind::kShort));
  env.reset_to_start();
  for (int i = 1; i < 50; ++i) {
    const auto r = env.step({0.0, 0.0});
    ASSERT_FALSE(r.done()) << i;
  }
  const auto r = env.step({0.0, 0.0});
  EXPECT_EQ(r.infraction, InfractionKind::kStagnation);
  EXPECT_EQ(r.dense_crossed_total, 0u);
  EXPECT_TRUE(env.terminal());
  EXPECT_THROW(env.step({0.0, 0.0}), StateError);
}

TEST(Environment, StepBeforeResetThrows) {
  Environment env(make_route(RouteKind::kShort));
  EXPECT_THROW(env.step({0.0, 0.0}), StateError);
}

TEST(Environment, ObservationShape) {
  Environment env(make_route(RouteKind::kShort));
  auto o = env.reset_to_start();
  EXPECT_EQ(o.continuous().size(), 9u);
  float sum = 0;
  for (float v : o.command_onehot) sum += v;
  EXPECT_EQ(sum, 1.0f);
  EXPECT_TRUE(o.raster.empty());
  // Sparse point 0 is dense index 20, straight ahead.
  EXPECT_NEAR(o.target.x, 20 * 100.0 / 79.0, 1e-9);
  EXPECT_NEAR(o.target.y, 0.0, 1e-9);
}

TEST(Environment, ClampsActions) {
  Environment a(make_route(RouteKind::kShort)), b(make_route(RouteKind::kShort));
  a.reset_to_start();
  b.reset_to_start();
  for (int i = 0; i < 5; ++i) {
    a.step({0.0, 5.0});
    b.step({0.0, 1.0});
  }
  EXPECT_EQ(a.state(), b.state());
}

// Straight ahead at full throttle lane-follows the first 45 m, then leaves the lane in the turn.
TEST(Environment, CrossesPointsInOrder) {
  Environment env(make_route(RouteKind::kShort));
  env.reset_to_start();
  std::size_t last = 0;
  StepResult r;
  do {
    r = env.step({0.0, 1.0});
    EXPECT_GE(r.dense_crossed_total, last);
    last = r.dense_crossed_total;
  } while (!r.done());
  EXPECT_EQ(r.infraction, InfractionKind::kLaneInvasion);
  // Points up to 45 m (index 35) are on the straight; a few more fit inside the lane.
  EXPECT_GE(last, 36u);
  EXPECT_LT(last, 50u);
}

// Drives the car off the lane, returning false if the route completed first.
bool force_infraction(Environment& env) {
  for (int i = 0; i < 400; ++i) {
    const auto r = env.step({1.0, 1.0});
    if (r.infraction) return true;
    if (r.route_complete) return false;
  }
  return false;
}

TEST(Environment, RestartBranches) {
  Environment env(make_route(RouteKind::kShort));
  env.reset_at(30);
  ASSERT_TRUE(force_infraction(env));
  const auto at = env.infraction_index();
  ASSERT_TRUE(at.has_value());
  EXPECT_GE(*at, 30u);
  EXPECT_LE(*at, 35u);

  env.reset_with(0.95, 3);  // 0.95 < 0.9 fails: uniform branch
  EXPECT_EQ(env.crossed(), 3u);
  EXPECT_EQ(env.state().position(), env.route().dense_points[3]);

  env.reset_at(30);
  ASSERT_TRUE(force_infraction(env));
  const auto at2 = *env.infraction_index();
  env.reset_with(0.05, 3);  // infraction branch
  EXPECT_EQ(env.crossed(), at2);
  EXPECT_EQ(env.state().position(), env.route().dense_points[at2]);
  EXPECT_EQ(env.state().speed, 0.0);
  const auto t = env.route().tangent(at2);
  EXPECT_NEAR(env.state().heading, std::atan2(t.y, t.x), 1e-12);
}

TEST(Environment, RestartAfterCompletionGoesToStart) {
  Environment env(make_route(RouteKind::kShort));
  env.reset_at(79);
  StepResult r;
  do r = env.step({0.0, 1.0});
  while (!r.done());
  EXPECT_TRUE(r.route_complete);
  EXPECT_EQ(r.dense_crossed_total, 80u);
  env.reset_with(0.0, 40);
  EXPECT_EQ(env.crossed(), 0u);
}

TEST(Environment, RestartSparseIndex) {
  Environment env(make_route(RouteKind::kShort));
  env.reset_at(19);
  EXPECT_EQ(env.sparse_index(), 0u);
  env.reset_at(20);
  EXPECT_EQ(env.sparse_index(), 1u);
  env.reset_at(79);
  EXPECT_EQ(env.sparse_index(), 3u);
}

TEST(Environment, UniformRestartIsUniform) {
  EnvConfig cfg;
  cfg.restart_at_infraction_prob = 0.0;
  Environment env(make_route(RouteKind::kShort), cfg);
  Rng rng(2024);
  std::vector<int> counts(80, 0);
  int draws = 0;
  env.reset(rng);
  while (draws < 10000) {
    if (!force_infraction(env)) {
      env.reset(rng);
      continue;
    }
    env.reset(rng);
    ++counts[env.crossed()];
    ++draws;
  }
  double chi2 = 0;
  const double expected = draws / 80.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 79 degrees of freedom, p = 0.001
  EXPECT_LT(chi2, 124.8);
}

TEST(Environment, InfractionRestartRate) {
  Environment env(make_route(RouteKind::kShort));
  Rng rng(99);
  int same = 0, draws = 0;
  env.reset(rng);
  while (draws < 4000) {
    if (!force_infraction(env)) {
      env.reset(rng);
      continue;
    }
    const auto at = *env.infraction_index();
    env.reset(rng);
    same += env.crossed() == at;
    ++draws;
  }
  const double p = 0.9 + 0.1 / 80.0;
  const double sigma = std::sqrt(p * (1 - p) / draws);
  EXPECT_NEAR(static_cast<double>(same) / draws, p, 4 * sigma);
}

TEST(Environment, Deterministic) {
  auto run = [] {
    EnvConfig cfg;
    cfg.raster = true;
    Environment env(make_route(RouteKind::kShort), cfg);
    Rng rng(11), act(12);
    std::vector<std::tuple<VehicleState, std::size_t, bool, std::vector<float>>> log;
    env.reset(rng);
    for (int i = 0; i < 300; ++i) {
      const auto r = env.step({2 * uniform01(act) - 1, uniform01(act)});
      log.emplace_back(env.state(), r.dense_crossed_total, r.done(), r.observation.raster);
      if (r.done()) env.reset(rng);
    }
    return log;
  };
  EXPECT_EQ(run(), run());
}

TEST(Environment, RandomActionsRespectBounds) {
  Environment env(make_route(RouteKind::kShort));
  Rng rng(3);
  env.reset(rng);
  std::size_t last = env.crossed(), last_sparse = env.sparse_index();
  for (int i = 0; i < 5000; ++i) {
    const auto r = env.step({2 * uniform01(rng) - 1, uniform01(rng)});
    EXPECT_LE(r.dense_crossed_total, 80u);
    EXPECT_GE(r.dense_crossed_total, last);
    EXPECT_GE(env.sparse_index(), last_sparse);
    EXPECT_GE(env.state().speed, 0.0);
    EXPECT_EQ(r.observation.continuous().size(), 9u);
    if (r.route_complete) {
      EXPECT_EQ(r.dense_crossed_total, 80u);
    }
    if (r.done()) env.reset(rng);
    last = env.crossed();
    last_sparse = env.sparse_index();
  }
}

TEST(Raster, StraightLaneBand) {
  const auto r = straight_route();
  const VehicleState s{50.0, 0.0, 0.0, 0.0};
  const auto img = render_raster(s, r);
  ASSERT_EQ(img.size(), kRasterDim);
  const float* center = img.data() + kRasterSize * kRasterSize;
  // 2 * 1.75 / 0.5 = 7 columns, centered on column 16.
  for (std::size_t row = 0; row < kRasterSize; ++row) {
    for (std::size_t c = 0; c < kRasterSize; ++c) {
      const float v = center[row * kRasterSize + c];
      if (c >= 13 && c <= 19) {
        EXPECT_GT(v, 0.0f) << row << "," << c;
      } else {
        EXPECT_EQ(v, 0.0f) << row << "," << c;
      }
    }
  }
  // Away from route markers the lane is painted 1.0.
  for (std::size_t row = 0; row < kRasterSize; ++row) {
    EXPECT_EQ(center[row * kRasterSize + 13], 1.0f);
    EXPECT_EQ(center[row * kRasterSize + 19], 1.0f);
  }
}

TEST(Raster, MarkersAndRange) {
  const auto r = straight_route();
  const auto img = render_raster({50.0, 0.0, 0.0, 0.0}, r);
  std::size_t markers = 0;
  for (float v : img) {
    EXPECT_TRUE(v == 0.0f || v == 0.5f || v == 1.0f);
    markers += v == 0.5f;
  }
  EXPECT_GT(markers, 0u);
}

TEST(Raster, SideViewsSeeTheLaneTilted) {
  const auto r = straight_route();
  const auto img = render_raster({50.0, 0.0, 0.0, 0.0}, r);
  // A view yawed 30 degrees right sees the lane running from the bottom
  // center to its upper left.
  const float* right_view = img.data() + 2 * kRasterSize * kRasterSize;
  EXPECT_GT(right_view[31 * kRasterSize + 16], 0.0f);
  EXPECT_GT(right_view[0 * kRasterSize + 0], 0.0f);
  EXPECT_EQ(right_view[0 * kRasterSize + 31], 0.0f);
}

TEST(Raster, OffRoadIsBlank) {
  const auto r = straight_route();
  const auto img = render_raster({50.0, 100.0, 0.0, 0.0}, r);
  for (float v : img) ASSERT_EQ(v, 0.0f);
}

TEST(Raster, Deterministic) {
  const auto r = make_route(RouteKind::kShort);
  const VehicleState s{47.0, -1.5, -0.4, 3.0};
  EXPECT_EQ(render_raster(s, r), render_raster(s, r));
}

}  // namespace
}  // namespace gaildrive::sim
