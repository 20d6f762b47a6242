#include <gtest/gtest.h>

#include <sstream>

#include "gaildrive/common/error.hpp"
#include "gaildrive/eval/evaluate.hpp"
#include "gaildrive/expert/collect.hpp"

namespace gaildrive::eval {
namespace {

class ZeroDriver : public Driver {
 public:
  sim::Action act(const sim::Environment&, const sim::Observation&, Rng&) override { return {}; }
};

TEST(Evaluate, ExpertScoresEighty) {
  ExpertDriver expert;
  Rng rng(1);
  const auto r = evaluate(expert, sim::make_route(sim::RouteKind::kShort), {}, {.episodes = 3},
                          EvalMode::kDeterministic, rng);
  ASSERT_EQ(r.episodes(), 3u);
  for (double v : r.rewards) EXPECT_EQ(v, 80.0);
  EXPECT_EQ(r.mean(), 80.0);
  EXPECT_EQ(r.stddev(), 0.0);
}

TEST(Evaluate, ZeroActionsScoreZero) {
  ZeroDriver zero;
  Rng rng(1);
  const auto r = evaluate(zero, sim::make_route(sim::RouteKind::kShort), {},
                          {.episodes = 2, .record_traces = true}, EvalMode::kDeterministic, rng);
  EXPECT_EQ(r.mean(), 0.0);
  ASSERT_EQ(r.traces.size(), 2u);
  // Start point plus 50 stalled steps, the last flagged.
  EXPECT_EQ(r.traces[0].points.size(), 51u);
  EXPECT_EQ(r.traces[0].points.back().infraction, sim::InfractionKind::kStagnation);
}

TEST(Evaluate, StepCap) {
  ExpertDriver expert;
  Rng rng(1);
  const auto r = evaluate(expert, sim::make_route(sim::RouteKind::kShort), {},
                          {.episodes = 1, .max_steps = 100}, EvalMode::kDeterministic, rng);
  EXPECT_GT(r.rewards[0], 0.0);
  EXPECT_LT(r.rewards[0], 80.0);
  EXPECT_EQ(default_step_cap(sim::make_route(sim::RouteKind::kShort)),
            2 * expert::expert_lap_steps(sim::make_route(sim::RouteKind::kShort), {}));
}

TEST(Evaluate, DeterministicPolicyIgnoresSeed) {
  const auto net = agent::build_actor_critic(agent::ObsMode::kVector, 3);
  PolicyDriver a(net, agent::InputEncoder(agent::ObsMode::kVector), agent::kDefaultLogStd,
                 EvalMode::kDeterministic);
  const auto route = sim::make_route(sim::RouteKind::kShort);
  Rng r1(1), r2(2);
  const auto x = evaluate(a, route, {}, {.episodes = 2, .max_steps = 300, .record_traces = true},
                          EvalMode::kDeterministic, r1);
  const auto y = evaluate(a, route, {}, {.episodes = 2, .max_steps = 300, .record_traces = true},
                          EvalMode::kDeterministic, r2);
  EXPECT_EQ(x.rewards, y.rewards);
  EXPECT_EQ(x.traces, y.traces);
}

TEST(Evaluate, RewardsBounded) {
  const auto net = agent::build_actor_critic(agent::ObsMode::kVector, 4);
  PolicyDriver p(net, agent::InputEncoder(agent::ObsMode::kVector), agent::kDefaultLogStd,
                 EvalMode::kStochastic);
  Rng rng(5);
  const auto r = evaluate(p, sim::make_route(sim::RouteKind::kShort), {}, {.episodes = 5, .max_steps = 300},
                          EvalMode::kStochastic, rng);
  for (double v : r.rewards) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 80.0);
  }
  EXPECT_GE(r.mean(), r.min());
  EXPECT_LE(r.mean(), r.max());
}

TEST(Evaluate, ZeroEpisodes) {
  ExpertDriver expert;
  Rng rng(1);
  const auto r = evaluate(expert, sim::make_route(sim::RouteKind::kShort), {}, {.episodes = 0},
                          EvalMode::kDeterministic, rng);
  EXPECT_EQ(r.episodes(), 0u);
  EXPECT_EQ(r.mean(), 0.0);
}

TEST(Evaluate, PolicyModeMismatch) {
  const auto net = agent::build_actor_critic(agent::ObsMode::kVector, 4);
  EXPECT_THROW(PolicyDriver(net, agent::InputEncoder(agent::ObsMode::kRaster), agent::kDefaultLogStd,
                            EvalMode::kDeterministic),
               ConfigError);
}

TEST(TrajectoryDump, EmptyReportHasHeaderOnly) {
  EvalReport r;
  std::stringstream ss;
  write_trajectory_dump(r, ss);
  EXPECT_EQ(ss.str(), "# gaildrive trajectories mode=deterministic episodes=0\n");
  EXPECT_EQ(read_trajectory_dump(ss).traces.size(), 0u);
}

TEST(TrajectoryDump, RoundTrip) {
  ZeroDriver zero;
  ExpertDriver expert;
  Rng rng(1);
  const auto route = sim::make_route(sim::RouteKind::kShort);
  auto r = evaluate(expert, route, {}, {.episodes = 1, .record_traces = true}, EvalMode::kDeterministic, rng);
  const auto z = evaluate(zero, route, {}, {.episodes = 1, .record_traces = true}, EvalMode::kDeterministic, rng);
  r.traces.push_back(z.traces[0]);
  r.rewards.push_back(z.rewards[0]);
  std::stringstream ss;
  write_trajectory_dump(r, ss);
  const std::string text = ss.str();
  EXPECT_NE(text.find(" STAGNATION\n"), std::string::npos);
  const auto back = read_trajectory_dump(ss);
  ASSERT_EQ(back.traces.size(), 2u);
  EXPECT_EQ(back.rewards, r.rewards);
  for (std::size_t k = 0; k < 2; ++k) {
    ASSERT_EQ(back.traces[k].points.size(), r.traces[k].points.size());
    EXPECT_EQ(back.traces[k].points.back().infraction, r.traces[k].points.back().infraction);
    EXPECT_NEAR(back.traces[k].points.back().x, r.traces[k].points.back().x, 1e-4);
  }
}

TEST(TrajectoryDump, RejectsBadLabel) {
  std::stringstream ss("# gaildrive trajectories mode=deterministic episodes=1\n# episode 0 reward=1 points=1\n1 2 CRASH\n");
  EXPECT_THROW(read_trajectory_dump(ss), FormatError);
}

}  // namespace
}  // namespace gaildrive::eval
