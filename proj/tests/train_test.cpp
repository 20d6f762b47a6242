#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "gaildrive/agent/policy.hpp"
#include "gaildrive/common/bytes.hpp"
#include "gaildrive/common/error.hpp"
#include "gaildrive/expert/collect.hpp"
#include "gaildrive/nn/checkpoint.hpp"
#include "gaildrive/train/config.hpp"
#include "gaildrive/train/losses.hpp"
#include "gaildrive/train/rollout.hpp"
#include "gaildrive/train/trainer.hpp"

namespace gaildrive::train {
namespace {

namespace fs = std::filesystem;

// Values frozen from an independent recursive oracle.
constexpr double kGaeA0 = 2.82504025;
constexpr double kAlpha100 = 0.5451933928416551;
constexpr double kLogProbAtMean = 3.362122933590655;

// Brute-force GAE: sums discounted TD residuals forward from each step,
// stopping at the first episode end.
std::vector<double> brute_gae(const std::vector<double>& r, const std::vector<double>& v,
                              const std::vector<std::uint8_t>& d, double boot, double g, double l) {
  const std::size_t n = r.size();
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    double acc = 0.0, w = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      const double next = d[k] ? 0.0 : (k + 1 < n ? v[k + 1] : boot);
      acc += w * (r[k] + g * next - v[k]);
      if (d[k]) break;
      w *= g * l;
    }
    out[t] = acc;
  }
  return out;
}

TEST(Gae, ThreeStepExample) {
  const std::vector<double> r{1, 1, 1}, v{0, 0, 0};
  const std::vector<std::uint8_t> d{0, 0, 0};
  const auto g = gae(r, v, d, 0.0, 0.99, 0.95);
  EXPECT_NEAR(g.advantages[2], 1.0, 1e-12);
  EXPECT_NEAR(g.advantages[1], 1.9405, 1e-12);
  EXPECT_NEAR(g.advantages[0], kGaeA0, 1e-12);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(g.returns[i], g.advantages[i] + v[i]);
}

TEST(Gae, LambdaZeroIsTdResidual) {
  const std::vector<double> r{0.5, -1, 2, 0.3}, v{0.1, 0.2, -0.3, 0.4};
  const std::vector<std::uint8_t> d{0, 1, 0, 0};
  const double boot = 0.7, gamma = 0.9;
  const auto g = gae(r, v, d, boot, gamma, 0.0);
  for (std::size_t t = 0; t < r.size(); ++t) {
    const double next = d[t] ? 0.0 : (t + 1 < r.size() ? v[t + 1] : boot);
    EXPECT_NEAR(g.advantages[t], r[t] + gamma * next - v[t], 1e-12);
  }
}

TEST(Gae, GammaZeroIsRewardMinusValue) {
  const std::vector<double> r{0.5, -1, 2}, v{0.1, 0.2, -0.3};
  const std::vector<std::uint8_t> d{0, 0, 0};
  const auto g = gae(r, v, d, 5.0, 0.0, 0.95);
  for (std::size_t t = 0; t < r.size(); ++t) EXPECT_NEAR(g.advantages[t], r[t] - v[t], 1e-12);
}

TEST(Gae, LambdaOneIsMonteCarloReturnMinusValue) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> r(20), v(20);
    std::vector<std::uint8_t> d(20);
    for (int i = 0; i < 20; ++i) {
      r[i] = n01(rng);
      v[i] = n01(rng);
      d[i] = (rng() % 6 == 0) ? 1 : 0;
    }
    const double boot = n01(rng), gamma = 0.99;
    const auto g = gae(r, v, d, boot, gamma, 1.0);
    for (int t = 0; t < 20; ++t) {
      double ret = 0.0, w = 1.0;
      int k = t;
      for (; k < 20; ++k) {
        ret += w * r[k];
        w *= gamma;
        if (d[k]) break;
      }
      if (k == 20) ret += w * boot;
      EXPECT_NEAR(g.advantages[t], ret - v[t], 1e-9) << "trial " << trial << " t " << t;
    }
  }
}

TEST(Gae, MatchesBruteForceOnRandomSequences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> r(20), v(20);
    std::vector<std::uint8_t> d(20);
    for (int i = 0; i < 20; ++i) {
      r[i] = u(rng);
      v[i] = u(rng);
      d[i] = rng() % 5 == 0;
    }
    const double boot = u(rng);
    const auto g = gae(r, v, d, boot, 0.99, 0.95);
    const auto want = brute_gae(r, v, d, boot, 0.99, 0.95);
    for (int t = 0; t < 20; ++t) EXPECT_NEAR(g.advantages[t], want[t], 1e-9);
  }
}

TEST(Gae, DoneStopsPropagation) {
  const std::vector<double> r{0, 0, 100}, v{0, 0, 0};
  const std::vector<std::uint8_t> d{0, 1, 0};
  const auto g = gae(r, v, d, 0.0, 0.99, 0.95);
  EXPECT_EQ(g.advantages[1], 0.0);
  EXPECT_EQ(g.advantages[0], 0.0);
  EXPECT_GT(g.advantages[2], 0.0);
}

TEST(Gae, RejectsMismatchedLengths) {
  const std::vector<double> r{1, 2}, v{0};
  const std::vector<std::uint8_t> d{0, 0};
  EXPECT_THROW(gae(r, v, d, 0, 0.99, 0.95), ConfigError);
}

TEST(Standardize, ZeroMeanUnitStd) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(5.0, 3.0);
  std::vector<double> x(2400);
  for (auto& v : x) v = n(rng);
  const auto s = standardize(x);
  double mean = 0, var = 0;
  for (double v : s) mean += v;
  mean /= s.size();
  for (double v : s) var += (v - mean) * (v - mean);
  var /= s.size();
  EXPECT_LT(std::abs(mean), 1e-6);
  EXPECT_NEAR(std::sqrt(var), 1.0, 1e-4);
}

TEST(Standardize, ConstantInputGivesZeros) {
  const std::vector<double> x(10, 3.5);
  for (double v : standardize(x)) EXPECT_EQ(v, 0.0);
}

TEST(Ppo, RatioOneGivesNegativeMeanAdvantage) {
  const std::vector<double> lp{-1.0, 0.5, 2.0}, adv{1.0, -2.0, 0.5};
  EXPECT_NEAR(ppo_actor_loss(lp, lp, adv, 0.1), -(1.0 - 2.0 + 0.5) / 3.0, 1e-12);
}

TEST(Ppo, ClipCases) {
  const std::vector<double> old{0.0};
  EXPECT_NEAR(ppo_actor_loss(std::vector<double>{std::log(1.2)}, old, std::vector<double>{1.0}, 0.1), -1.1, 1e-12);
  EXPECT_NEAR(ppo_actor_loss(std::vector<double>{std::log(0.8)}, old, std::vector<double>{-1.0}, 0.1), 0.9, 1e-12);
  EXPECT_NEAR(clipped_surrogate(1.2, 1.0, 0.1), 1.1, 1e-12);
  EXPECT_NEAR(clipped_surrogate(0.8, -1.0, 0.1), -0.9, 1e-12);
}

TEST(Ppo, SurrogateGradientMatchesFiniteDifference) {
  for (double rho : {0.5, 0.85, 0.95, 1.0 + 1e-3, 1.05, 1.15, 1.5}) {
    for (double a : {-1.3, 0.7}) {
      const double h = 1e-6;
      const double fd = (clipped_surrogate(rho + h, a, 0.1) - clipped_surrogate(rho - h, a, 0.1)) / (2 * h);
      EXPECT_NEAR(clipped_surrogate_grad(rho, a, 0.1), fd, 1e-6) << rho << " " << a;
    }
  }
}

TEST(Ppo, TotalLoss) {
  const std::vector<double> v{1, 2}, ret{1, 2};
  EXPECT_NEAR(total_ppo_loss(-0.3, v, ret, 7.0, 0.5, 0.0), -0.3, 1e-12);
  const std::vector<double> v2{0, 0}, ret2{std::sqrt(2.0), -std::sqrt(2.0)};
  EXPECT_NEAR(total_ppo_loss(0.0, v2, ret2, 0.0, 0.5, 0.0), 1.0, 1e-12);
  EXPECT_NEAR(total_ppo_loss(0.0, v, ret, 2.0, 0.5, 0.25), -0.5, 1e-12);
}

TEST(BcLoss, AtMeanAndOneSigmaOff) {
  const agent::PolicyDist d{{0.1, 0.6}, agent::kDefaultLogStd};
  const std::vector<agent::PolicyDist> dists{d, d};
  const std::vector<agent::Vec2d> exact{{0.1, 0.6}, {0.1, 0.6}};
  EXPECT_NEAR(bc_loss(dists, exact), -kLogProbAtMean, 1e-6);
  const double s0 = std::exp(-2.0), s1 = std::exp(-3.2);
  const std::vector<agent::Vec2d> off{{0.1 + s0, 0.6 - s1}, {0.1 - s0, 0.6 + s1}};
  EXPECT_NEAR(bc_loss(dists, off) - bc_loss(dists, exact), 1.0, 1e-9);
}

TEST(BcLoss, InvariantToDuplication) {
  const std::vector<agent::PolicyDist> d1{{{0.2, 0.5}}, {{-0.3, 0.1}}};
  const std::vector<agent::Vec2d> a1{{0.25, 0.45}, {-0.2, 0.2}};
  std::vector<agent::PolicyDist> d2 = d1;
  d2.insert(d2.end(), d1.begin(), d1.end());
  std::vector<agent::Vec2d> a2 = a1;
  a2.insert(a2.end(), a1.begin(), a1.end());
  EXPECT_NEAR(bc_loss(d1, a1), bc_loss(d2, a2), 1e-12);
}

TEST(Alpha, Schedule) {
  EXPECT_DOUBLE_EQ(alpha_schedule(0.9, 0.995, 0), 0.9);
  EXPECT_NEAR(alpha_schedule(0.9, 0.995, 100), kAlpha100, 1e-12);
  EXPECT_DOUBLE_EQ(alpha_schedule(0.7, 1.0, 500), 0.7);
  double prev = alpha_schedule(0.9, 0.995, 0);
  for (std::uint64_t k = 1; k < 2000; ++k) {
    const double a = alpha_schedule(0.9, 0.995, k);
    EXPECT_LE(a, prev);
    EXPECT_GE(a, 0.0);
    prev = a;
  }
  EXPECT_THROW(alpha_schedule(1.5, 0.9, 0), ConfigError);
  EXPECT_THROW(alpha_schedule(0.5, 0.0, 0), ConfigError);
  EXPECT_THROW(alpha_schedule(0.5, 1.1, 0), ConfigError);
}

TEST(Alpha, CombinedLossEndpointsAndLinearity) {
  EXPECT_DOUBLE_EQ(combined_actor_loss(2.0, 4.0, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(combined_actor_loss(2.0, 4.0, 0.0), 4.0);
  EXPECT_NEAR(combined_actor_loss(2.0, 4.0, 0.5), 3.0, 1e-12);
  // Three points on a line: the middle one is the average of the ends.
  for (double bc : {-3.3, 0.4}) {
    for (double gl : {1.7, -0.2}) {
      const double a = combined_actor_loss(bc, gl, 0.2), b = combined_actor_loss(bc, gl, 0.5),
                   c = combined_actor_loss(bc, gl, 0.8);
      EXPECT_NEAR(b, 0.5 * (a + c), 1e-12);
    }
  }
}

// ---------------------------------------------------------------------------
// Config

TEST(Config, DefaultsFollowRoute) {
  const auto s = defaults_for(sim::RouteKind::kShort);
  EXPECT_EQ(s.timesteps_per_update(), 2400u);
  EXPECT_EQ(s.minibatch, 300u);
  const auto l = defaults_for(sim::RouteKind::kLong);
  EXPECT_EQ(l.timesteps_per_update(), 7200u);
  EXPECT_EQ(l.minibatch, 900u);
  EXPECT_NO_THROW(s.validate());
  EXPECT_NO_THROW(l.validate());
  EXPECT_DOUBLE_EQ(s.lr, 1e-4);
  EXPECT_DOUBLE_EQ(s.bc_lr, 3e-4);
  EXPECT_EQ(s.ppo_epochs, 4u);
  EXPECT_DOUBLE_EQ(s.clip, 0.1);
  EXPECT_DOUBLE_EQ(s.entropy_coef, 0.0);
}

TEST(Config, ValidateRejectsBadValues) {
  TrainConfig c;
  c.minibatch = 7;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.alpha0 = 1.2;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.alpha_decay = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.obs_mode = agent::ObsMode::kRaster;  // env.raster left false
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  TrainConfig c = defaults_for(sim::RouteKind::kLong);
  c.mode = TrainMode::kGail;
  c.seed = 99;
  c.alpha0 = 0.6;
  c.gp_direction = agent::GpDirection::kInterpolation;
  c.reward_transform = RewardTransform::kLinear;
  c.route.seed = 5;
  const auto back = from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(from_json(nlohmann::json{{"learning_rate", 0.1}}), ConfigError);
  EXPECT_THROW(from_json(nlohmann::json{{"route", {{"knd", "short"}}}}), ConfigError);
  EXPECT_THROW(from_json(nlohmann::json{{"mode", "dagger"}}), ConfigError);
  EXPECT_THROW(from_json(nlohmann::json{{"n_envs", "ten"}}), ConfigError);
}

TEST(Config, PartialJsonKeepsBase) {
  const auto c = from_json(nlohmann::json{{"n_envs", 4}}, defaults_for(sim::RouteKind::kLong));
  EXPECT_EQ(c.n_envs, 4u);
  EXPECT_EQ(c.steps_per_actor, 720u);
}

// ---------------------------------------------------------------------------
// Rollout

class RolloutTest : public ::testing::Test {
 protected:
  sim::RouteSpec route = sim::make_route(sim::RouteKind::kShort, 0);
  agent::InputEncoder encoder{agent::ObsMode::kVector};
  nn::Network policy = agent::build_actor_critic(agent::ObsMode::kVector, 3);
};

TEST_F(RolloutTest, BatchSizeAndLayout) {
  VecEnv envs(route, {}, 10, 1);
  const auto b = collect_rollout(policy, encoder, envs, 240);
  EXPECT_EQ(b.size(), 2400u);
  EXPECT_EQ(b.raw.rows(), 2400u);
  EXPECT_EQ(b.bootstrap.size(), 10u);
  for (std::size_t e = 0; e < 10; ++e) {
    for (std::size_t t = 0; t < 240; ++t) EXPECT_EQ(b.env_index[e * 240 + t], e);
  }
  std::size_t dones = 0;
  for (auto d : b.dones) dones += d;
  EXPECT_EQ(dones, b.episodes_finished);
}

TEST_F(RolloutTest, Singleton) {
  VecEnv envs(route, {}, 1, 1);
  const auto b = collect_rollout(policy, encoder, envs, 1);
  EXPECT_EQ(b.size(), 1u);
}

TEST_F(RolloutTest, LogProbMatchesStoredAction) {
  VecEnv envs(route, {}, 2, 4);
  const auto b = collect_rollout(policy, encoder, envs, 20);
  const auto out = policy.predict(encoder.policy_batch(b.raw));
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto o = agent::read_output(out.row(i));
    EXPECT_NEAR(agent::log_prob(o.dist(agent::kDefaultLogStd), b.actions[i]), b.log_prob_old[i], 1e-9);
    EXPECT_NEAR(o.value, b.value_old[i], 1e-9);
  }
}

TEST_F(RolloutTest, DeterministicAcrossRunsAndThreads) {
  VecEnv a(route, {}, 4, 9), b(route, {}, 4, 9);
  const auto ra = collect_rollout(policy, encoder, a, 100);
  const auto rb = collect_rollout(policy, encoder, b, 100, {.threads = 3});
  EXPECT_EQ(ra.raw, rb.raw);
  EXPECT_EQ(ra.actions, rb.actions);
  EXPECT_EQ(ra.dones, rb.dones);
  EXPECT_EQ(ra.bootstrap, rb.bootstrap);
}

TEST_F(RolloutTest, RewardTransforms) {
  VecEnv envs(route, {}, 2, 5);
  auto b = collect_rollout(policy, encoder, envs, 10);
  const auto disc = agent::build_discriminator(agent::ObsMode::kVector, 8);
  assign_rewards(b, disc, encoder, RewardTransform::kLinear);
  const auto raw = agent::disc_rewards(disc, disc_rows(b, encoder));
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_DOUBLE_EQ(b.rewards[i], raw[i]);
  assign_rewards(b, disc, encoder, RewardTransform::kSigmoid);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_NEAR(b.rewards[i], 1.0 / (1.0 + std::exp(-raw[i])), 1e-12);
    EXPECT_GT(b.rewards[i], 0.0);
    EXPECT_LT(b.rewards[i], 1.0);
  }
}

// ---------------------------------------------------------------------------
// Trainer

TrainConfig tiny_config(TrainMode mode) {
  TrainConfig c;
  c.mode = mode;
  c.n_envs = 2;
  c.steps_per_actor = 30;
  c.minibatch = 20;
  c.total_updates = 3;
  c.bc_epochs = 3;
  c.bc_batch = 64;
  c.eval_det_episodes = 1;
  c.eval_stoch_episodes = 2;
  c.eval_step_cap = 60;
  c.seed = 17;
  return c;
}

const expert::Dataset& short_dataset() {
  static const expert::Dataset d =
      expert::collect(sim::make_route(sim::RouteKind::kShort, 0), {}, {}, {.trajectories = 2});
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("gaildrive_train_test_" + name);
  fs::remove_all(p);
  return p;
}

TEST(Trainer, FirstMinibatchRatioIsOne) {
  const auto r = train_gail(tiny_config(TrainMode::kGail), short_dataset());
  EXPECT_LT(r.first_minibatch_max_ratio_dev, 1e-5);
}

TEST(Trainer, PolicyStepCount) {
  // T = 60, m = 20, K = 4 -> 12 steps per update.
  auto c = tiny_config(TrainMode::kBcGail);
  const auto r = train_gail(c, short_dataset());
  EXPECT_EQ(r.policy_steps, 3u * 4u * 3u);
  // Table I counting: T = 2400, m = 300, K = 4 -> 32 steps per update.
  c = defaults_for(sim::RouteKind::kShort);
  EXPECT_EQ(c.ppo_epochs * (c.timesteps_per_update() / c.minibatch), 32u);
}

TEST(Trainer, MetricsRowsAndAlphaDecay) {
  const auto dir = temp_dir("alpha");
  const auto r = train_gail(tiny_config(TrainMode::kBcGail), short_dataset(),
                            {(dir / "metrics.csv").string(), (dir / "ck").string(), dir.string()});
  ASSERT_EQ(r.metrics.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_NEAR(r.metrics[k].alpha, alpha_schedule(0.9, 0.995, k), 1e-15);
    EXPECT_EQ(r.metrics[k].env_steps, 60u * (k + 1));
    ASSERT_TRUE(r.metrics[k].eval_reward_det.has_value());
  }
  const auto text = slurp(dir / "metrics.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), kMetricsHeader);
  EXPECT_TRUE(fs::exists(dir / "ck" / "update_000000.gdck"));
  EXPECT_TRUE(fs::exists(dir / "ck" / "final.gdck"));
  // The checkpoint bundles the policy and the critic.
  EXPECT_EQ(nn::read_layer_tables(read_file((dir / "ck" / "final.gdck").string())).size(), 2u);
}

TEST(Trainer, GailModeHasZeroAlpha) {
  const auto r = train_gail(tiny_config(TrainMode::kGail), short_dataset());
  for (const auto& row : r.metrics) {
    EXPECT_EQ(row.alpha, 0.0);
    EXPECT_EQ(row.bc_loss, 0.0);
  }
}

TEST(Trainer, ZeroUpdatesWritesInitialCheckpointOnly) {
  const auto dir = temp_dir("zero");
  auto c = tiny_config(TrainMode::kBcGail);
  c.total_updates = 0;
  const auto r = train_gail(c, short_dataset(), {(dir / "m.csv").string(), (dir / "ck").string(), ""});
  EXPECT_TRUE(r.metrics.empty());
  EXPECT_EQ(slurp(dir / "m.csv"), std::string(kMetricsHeader) + "\n");
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir / "ck")) files.push_back(e.path().filename().string());
  EXPECT_EQ(files, std::vector<std::string>{"update_000000.gdck"});
}

TEST(Trainer, DeterministicMetricsForEveryMode) {
  for (auto mode : {TrainMode::kBc, TrainMode::kGail, TrainMode::kBcGail}) {
    const auto d1 = temp_dir("det1"), d2 = temp_dir("det2");
    const auto c = tiny_config(mode);
    train(c, short_dataset(), {(d1 / "m.csv").string(), "", ""});
    train(c, short_dataset(), {(d2 / "m.csv").string(), "", ""});
    const auto a = slurp(d1 / "m.csv"), b = slurp(d2 / "m.csv");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, b) << to_string(mode);
  }
}

TEST(Trainer, RejectsMismatchedDataset) {
  auto c = tiny_config(TrainMode::kGail);
  c.obs_mode = agent::ObsMode::kRaster;
  c.env.raster = true;
  EXPECT_THROW(train_gail(c, short_dataset()), ConfigError);
  EXPECT_THROW(train_gail(tiny_config(TrainMode::kGail), expert::Dataset{}), ConfigError);
}

TEST(Trainer, NonFiniteLossAbortsWithDump) {
  // A NaN observation poisons the critic loss on the first update.
  expert::Dataset d;
  sim::Observation obs;
  obs.speed = std::numeric_limits<double>::quiet_NaN();
  obs.command_onehot = sim::encode_command(sim::Command::kLaneFollow);
  for (int i = 0; i < 5; ++i) d.add(obs, {0.0, 0.5});
  d.end_trajectory();
  const auto dir = temp_dir("nan");
  EXPECT_THROW(train_gail(tiny_config(TrainMode::kGail), d, {"", "", dir.string()}), NumericError);
  bool dumped = false;
  for (const auto& e : fs::directory_iterator(dir)) dumped |= e.path().filename().string().starts_with("nan_update_");
  EXPECT_TRUE(dumped);
}

TEST(Bc, SingleSampleConvergesToAction) {
  expert::Dataset d;
  sim::Observation obs;
  obs.speed = 2.0;
  obs.target = {10.0, -1.0};
  obs.command_onehot = sim::encode_command(sim::Command::kLaneFollow);
  d.add(obs, {-0.3, 0.6});
  d.end_trajectory();
  auto c = tiny_config(TrainMode::kBc);
  c.bc_epochs = 800;
  c.eval_every = 1000;
  c.eval_det_episodes = 0;
  c.eval_stoch_episodes = 0;
  const auto r = train_bc(c, d);
  const agent::InputEncoder enc(agent::ObsMode::kVector);
  nn::Tensor raw({1, enc.raw_width()});
  const auto rr = enc.raw(obs);
  std::copy(rr.begin(), rr.end(), raw.row(0).begin());
  const auto o = agent::read_output(r.policy.predict(enc.policy_batch(raw)).row(0));
  EXPECT_NEAR(o.steer_mean, -0.3, 0.01);
  EXPECT_NEAR(o.throttle_mean, 0.6, 0.01);
  // The loss approaches its minimum, -log_prob at the mean.
  EXPECT_NEAR(r.metrics.back().bc_loss, -kLogProbAtMean, 0.05);
}

TEST(Bc, RetainsBestValidationParameters) {
  auto c = tiny_config(TrainMode::kBc);
  c.bc_epochs = 12;
  c.eval_det_episodes = 0;
  c.eval_stoch_episodes = 0;
  const auto& d = short_dataset();
  const auto r = train_bc(c, d);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : r.metrics) best = std::min(best, row.bc_loss);
  // Recompute the validation loss of the retained network.
  const auto split = expert::split_samples(d.size(), derive_seed(c.seed, 3), c.train_fraction);
  const auto val = expert::gather(d, split.validation);
  const agent::InputEncoder enc(agent::ObsMode::kVector);
  const auto out = r.policy.predict(enc.policy_batch(val.inputs));
  std::vector<agent::PolicyDist> dists;
  std::vector<agent::Vec2d> acts;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    dists.push_back(agent::read_output(out.row(i)).dist(c.log_std));
    acts.push_back({val.actions(i, 0), val.actions(i, 1)});
  }
  EXPECT_NEAR(bc_loss(dists, acts), best, 1e-9);
  // The running best never increases.
  double running = std::numeric_limits<double>::infinity();
  for (const auto& row : r.metrics) {
    const double next = std::min(running, row.bc_loss);
    EXPECT_LE(next, running);
    running = next;
  }
}

TEST(Metrics, RowFormat) {
  MetricsRow r;
  r.update = 3;
  r.env_steps = 9600;
  r.eval_reward_det = 80;
  r.alpha = 0.5;
  EXPECT_EQ(format_metrics_row(r), "3,9600,,80,0,0,0,0,0.5,0,0");
}

}  // namespace
}  // namespace gaildrive::train
