#ifndef GAILDRIVE_TRAIN_CONFIG_HPP_
#define GAILDRIVE_TRAIN_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "gaildrive/agent/discriminator.hpp"
#include "gaildrive/agent/networks.hpp"
#include "gaildrive/agent/policy.hpp"
#include "gaildrive/expert/pid.hpp"
#include "gaildrive/sim/environment.hpp"
#include "gaildrive/sim/route.hpp"
#include "gaildrive/train/rollout.hpp"

namespace gaildrive::train {

enum class TrainMode : std::uint8_t { kBc = 0, kGail = 1, kBcGail = 2 };

std::string_view to_string(TrainMode m);
std::optional<TrainMode> parse_train_mode(std::string_view s);

struct RouteConfig {
  sim::RouteKind kind = sim::RouteKind::kShort;
  std::uint64_t seed = 0;
  // Only for kind == custom: a shortened long route.
  double length = 1000.0;
  std::size_t turns = 2;
  std::size_t dense = 304;
  std::size_t sparse = 8;

  sim::RouteSpec build() const;
};

struct TrainConfig {
  TrainMode mode = TrainMode::kBcGail;
  RouteConfig route;
  agent::ObsMode obs_mode = agent::ObsMode::kVector;
  agent::ObsScaling scaling;
  std::uint64_t seed = 1;

  // Rollouts and PPO.
  std::size_t n_envs = 10;
  std::size_t steps_per_actor = 240;
  double lr = 1e-4;
  std::size_t ppo_epochs = 4;
  std::size_t minibatch = 300;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.1;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  agent::Vec2d log_std = agent::kDefaultLogStd;
  double max_grad_norm = 0.0;  // 0 disables clipping

  // Discriminator.
  double disc_lr = 1e-3;
  double gp_coef = 10.0;
  double gp_eps = 1e-3;
  agent::GpDirection gp_direction = agent::GpDirection::kGradient;
  RewardTransform reward_transform = RewardTransform::kSigmoid;

  // BC term of the blended objective.
  double alpha0 = 0.9;
  double alpha_decay = 0.995;

  std::size_t total_updates = 200;

  // Plain behavior cloning.
  double bc_lr = 3e-4;
  std::size_t bc_epochs = 300;
  std::size_t bc_batch = 300;
  double train_fraction = 0.7;

  // Evaluation and output.
  std::size_t eval_every = 1;
  std::size_t eval_det_episodes = 1;
  std::size_t eval_stoch_episodes = 10;
  std::size_t eval_step_cap = 0;  // 0: twice the expert lap
  std::size_t checkpoint_every = 10;
  std::size_t threads = 1;
  bool record_wall_clock = false;
  // Stop once a deterministic evaluation reaches this fraction of the
  // maximum reward (0 disables early stopping).
  double stop_at_fraction = 0.0;

  sim::EnvConfig env;

  std::size_t timesteps_per_update() const { return n_envs * steps_per_actor; }
  // Throws ConfigError when invariants do not hold.
  void validate() const;
};

// Table I presets: short uses T = 2400, m = 300; long uses T = 7200, m = 900.
TrainConfig defaults_for(sim::RouteKind kind);

nlohmann::json to_json(const TrainConfig& c);
// Starts from `base` and applies the keys present; unknown keys throw ConfigError.
TrainConfig from_json(const nlohmann::json& j, TrainConfig base = {});

}  // namespace gaildrive::train

#endif  // GAILDRIVE_TRAIN_CONFIG_HPP_
