#ifndef GAILDRIVE_TRAIN_ROLLOUT_HPP_
#define GAILDRIVE_TRAIN_ROLLOUT_HPP_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "gaildrive/agent/networks.hpp"
#include "gaildrive/agent/policy.hpp"
#include "gaildrive/common/random.hpp"
#include "gaildrive/nn/network.hpp"
#include "gaildrive/sim/environment.hpp"

namespace gaildrive::train {

// N environments stepped in lockstep, each with its own RNG stream derived
// from (seed, env index), so results do not depend on scheduling.
class VecEnv {
 public:
  VecEnv(const sim::RouteSpec& route, const sim::EnvConfig& config, std::size_t n, std::uint64_t seed);

  std::size_t size() const { return envs_.size(); }
  sim::Environment& env(std::size_t i) { return envs_[i]; }
  Rng& rng(std::size_t i) { return rngs_[i]; }
  const sim::Observation& observation(std::size_t i) const { return obs_[i]; }
  void set_observation(std::size_t i, sim::Observation obs) { obs_[i] = std::move(obs); }

 private:
  std::vector<sim::Environment> envs_;
  std::vector<Rng> rngs_;
  std::vector<sim::Observation> obs_;
};

// Env-major storage: row e * steps + t is step t of environment e.
struct TransitionBatch {
  std::size_t n_envs = 0;
  std::size_t steps = 0;
  nn::Tensor raw;                       // T x raw_width, unscaled records
  std::vector<agent::Vec2d> actions;    // raw sampled actions
  std::vector<double> log_prob_old;
  std::vector<double> value_old;
  std::vector<double> rewards;          // filled by assign_rewards
  std::vector<std::uint8_t> dones;      // episode ended at this step
  std::vector<std::size_t> env_index;
  std::vector<double> bootstrap;        // V(s_T) per env
  std::size_t episodes_finished = 0;

  std::size_t size() const { return actions.size(); }
};

struct RolloutOptions {
  agent::Vec2d log_std = agent::kDefaultLogStd;
  std::size_t threads = 1;  // env stepping workers
};

// Advances every environment exactly `steps` times under the frozen policy,
// resetting environments whose episode ends.
TransitionBatch collect_rollout(const nn::Network& policy, const agent::InputEncoder& encoder, VecEnv& envs,
                                std::size_t steps, const RolloutOptions& options = {});

// Discriminator rows for the batch: observation plus the executed (clamped) action.
nn::Tensor disc_rows(const TransitionBatch& batch, const agent::InputEncoder& encoder);

// How critic scores become rewards.
//   kLinear: r = D(s, a).
//   kSigmoid: r = 1 / (1 + exp(-D(s, a))), always in (0, 1).
enum class RewardTransform : std::uint8_t { kLinear = 0, kSigmoid = 1 };

std::string_view to_string(RewardTransform t);
std::optional<RewardTransform> parse_reward_transform(std::string_view s);

// Fills batch.rewards from the critic, evaluated in chunks.
void assign_rewards(TransitionBatch& batch, const nn::Network& disc, const agent::InputEncoder& encoder,
                    RewardTransform transform = RewardTransform::kSigmoid);

}  // namespace gaildrive::train

#endif  // GAILDRIVE_TRAIN_ROLLOUT_HPP_
