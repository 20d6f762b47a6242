#ifndef GAILDRIVE_AGENT_POLICY_HPP_
#define GAILDRIVE_AGENT_POLICY_HPP_

#include <array>
#include <span>

#include "gaildrive/common/random.hpp"
#include "gaildrive/sim/types.hpp"

namespace gaildrive::agent {

using Vec2d = std::array<double, 2>;

inline constexpr Vec2d kDefaultLogStd{-2.0, -3.2};

// Diagonal Gaussian over the raw (unclamped) [steer, throttle] action.
struct PolicyDist {
  Vec2d mean{0.0, 0.0};
  Vec2d log_std = kDefaultLogStd;
};

// Actor-critic output row: [steer_mean, throttle_mean, value].
struct PolicyOutput {
  double steer_mean = 0.0;
  double throttle_mean = 0.0;
  double value = 0.0;

  PolicyDist dist(const Vec2d& log_std) const { return {{steer_mean, throttle_mean}, log_std}; }
};

PolicyOutput read_output(std::span<const float> row);

double log_prob(const PolicyDist& d, const Vec2d& raw_action);
double entropy(const Vec2d& log_std);
// d log_prob / d mean.
Vec2d log_prob_mean_grad(const PolicyDist& d, const Vec2d& raw_action);

struct Sample {
  Vec2d raw;
  double log_prob = 0.0;
};

Sample sample_action(const PolicyDist& d, Rng& rng);
// raw = mean + sigma * z
Sample sample_action_with(const PolicyDist& d, const Vec2d& z);
Vec2d deterministic_action(const PolicyDist& d);

inline sim::Action to_action(const Vec2d& raw) { return {raw[0], raw[1]}; }

}  // namespace gaildrive::agent

#endif  // GAILDRIVE_AGENT_POLICY_HPP_
