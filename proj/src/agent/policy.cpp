#include "gaildrive/agent/policy.hpp"

#include <cmath>
#include <numbers>

namespace gaildrive::agent {

namespace {
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
}

PolicyOutput read_output(std::span<const float> row) { return {row[0], row[1], row[2]}; }

double log_prob(const PolicyDist& d, const Vec2d& a) {
  double lp = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double z = (a[i] - d.mean[i]) * std::exp(-d.log_std[i]);
    lp += -0.5 * z * z - d.log_std[i] - kHalfLog2Pi;
  }
  return lp;
}

double entropy(const Vec2d& log_std) {
  return log_std[0] + log_std[1] + 2.0 * (0.5 + kHalfLog2Pi);
}

Vec2d log_prob_mean_grad(const PolicyDist& d, const Vec2d& a) {
  Vec2d g{};
  for (int i = 0; i < 2; ++i) g[i] = (a[i] - d.mean[i]) * std::exp(-2.0 * d.log_std[i]);
  return g;
}

Sample sample_action_with(const PolicyDist& d, const Vec2d& z) {
  Sample s;
  for (int i = 0; i < 2; ++i) s.raw[i] = d.mean[i] + std::exp(d.log_std[i]) * z[i];
  s.log_prob = log_prob(d, s.raw);
  return s;
}

Sample sample_action(const PolicyDist& d, Rng& rng) {
  const double z0 = standard_normal(rng);
  const double z1 = standard_normal(rng);
  return sample_action_with(d, {z0, z1});
}

Vec2d deterministic_action(const PolicyDist& d) { return d.mean; }

}  // namespace gaildrive::agent
