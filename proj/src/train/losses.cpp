#include "gaildrive/train/losses.hpp"

#include <algorithm>
#include <cmath>

#include "gaildrive/common/error.hpp"

namespace gaildrive::train {

GaeResult gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const std::uint8_t> dones, double bootstrap, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) throw ConfigError("gae inputs differ in length");
  GaeResult out{std::vector<double>(n), std::vector<double>(n)};
  double next_adv = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double live = dones[i] ? 0.0 : 1.0;
    const double next_value = i + 1 < n ? values[i + 1] : bootstrap;
    const double delta = rewards[i] + gamma * next_value * live - values[i];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[i] = next_adv;
    out.returns[i] = next_adv + values[i];
  }
  return out;
}

std::vector<double> standardize(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  if (out.empty()) return out;
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(out.size());
  double var = 0.0;
  for (double v : out) var += (v - mean) * (v - mean);
  var /= static_cast<double>(out.size());
  const double sd = std::sqrt(var);
  for (double& v : out) v = sd > 1e-12 ? (v - mean) / sd : 0.0;
  return out;
}

double clipped_surrogate(double rho, double a, double eps) {
  return std::min(rho * a, std::clamp(rho, 1.0 - eps, 1.0 + eps) * a);
}

double clipped_surrogate_grad(double rho, double a, double eps) {
  return rho * a <= std::clamp(rho, 1.0 - eps, 1.0 + eps) * a ? a : 0.0;
}

double ppo_actor_loss(std::span<const double> lp_new, std::span<const double> lp_old,
                      std::span<const double> adv, double eps) {
  if (lp_new.size() != lp_old.size() || lp_new.size() != adv.size() || adv.empty()) {
    throw ConfigError("ppo_actor_loss inputs differ in length or are empty");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < adv.size(); ++i) s += clipped_surrogate(std::exp(lp_new[i] - lp_old[i]), adv[i], eps);
  return -s / static_cast<double>(adv.size());
}

double total_ppo_loss(double actor_loss, std::span<const double> values, std::span<const double> returns,
                      double entropy, double c1, double c2) {
  if (values.size() != returns.size() || values.empty()) throw ConfigError("value inputs differ in length");
  double mse = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) mse += (values[i] - returns[i]) * (values[i] - returns[i]);
  mse /= static_cast<double>(values.size());
  double total = actor_loss + c1 * mse;
  if (c2 != 0.0) total -= c2 * entropy;
  return total;
}

double bc_loss(std::span<const agent::PolicyDist> dists, std::span<const agent::Vec2d> actions) {
  if (dists.size() != actions.size() || dists.empty()) throw ConfigError("bc_loss inputs differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < dists.size(); ++i) s -= agent::log_prob(dists[i], actions[i]);
  return s / static_cast<double>(dists.size());
}

double alpha_schedule(double alpha0, double decay, std::uint64_t k) {
  if (!(alpha0 >= 0.0 && alpha0 <= 1.0) || !(decay > 0.0 && decay <= 1.0)) {
    throw ConfigError("alpha schedule needs 0 <= alpha0 <= 1 and 0 < decay <= 1");
  }
  return alpha0 * std::pow(decay, static_cast<double>(k));
}

double combined_actor_loss(double bc, double gail_actor, double alpha) {
  return alpha * bc + (1.0 - alpha) * gail_actor;
}

}  // namespace gaildrive::train
