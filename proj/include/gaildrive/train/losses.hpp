#ifndef GAILDRIVE_TRAIN_LOSSES_HPP_
#define GAILDRIVE_TRAIN_LOSSES_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "gaildrive/agent/policy.hpp"

namespace gaildrive::train {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// One environment's stream. done[t] means the episode ended at step t, so
// V[t + 1] (or `bootstrap` after the last step) is not used.
GaeResult gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const std::uint8_t> dones, double bootstrap, double gamma, double lambda);

// Zero mean, unit (population) variance; constant input maps to zeros.
std::vector<double> standardize(std::span<const double> x);

// Clipped surrogate term min(rho A, clip(rho, 1-eps, 1+eps) A) for one sample.
double clipped_surrogate(double rho, double advantage, double eps);
// d(surrogate)/d(rho): A where the unclipped branch is the minimum, else 0.
double clipped_surrogate_grad(double rho, double advantage, double eps);

double ppo_actor_loss(std::span<const double> log_prob_new, std::span<const double> log_prob_old,
                      std::span<const double> advantages, double eps);
double total_ppo_loss(double actor_loss, std::span<const double> values, std::span<const double> returns,
                      double entropy, double c1, double c2);

// -mean log_prob of the expert actions under the given distributions.
double bc_loss(std::span<const agent::PolicyDist> dists, std::span<const agent::Vec2d> expert_actions);

double alpha_schedule(double alpha0, double decay, std::uint64_t k);
double combined_actor_loss(double bc, double gail_actor, double alpha);

}  // namespace gaildrive::train

#endif  // GAILDRIVE_TRAIN_LOSSES_HPP_
