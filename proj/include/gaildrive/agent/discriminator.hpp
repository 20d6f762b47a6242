#ifndef GAILDRIVE_AGENT_DISCRIMINATOR_HPP_
#define GAILDRIVE_AGENT_DISCRIMINATOR_HPP_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "gaildrive/common/random.hpp"
#include "gaildrive/nn/network.hpp"

namespace gaildrive::agent {

inline constexpr double kDefaultGpEpsilon = 1e-3;
inline constexpr double kDefaultGpCoef = 10.0;

// Direction of the finite-difference slope in the penalty.
//   kInterpolation: v = (xP - xE) / |xP - xE|.
//   kGradient: v = grad_x D(x) / |grad_x D(x)| at the interpolate, held
//     constant. The slope along it is |grad_x D|, so the penalty matches the
//     gradient-norm penalty and the slope cannot get stuck at the wrong sign.
enum class GpDirection : std::uint8_t { kInterpolation = 0, kGradient = 1 };

std::string_view to_string(GpDirection g);
std::optional<GpDirection> parse_gp_direction(std::string_view s);

struct DiscLossResult {
  double loss = 0.0;     // mean D(policy) - mean D(expert) + lambda2 * penalty
  double penalty = 0.0;  // mean (|g| - 1)^2 over the interpolates
  double expert_score = 0.0;
  double policy_score = 0.0;
};

// Directional slope of D at each row of `points` along the matching row of
// `directions`: (D(x + eps v) - D(x - eps v)) / (2 eps).
template <typename T>
std::vector<double> directional_slopes(const nn::BasicNetwork<T>& d, const nn::BasicTensor<T>& points,
                                       const nn::BasicTensor<T>& directions, double eps);

// WGAN critic loss with a finite-difference gradient penalty. Interpolates
// x = u xE + (1 - u) xP with u ~ U(0, 1) per row, slope direction chosen by
// `direction`. Leaves the gradient of `loss` in d's gradient buffers
// (previous gradients are cleared). Row counts and widths must match.
template <typename T>
DiscLossResult disc_loss(nn::BasicNetwork<T>& d, const nn::BasicTensor<T>& expert,
                         const nn::BasicTensor<T>& policy, double lambda2, double eps_fd, Rng& rng,
                         GpDirection direction = GpDirection::kInterpolation);

// Per-row reward D(s, a) on an already encoded discriminator batch.
std::vector<double> disc_rewards(const nn::Network& d, const nn::Tensor& rows);

}  // namespace gaildrive::agent

#endif  // GAILDRIVE_AGENT_DISCRIMINATOR_HPP_
