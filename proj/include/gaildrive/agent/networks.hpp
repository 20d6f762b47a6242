#ifndef GAILDRIVE_AGENT_NETWORKS_HPP_
#define GAILDRIVE_AGENT_NETWORKS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gaildrive/nn/network.hpp"
#include "gaildrive/sim/types.hpp"

namespace gaildrive::agent {

enum class ObsMode : std::uint8_t { kVector = 0, kRaster = 1 };

std::string_view to_string(ObsMode m);
std::optional<ObsMode> parse_obs_mode(std::string_view s);

inline constexpr int kHiddenUnits = 256;
inline constexpr int kConvChannels[] = {32, 64, 128, 256};

// Fixed rescaling of the continuous inputs before they reach a network:
// speed (m/s) and target (m) are brought to roughly unit range.
struct ObsScaling {
  double speed = 0.2;
  double target = 0.05;

  static ObsScaling identity() { return {1.0, 1.0}; }
  friend bool operator==(const ObsScaling&, const ObsScaling&) = default;
};

// Maps raw records [continuous(9) | raster?] (the dataset layout) to
// network rows. Raster rows are [raster | scaled continuous] so the conv
// stack sees the image and the concat layer appends the rest; the
// discriminator row adds [steer, throttle] at the very end.
class InputEncoder {
 public:
  InputEncoder(ObsMode mode, ObsScaling scaling = {}) : mode_(mode), scaling_(scaling) {}

  ObsMode mode() const { return mode_; }
  const ObsScaling& scaling() const { return scaling_; }
  std::size_t raw_width() const;
  std::size_t policy_width() const { return raw_width(); }
  std::size_t disc_width() const { return raw_width() + sim::kActionDim; }

  // Raw record of an environment observation.
  std::vector<float> raw(const sim::Observation& obs) const;
  void encode_policy(std::span<const float> raw, std::span<float> out) const;
  void encode_disc(std::span<const float> raw, double steer, double throttle, std::span<float> out) const;

  // Row-wise versions; `actions` is rows x 2.
  nn::Tensor policy_batch(const nn::Tensor& raw) const;
  nn::Tensor disc_batch(const nn::Tensor& raw, const nn::Tensor& actions) const;

 private:
  ObsMode mode_;
  ObsScaling scaling_;
};

// Output [steer_mean (tanh), throttle_mean (sigmoid), value (linear)].
std::vector<nn::LayerSpec> actor_critic_layers(ObsMode mode);
// Output: one unbounded score.
std::vector<nn::LayerSpec> discriminator_layers(ObsMode mode);

nn::Network build_actor_critic(ObsMode mode, std::uint64_t seed);
nn::Network build_discriminator(ObsMode mode, std::uint64_t seed);

}  // namespace gaildrive::agent

#endif  // GAILDRIVE_AGENT_NETWORKS_HPP_
