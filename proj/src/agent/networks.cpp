#include "gaildrive/agent/networks.hpp"

#include <algorithm>

#include "gaildrive/common/error.hpp"

namespace gaildrive::agent {

using nn::LayerSpec;

std::string_view to_string(ObsMode m) { return m == ObsMode::kRaster ? "raster" : "vector"; }

std::optional<ObsMode> parse_obs_mode(std::string_view s) {
  if (s == "vector") return ObsMode::kVector;
  if (s == "raster") return ObsMode::kRaster;
  return std::nullopt;
}

std::size_t InputEncoder::raw_width() const {
  return sim::kContinuousDim + (mode_ == ObsMode::kRaster ? sim::kRasterDim : 0);
}

std::vector<float> InputEncoder::raw(const sim::Observation& obs) const {
  const auto c = obs.continuous();
  std::vector<float> out(c.begin(), c.end());
  if (mode_ == ObsMode::kRaster) {
    if (obs.raster.size() != sim::kRasterDim) throw StateError("raster mode needs raster observations");
    out.insert(out.end(), obs.raster.begin(), obs.raster.end());
  }
  return out;
}

void InputEncoder::encode_policy(std::span<const float> raw, std::span<float> out) const {
  if (raw.size() < raw_width() || out.size() < policy_width()) {
    throw ConfigError("input row width does not match the observation mode");
  }
  const std::size_t offset = mode_ == ObsMode::kRaster ? sim::kRasterDim : 0;
  if (mode_ == ObsMode::kRaster) {
    std::copy_n(raw.begin() + sim::kContinuousDim, sim::kRasterDim, out.begin());
  }
  float* c = out.data() + offset;
  c[0] = static_cast<float>(raw[0] * scaling_.speed);
  c[1] = static_cast<float>(raw[1] * scaling_.target);
  c[2] = static_cast<float>(raw[2] * scaling_.target);
  std::copy_n(raw.begin() + 3, sim::kCommandSlots, c + 3);
}

void InputEncoder::encode_disc(std::span<const float> raw, double steer, double throttle,
                               std::span<float> out) const {
  if (out.size() < disc_width()) throw ConfigError("discriminator row too narrow");
  encode_policy(raw, out);
  out[policy_width()] = static_cast<float>(steer);
  out[policy_width() + 1] = static_cast<float>(throttle);
}

nn::Tensor InputEncoder::policy_batch(const nn::Tensor& raw) const {
  if (raw.cols() != raw_width()) throw ConfigError("batch width does not match the observation mode");
  nn::Tensor out({raw.rows(), policy_width()});
  for (std::size_t r = 0; r < raw.rows(); ++r) encode_policy(raw.row(r), out.row(r));
  return out;
}

nn::Tensor InputEncoder::disc_batch(const nn::Tensor& raw, const nn::Tensor& actions) const {
  if (raw.cols() != raw_width() || actions.cols() != sim::kActionDim || actions.rows() != raw.rows()) {
    throw ConfigError("discriminator batch shapes do not match");
  }
  nn::Tensor out({raw.rows(), disc_width()});
  for (std::size_t r = 0; r < raw.rows(); ++r) encode_disc(raw.row(r), actions(r, 0), actions(r, 1), out.row(r));
  return out;
}

namespace {

// Backbone up to the hidden layer activation; `side` is the width of the
// continuous inputs that join after the conv block.
std::vector<LayerSpec> backbone(ObsMode mode, int side) {
  std::vector<LayerSpec> layers;
  int features = side;
  if (mode == ObsMode::kRaster) {
    int channels = static_cast<int>(sim::kRasterChannels);
    int size = static_cast<int>(sim::kRasterSize);
    for (int out : kConvChannels) {
      layers.push_back(LayerSpec::conv2d(channels, out, size, size));
      layers.push_back(LayerSpec::leaky_relu());
      channels = out;
      size /= 2;
    }
    layers.push_back(LayerSpec::flatten());
    layers.push_back(LayerSpec::concat(side));
    features = channels * size * size + side;
  }
  layers.push_back(LayerSpec::dense(features, kHiddenUnits));
  layers.push_back(LayerSpec::leaky_relu());
  return layers;
}

}  // namespace

std::vector<LayerSpec> actor_critic_layers(ObsMode mode) {
  auto layers = backbone(mode, static_cast<int>(sim::kContinuousDim));
  layers.push_back(LayerSpec::dense(kHiddenUnits, 3));
  layers.push_back(LayerSpec::tanh(0, 1));
  layers.push_back(LayerSpec::sigmoid(1, 1));
  return layers;
}

std::vector<LayerSpec> discriminator_layers(ObsMode mode) {
  auto layers = backbone(mode, static_cast<int>(sim::kContinuousDim + sim::kActionDim));
  layers.push_back(LayerSpec::dense(kHiddenUnits, 1));
  return layers;
}

nn::Network build_actor_critic(ObsMode mode, std::uint64_t seed) {
  return nn::Network(actor_critic_layers(mode), seed);
}

nn::Network build_discriminator(ObsMode mode, std::uint64_t seed) {
  return nn::Network(discriminator_layers(mode), seed);
}

}  // namespace gaildrive::agent
