#ifndef GAILDRIVE_NN_LAYER_HPP_
#define GAILDRIVE_NN_LAYER_HPP_

#include <cstdint>
#include <string>

namespace gaildrive::nn {

enum class LayerKind : std::uint8_t {
  kDense = 0,
  kConv2d = 1,
  kLeakyRelu = 2,
  kTanh = 3,
  kSigmoid = 4,
  kFlatten = 5,
  kConcat = 6,
};

std::string to_string(LayerKind kind);

inline constexpr int kConvKernel = 4;
inline constexpr int kConvStride = 2;
inline constexpr int kConvPadding = 1;
inline constexpr float kDefaultLeakySlope = 0.01f;

// Static description of one layer. Which fields matter depends on `kind`:
//   dense       in_features -> out_features
//   conv2d      in_channels x height x width -> out_channels x height/2 x width/2
//   leaky_relu  slope
//   tanh/sigmoid  applied to columns [first, first + count); count < 0 means all
//   concat      appends the network's `side_width` trailing input columns
struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  int in = 0;
  int out = 0;
  int height = 0;
  int width = 0;
  int first = 0;
  int count = -1;
  int side_width = 0;
  float slope = kDefaultLeakySlope;

  static LayerSpec dense(int in_features, int out_features);
  static LayerSpec conv2d(int in_channels, int out_channels, int height, int width);
  static LayerSpec leaky_relu(float slope = kDefaultLeakySlope);
  static LayerSpec tanh(int first = 0, int count = -1);
  static LayerSpec sigmoid(int first = 0, int count = -1);
  static LayerSpec flatten();
  static LayerSpec concat(int side_width);

  bool has_params() const { return kind == LayerKind::kDense || kind == LayerKind::kConv2d; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

}  // namespace gaildrive::nn

#endif  // GAILDRIVE_NN_LAYER_HPP_
