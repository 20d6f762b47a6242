#ifndef GAILDRIVE_NN_CHECKPOINT_HPP_
#define GAILDRIVE_NN_CHECKPOINT_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gaildrive/common/bytes.hpp"
#include "gaildrive/nn/network.hpp"

namespace gaildrive::nn {

// Checkpoint layout (all integers and floats little-endian):
//   "GDCK"  u16 version
//   u32 network count, then per network:
//     u32 layer count
//     per layer: u8 kind, i32 in, out, height, width, first, count, side_width, f32 slope
//     per layer: u32 parameter count, f32 parameters
//
// A checkpoint may bundle several networks (e.g. policy and discriminator).
inline constexpr char kCheckpointMagic[4] = {'G', 'D', 'C', 'K'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

Bytes save_params(const Network& net);
Bytes save_params(std::span<const Network* const> nets);

// Loads into networks whose layer specs must equal the stored table.
void load_params(Network& net, std::span<const std::uint8_t> bytes);
void load_params(std::span<Network* const> nets, std::span<const std::uint8_t> bytes);

// Reads the layer tables only, for building matching networks.
std::vector<std::vector<LayerSpec>> read_layer_tables(std::span<const std::uint8_t> bytes);

}  // namespace gaildrive::nn

#endif  // GAILDRIVE_NN_CHECKPOINT_HPP_
