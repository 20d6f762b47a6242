#ifndef GAILDRIVE_EXPERT_DATASET_HPP_
#define GAILDRIVE_EXPERT_DATASET_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gaildrive/common/bytes.hpp"
#include "gaildrive/common/random.hpp"
#include "gaildrive/nn/tensor.hpp"
#include "gaildrive/sim/types.hpp"

namespace gaildrive::expert {

inline constexpr char kDatasetMagic[4] = {'G', 'D', 'R', 'V'};
inline constexpr std::uint16_t kDatasetVersion = 1;

struct DatasetManifest {
  std::string route = "short";
  std::size_t samples = 0;
  std::size_t obs_dim = sim::kContinuousDim;
  std::size_t act_dim = sim::kActionDim;
  bool raster = false;
  double rate_hz = 10.0;
  // Trajectory t covers samples [boundaries[t], boundaries[t + 1]).
  std::vector<std::size_t> boundaries{0};

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

// Records are fixed width: [continuous obs | raster (optional) | steer | throttle].
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(DatasetManifest manifest);

  const DatasetManifest& manifest() const { return manifest_; }
  std::size_t size() const { return manifest_.samples; }
  std::size_t trajectories() const { return manifest_.boundaries.size() - 1; }
  // Width of the observation part: obs_dim (+ raster).
  std::size_t input_width() const;
  std::size_t record_width() const { return input_width() + manifest_.act_dim; }

  std::span<const float> input(std::size_t i) const;
  sim::Action action(std::size_t i) const;
  const std::vector<float>& records() const { return records_; }

  void add(const sim::Observation& obs, const sim::Action& action);
  // Marks the end of the current trajectory.
  void end_trajectory();

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  DatasetManifest manifest_;
  std::vector<float> records_;
};

Bytes encode_dataset(const Dataset& d);
Dataset decode_dataset(std::span<const std::uint8_t> bytes);
void write_dataset(const std::string& path, const Dataset& d);
Dataset read_dataset(const std::string& path);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Seeded per-sample shuffle; the first floor(n * 7 / 10) go to training.
Split split_samples(std::size_t n, std::uint64_t seed, double train_fraction = 0.7);

struct Batch {
  nn::Tensor inputs;   // m x input_width, unscaled
  nn::Tensor actions;  // m x 2
};

// m samples drawn uniformly with replacement from `indices`.
Batch sample_batch(const Dataset& d, std::span<const std::size_t> indices, std::size_t m, Rng& rng);
// The listed samples in order.
Batch gather(const Dataset& d, std::span<const std::size_t> indices);

}  // namespace gaildrive::expert

#endif  // GAILDRIVE_EXPERT_DATASET_HPP_
