#ifndef GAILDRIVE_NN_NETWORK_HPP_
#define GAILDRIVE_NN_NETWORK_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gaildrive/nn/layer.hpp"
#include "gaildrive/nn/tensor.hpp"

namespace gaildrive::nn {

// A fixed stack of layers over (batch, features) tensors.
//
// The input row is [stream | side]. The first layer consumes the stream
// part (for conv2d it is read as channels x height x width); a concat layer,
// if present, appends the `side` columns to the flattened stream. Networks
// without a concat layer take the stream only.
//
// forward() caches intermediates for backward() and is therefore not
// thread-safe; predict() keeps nothing and may be called concurrently on a
// const network.
template <typename T>
class BasicNetwork {
 public:
  using TensorType = BasicTensor<T>;

  BasicNetwork() = default;
  // Parameters start at zero; call initialize() for the default scheme.
  explicit BasicNetwork(std::vector<LayerSpec> layers);
  BasicNetwork(std::vector<LayerSpec> layers, std::uint64_t seed);

  // Weights uniform in +-sqrt(1/fan_in), biases zero.
  void initialize(std::uint64_t seed);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  std::size_t input_width() const { return stream_width_ + side_width_; }
  std::size_t side_width() const { return side_width_; }
  std::size_t output_width() const { return widths_.empty() ? 0 : widths_.back(); }
  std::size_t parameter_count() const;

  const TensorType& forward(const TensorType& input);
  TensorType predict(const TensorType& input) const;

  // Accumulates parameter gradients for the last forward() and returns the
  // gradient with respect to that forward's input.
  TensorType backward(const TensorType& output_grad);

  void zero_grad();
  bool has_cache() const { return !cache_.empty(); }
  void clear_cache() { cache_.clear(); }

  // Cached input of layer i (valid after forward()).
  const TensorType& layer_input(std::size_t i) const;

  std::span<T> params(std::size_t layer) { return params_[layer]; }
  std::span<const T> params(std::size_t layer) const { return params_[layer]; }
  std::span<T> grads(std::size_t layer) { return grads_[layer]; }
  std::span<const T> grads(std::size_t layer) const { return grads_[layer]; }

  template <typename U>
  BasicNetwork<U> convert() const {
    BasicNetwork<U> out(layers_);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      auto dst = out.params(i);
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = static_cast<U>(params_[i][k]);
    }
    return out;
  }

 private:
  TensorType run(const TensorType& input, std::vector<TensorType>* cache) const;

  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> widths_;  // output width of each layer
  std::size_t stream_width_ = 0;
  std::size_t side_width_ = 0;
  std::vector<std::vector<T>> params_;
  std::vector<std::vector<T>> grads_;
  // cache_[i] is the input of layer i; cache_.back() is the network output.
  std::vector<TensorType> cache_;
};

extern template class BasicNetwork<float>;
extern template class BasicNetwork<double>;

using Network = BasicNetwork<float>;

// Parameter count of a dense or conv2d layer.
std::size_t layer_param_count(const LayerSpec& spec);

}  // namespace gaildrive::nn

#endif  // GAILDRIVE_NN_NETWORK_HPP_
