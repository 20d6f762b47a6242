#ifndef GAILDRIVE_NN_TENSOR_HPP_
#define GAILDRIVE_NN_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gaildrive/common/error.hpp"

namespace gaildrive::nn {

// Dense row-major array. Networks treat dimension 0 as the batch and the
// remaining dimensions as one flattened feature row.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;

  explicit BasicTensor(std::vector<std::size_t> shape, T fill = T(0))
      : shape_(std::move(shape)) {
    check_shape();
    data_.assign(element_count(shape_), fill);
  }

  BasicTensor(std::vector<std::size_t> shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape();
    if (element_count(shape_) != data_.size()) {
      throw ConfigError("tensor data size does not match shape");
    }
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return rows() == 0 ? 0 : data_.size() / rows(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  std::span<T> row(std::size_t r) { return std::span<T>(data_).subspan(r * cols(), cols()); }
  std::span<const T> row(std::size_t r) const {
    return std::span<const T>(data_).subspan(r * cols(), cols());
  }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  T operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  T& operator[](std::size_t i) { return data_[i]; }
  T operator[](std::size_t i) const { return data_[i]; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <typename U>
  BasicTensor<U> cast() const {
    return BasicTensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

  static std::size_t element_count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>());
  }

 private:
  void check_shape() const {
    if (shape_.empty()) throw ConfigError("tensor shape must have at least one dimension");
    for (auto d : shape_) {
      if (d == 0) throw ConfigError("tensor dimensions must be >= 1");
    }
  }

  std::vector<std::size_t> shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;

std::string shape_string(const std::vector<std::size_t>& shape);

}  // namespace gaildrive::nn

#endif  // GAILDRIVE_NN_TENSOR_HPP_
