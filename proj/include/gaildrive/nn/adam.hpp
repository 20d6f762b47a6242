#ifndef GAILDRIVE_NN_ADAM_HPP_
#define GAILDRIVE_NN_ADAM_HPP_

#include <cstdint>
#include <vector>

#include "gaildrive/nn/network.hpp"

namespace gaildrive::nn {

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment estimates for every parameter block of one network.
template <typename T>
class BasicAdam {
 public:
  BasicAdam() = default;
  BasicAdam(const BasicNetwork<T>& net, AdamOptions options);

  // Bias-corrected Adam update from the accumulated gradients, which are
  // zeroed afterwards.
  void step(BasicNetwork<T>& net);

  std::uint64_t steps() const { return step_; }
  const AdamOptions& options() const { return options_; }
  void set_lr(double lr) { options_.lr = lr; }

 private:
  AdamOptions options_;
  std::uint64_t step_ = 0;
  std::vector<std::vector<T>> m_;
  std::vector<std::vector<T>> v_;
};

extern template class BasicAdam<float>;
extern template class BasicAdam<double>;

using Adam = BasicAdam<float>;

}  // namespace gaildrive::nn

#endif  // GAILDRIVE_NN_ADAM_HPP_
