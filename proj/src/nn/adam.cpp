#include "gaildrive/nn/adam.hpp"

#include <cmath>

namespace gaildrive::nn {

template <typename T>
BasicAdam<T>::BasicAdam(const BasicNetwork<T>& net, AdamOptions options) : options_(options) {
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    m_.emplace_back(net.params(i).size(), T(0));
    v_.emplace_back(net.params(i).size(), T(0));
  }
}

template <typename T>
void BasicAdam<T>::step(BasicNetwork<T>& net) {
  if (m_.size() != net.layers().size()) throw ConfigError("optimizer built for another network");
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double lr = options_.lr, eps = options_.eps;
  for (std::size_t i = 0; i < m_.size(); ++i) {
    auto p = net.params(i);
    auto g = net.grads(i);
    auto& m = m_[i];
    auto& v = v_[i];
    if (p.size() != m.size()) throw ConfigError("optimizer built for another network");
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = g[k];
      const double mk = b1 * m[k] + (1.0 - b1) * gk;
      const double vk = b2 * v[k] + (1.0 - b2) * gk * gk;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      const double update = lr * (mk / c1) / (std::sqrt(vk / c2) + eps);
      p[k] = static_cast<T>(p[k] - update);
      g[k] = T(0);
    }
  }
}

template class BasicAdam<float>;
template class BasicAdam<double>;

}  // namespace gaildrive::nn
