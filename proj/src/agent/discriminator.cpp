#include "gaildrive/agent/discriminator.hpp"

#include <cmath>

#include "gaildrive/common/error.hpp"

namespace gaildrive::agent {

namespace {

template <typename T>
void check_single_output(const nn::BasicNetwork<T>& d) {
  if (d.output_width() != 1) throw ConfigError("discriminator must have a single output");
}

}  // namespace

template <typename T>
std::vector<double> directional_slopes(const nn::BasicNetwork<T>& d, const nn::BasicTensor<T>& points,
                                       const nn::BasicTensor<T>& directions, double eps) {
  check_single_output(d);
  if (points.shape() != directions.shape()) throw ConfigError("points and directions differ in shape");
  const std::size_t n = points.rows(), w = points.cols();
  nn::BasicTensor<T> probe({2 * n, w});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double x = points(r, c), v = directions(r, c);
      probe(r, c) = static_cast<T>(x + eps * v);
      probe(n + r, c) = static_cast<T>(x - eps * v);
    }
  }
  const auto out = d.predict(probe);
  std::vector<double> g(n);
  for (std::size_t r = 0; r < n; ++r) g[r] = (static_cast<double>(out[r]) - out[n + r]) / (2.0 * eps);
  return g;
}

template <typename T>
DiscLossResult disc_loss(nn::BasicNetwork<T>& d, const nn::BasicTensor<T>& expert,
                         const nn::BasicTensor<T>& policy, double lambda2, double eps_fd, Rng& rng,
                         GpDirection direction) {
  check_single_output(d);
  if (expert.shape() != policy.shape() || expert.cols() != d.input_width()) {
    throw ConfigError("expert and policy batches must match each other and the discriminator input");
  }
  const std::size_t b = expert.rows(), w = expert.cols();
  std::vector<double> us(b);
  for (auto& u : us) u = uniform01(rng);

  // Input gradient of D at every interpolate, for the gradient direction.
  nn::BasicTensor<T> input_grad;
  if (direction == GpDirection::kGradient) {
    nn::BasicTensor<T> hat({b, w});
    for (std::size_t r = 0; r < b; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        hat(r, c) = static_cast<T>(us[r] * expert(r, c) + (1.0 - us[r]) * policy(r, c));
      }
    }
    d.forward(hat);
    input_grad = d.backward(nn::BasicTensor<T>({b, 1}, T(1)));
  }

  // Stacked rows: [expert; policy; x + eps v; x - eps v].
  nn::BasicTensor<T> x({4 * b, w});
  std::vector<double> diff(w);
  for (std::size_t r = 0; r < b; ++r) {
    const double u = us[r];
    double norm2 = 0.0;
    for (std::size_t c = 0; c < w; ++c) {
      diff[c] = static_cast<double>(policy(r, c)) - expert(r, c);
      norm2 += diff[c] * diff[c];
    }
    if (direction == GpDirection::kGradient) {
      double gn2 = 0.0;
      for (std::size_t c = 0; c < w; ++c) gn2 += static_cast<double>(input_grad(r, c)) * input_grad(r, c);
      // A flat critic has no gradient direction; keep the interpolation one.
      if (gn2 > 1e-24) {
        for (std::size_t c = 0; c < w; ++c) diff[c] = input_grad(r, c);
        norm2 = gn2;
      }
    }
    const double inv = 1.0 / std::max(std::sqrt(norm2), 1e-8);
    for (std::size_t c = 0; c < w; ++c) {
      const double e = expert(r, c), p = policy(r, c);
      const double hat = u * e + (1.0 - u) * p;
      const double v = diff[c] * inv;
      x(r, c) = expert(r, c);
      x(b + r, c) = policy(r, c);
      x(2 * b + r, c) = static_cast<T>(hat + eps_fd * v);
      x(3 * b + r, c) = static_cast<T>(hat - eps_fd * v);
    }
  }

  d.zero_grad();
  const auto& out = d.forward(x);
  DiscLossResult res;
  nn::BasicTensor<T> grad({4 * b, 1});
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t r = 0; r < b; ++r) {
    res.expert_score += out[r] * inv_b;
    res.policy_score += out[b + r] * inv_b;
    const double g = (static_cast<double>(out[2 * b + r]) - out[3 * b + r]) / (2.0 * eps_fd);
    const double excess = std::abs(g) - 1.0;
    res.penalty += excess * excess * inv_b;
    const double sign = g > 0 ? 1.0 : (g < 0 ? -1.0 : 0.0);
    const double dg = lambda2 * 2.0 * excess * sign * inv_b / (2.0 * eps_fd);
    grad[r] = static_cast<T>(-inv_b);
    grad[b + r] = static_cast<T>(inv_b);
    grad[2 * b + r] = static_cast<T>(dg);
    grad[3 * b + r] = static_cast<T>(-dg);
  }
  res.loss = res.policy_score - res.expert_score + lambda2 * res.penalty;
  if (!std::isfinite(res.loss)) throw NumericError("discriminator loss is not finite");
  d.backward(grad);
  return res;
}

std::vector<double> disc_rewards(const nn::Network& d, const nn::Tensor& rows) {
  check_single_output(d);
  const auto out = d.predict(rows);
  return std::vector<double>(out.storage().begin(), out.storage().end());
}

template std::vector<double> directional_slopes(const nn::BasicNetwork<float>&, const nn::BasicTensor<float>&,
                                                const nn::BasicTensor<float>&, double);
template std::vector<double> directional_slopes(const nn::BasicNetwork<double>&, const nn::BasicTensor<double>&,
                                                const nn::BasicTensor<double>&, double);
template DiscLossResult disc_loss(nn::BasicNetwork<float>&, const nn::BasicTensor<float>&,
                                  const nn::BasicTensor<float>&, double, double, Rng&, GpDirection);
template DiscLossResult disc_loss(nn::BasicNetwork<double>&, const nn::BasicTensor<double>&,
                                  const nn::BasicTensor<double>&, double, double, Rng&, GpDirection);

std::string_view to_string(GpDirection g) {
  return g == GpDirection::kGradient ? "gradient" : "interpolation";
}

std::optional<GpDirection> parse_gp_direction(std::string_view s) {
  if (s == "interpolation") return GpDirection::kInterpolation;
  if (s == "gradient") return GpDirection::kGradient;
  return std::nullopt;
}

}  // namespace gaildrive::agent
