#include "gaildrive/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "gaildrive/common/random.hpp"

namespace gaildrive::nn {

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
  os << ")";
  return os.str();
}

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense: return "dense";
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kLeakyRelu: return "leaky_relu";
    case LayerKind::kTanh: return "tanh";
    case LayerKind::kSigmoid: return "sigmoid";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kConcat: return "concat";
  }
  return "unknown";
}

LayerSpec LayerSpec::dense(int in_features, int out_features) {
  LayerSpec s;
  s.kind = LayerKind::kDense;
  s.in = in_features;
  s.out = out_features;
  return s;
}

LayerSpec LayerSpec::conv2d(int in_channels, int out_channels, int height, int width) {
  LayerSpec s;
  s.kind = LayerKind::kConv2d;
  s.in = in_channels;
  s.out = out_channels;
  s.height = height;
  s.width = width;
  return s;
}

LayerSpec LayerSpec::leaky_relu(float slope) {
  LayerSpec s;
  s.kind = LayerKind::kLeakyRelu;
  s.slope = slope;
  return s;
}

LayerSpec LayerSpec::tanh(int first, int count) {
  LayerSpec s;
  s.kind = LayerKind::kTanh;
  s.first = first;
  s.count = count;
  return s;
}

LayerSpec LayerSpec::sigmoid(int first, int count) {
  LayerSpec s;
  s.kind = LayerKind::kSigmoid;
  s.first = first;
  s.count = count;
  return s;
}

LayerSpec LayerSpec::flatten() {
  LayerSpec s;
  s.kind = LayerKind::kFlatten;
  return s;
}

LayerSpec LayerSpec::concat(int side_width) {
  LayerSpec s;
  s.kind = LayerKind::kConcat;
  s.side_width = side_width;
  return s;
}

std::size_t layer_param_count(const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::kDense:
      return static_cast<std::size_t>(spec.in) * spec.out + spec.out;
    case LayerKind::kConv2d:
      return static_cast<std::size_t>(spec.out) * spec.in * kConvKernel * kConvKernel + spec.out;
    default:
      return 0;
  }
}

namespace {

int conv_out_dim(int in) { return (in - kConvKernel + 2 * kConvPadding) / kConvStride + 1; }

std::pair<std::size_t, std::size_t> column_range(const LayerSpec& s, std::size_t width) {
  std::size_t first = static_cast<std::size_t>(s.first);
  std::size_t count = s.count < 0 ? width - first : static_cast<std::size_t>(s.count);
  return {first, first + count};
}

template <typename T>
void dense_forward(const LayerSpec& s, std::span<const T> p, const BasicTensor<T>& x,
                   BasicTensor<T>& y) {
  const std::size_t in = s.in, out = s.out, batch = x.rows();
  const T* w = p.data();
  const T* bias = p.data() + in * out;
  for (std::size_t b = 0; b < batch; ++b) {
    auto xr = x.row(b);
    auto yr = y.row(b);
    std::copy(bias, bias + out, yr.begin());
    for (std::size_t i = 0; i < in; ++i) {
      const T xi = xr[i];
      const T* wi = w + i * out;
      for (std::size_t o = 0; o < out; ++o) yr[o] += xi * wi[o];
    }
  }
}

template <typename T>
void dense_backward(const LayerSpec& s, std::span<const T> p, std::span<T> g,
                    const BasicTensor<T>& x, const BasicTensor<T>& gy, BasicTensor<T>& gx) {
  const std::size_t in = s.in, out = s.out, batch = x.rows();
  const T* w = p.data();
  T* gw = g.data();
  T* gb = g.data() + in * out;
  for (std::size_t b = 0; b < batch; ++b) {
    auto xr = x.row(b);
    auto gyr = gy.row(b);
    auto gxr = gx.row(b);
    for (std::size_t o = 0; o < out; ++o) gb[o] += gyr[o];
    for (std::size_t i = 0; i < in; ++i) {
      const T xi = xr[i];
      const T* wi = w + i * out;
      T* gwi = gw + i * out;
      T acc = 0;
      for (std::size_t o = 0; o < out; ++o) {
        gwi[o] += xi * gyr[o];
        acc += wi[o] * gyr[o];
      }
      gxr[i] = acc;
    }
  }
}

// Weight layout: [out_channel][in_channel][ky][kx], then one bias per output channel.
template <typename T>
void conv_forward(const LayerSpec& s, std::span<const T> p, const BasicTensor<T>& x,
                  BasicTensor<T>& y) {
  const int C = s.in, O = s.out, H = s.height, W = s.width;
  const int Ho = conv_out_dim(H), Wo = conv_out_dim(W);
  const std::size_t batch = x.rows();
  const T* w = p.data();
  const T* bias = p.data() + static_cast<std::size_t>(O) * C * 16;
  for (std::size_t b = 0; b < batch; ++b) {
    const T* xb = x.row(b).data();
    T* yb = y.row(b).data();
    for (int o = 0; o < O; ++o) {
      T* yo = yb + static_cast<std::size_t>(o) * Ho * Wo;
      std::fill(yo, yo + Ho * Wo, bias[o]);
      for (int c = 0; c < C; ++c) {
        const T* xc = xb + static_cast<std::size_t>(c) * H * W;
        const T* wk = w + (static_cast<std::size_t>(o) * C + c) * 16;
        for (int ky = 0; ky < kConvKernel; ++ky) {
          for (int kx = 0; kx < kConvKernel; ++kx) {
            const T wv = wk[ky * kConvKernel + kx];
            for (int oy = 0; oy < Ho; ++oy) {
              const int iy = oy * kConvStride - kConvPadding + ky;
              if (iy < 0 || iy >= H) continue;
              const T* xrow = xc + static_cast<std::size_t>(iy) * W;
              T* yrow = yo + static_cast<std::size_t>(oy) * Wo;
              for (int ox = 0; ox < Wo; ++ox) {
                const int ix = ox * kConvStride - kConvPadding + kx;
                if (ix < 0 || ix >= W) continue;
                yrow[ox] += wv * xrow[ix];
              }
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv_backward(const LayerSpec& s, std::span<const T> p, std::span<T> g,
                   const BasicTensor<T>& x, const BasicTensor<T>& gy, BasicTensor<T>& gx) {
  const int C = s.in, O = s.out, H = s.height, W = s.width;
  const int Ho = conv_out_dim(H), Wo = conv_out_dim(W);
  const std::size_t batch = x.rows();
  const T* w = p.data();
  T* gw = g.data();
  T* gb = g.data() + static_cast<std::size_t>(O) * C * 16;
  gx.fill(T(0));
  for (std::size_t b = 0; b < batch; ++b) {
    const T* xb = x.row(b).data();
    const T* gyb = gy.row(b).data();
    T* gxb = gx.row(b).data();
    for (int o = 0; o < O; ++o) {
      const T* gyo = gyb + static_cast<std::size_t>(o) * Ho * Wo;
      for (int k = 0; k < Ho * Wo; ++k) gb[o] += gyo[k];
      for (int c = 0; c < C; ++c) {
        const T* xc = xb + static_cast<std::size_t>(c) * H * W;
        T* gxc = gxb + static_cast<std::size_t>(c) * H * W;
        const std::size_t wbase = (static_cast<std::size_t>(o) * C + c) * 16;
        for (int ky = 0; ky < kConvKernel; ++ky) {
          for (int kx = 0; kx < kConvKernel; ++kx) {
            const T wv = w[wbase + ky * kConvKernel + kx];
            T acc = 0;
            for (int oy = 0; oy < Ho; ++oy) {
              const int iy = oy * kConvStride - kConvPadding + ky;
              if (iy < 0 || iy >= H) continue;
              const T* xrow = xc + static_cast<std::size_t>(iy) * W;
              T* gxrow = gxc + static_cast<std::size_t>(iy) * W;
              const T* gyrow = gyo + static_cast<std::size_t>(oy) * Wo;
              for (int ox = 0; ox < Wo; ++ox) {
                const int ix = ox * kConvStride - kConvPadding + kx;
                if (ix < 0 || ix >= W) continue;
                acc += xrow[ix] * gyrow[ox];
                gxrow[ix] += wv * gyrow[ox];
              }
            }
            gw[wbase + ky * kConvKernel + kx] += acc;
          }
        }
      }
    }
  }
}

template <typename T>
T sigmoid(T v) {
  return v >= 0 ? T(1) / (T(1) + std::exp(-v)) : std::exp(v) / (T(1) + std::exp(v));
}

}  // namespace

template <typename T>
BasicNetwork<T>::BasicNetwork(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("network needs at least one layer");
  const auto& first = layers_.front();
  if (first.kind == LayerKind::kDense) {
    stream_width_ = static_cast<std::size_t>(first.in);
  } else if (first.kind == LayerKind::kConv2d) {
    stream_width_ = static_cast<std::size_t>(first.in) * first.height * first.width;
  } else {
    throw ConfigError("first layer must be dense or conv2d");
  }

  std::size_t width = stream_width_;
  bool seen_concat = false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& s = layers_[i];
    const std::string where = "layer " + std::to_string(i) + " (" + to_string(s.kind) + ")";
    switch (s.kind) {
      case LayerKind::kDense:
        if (s.in <= 0 || s.out <= 0 || static_cast<std::size_t>(s.in) != width) {
          throw ConfigError(where + ": expects " + std::to_string(s.in) + " inputs, stream has " +
                            std::to_string(width));
        }
        width = static_cast<std::size_t>(s.out);
        break;
      case LayerKind::kConv2d: {
        if (s.in <= 0 || s.out <= 0 || s.height < 2 || s.width < 2 || s.height % 2 ||
            s.width % 2) {
          throw ConfigError(where + ": invalid conv geometry");
        }
        const std::size_t expected = static_cast<std::size_t>(s.in) * s.height * s.width;
        if (expected != width) throw ConfigError(where + ": input size mismatch");
        width = static_cast<std::size_t>(s.out) * conv_out_dim(s.height) * conv_out_dim(s.width);
        break;
      }
      case LayerKind::kTanh:
      case LayerKind::kSigmoid: {
        if (s.first < 0 || static_cast<std::size_t>(s.first) > width ||
            (s.count >= 0 && static_cast<std::size_t>(s.first + s.count) > width)) {
          throw ConfigError(where + ": column range outside stream");
        }
        break;
      }
      case LayerKind::kLeakyRelu:
      case LayerKind::kFlatten:
        break;
      case LayerKind::kConcat:
        if (seen_concat) throw ConfigError("at most one concat layer is supported");
        if (s.side_width <= 0) throw ConfigError(where + ": side width must be positive");
        seen_concat = true;
        side_width_ = static_cast<std::size_t>(s.side_width);
        width += side_width_;
        break;
    }
    widths_.push_back(width);
    params_.emplace_back(layer_param_count(s), T(0));
    grads_.emplace_back(layer_param_count(s), T(0));
  }
}

template <typename T>
BasicNetwork<T>::BasicNetwork(std::vector<LayerSpec> layers, std::uint64_t seed)
    : BasicNetwork(std::move(layers)) {
  initialize(seed);
}

template <typename T>
void BasicNetwork<T>::initialize(std::uint64_t seed) {
  Rng rng(mix_seed(seed));
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& s = layers_[i];
    if (!s.has_params()) continue;
    const std::size_t fan_in =
        s.kind == LayerKind::kDense ? s.in : static_cast<std::size_t>(s.in) * 16;
    const std::size_t n_weights = params_[i].size() - static_cast<std::size_t>(s.out);
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t k = 0; k < n_weights; ++k) params_[i][k] = static_cast<T>(dist(rng));
    std::fill(params_[i].begin() + static_cast<std::ptrdiff_t>(n_weights), params_[i].end(), T(0));
  }
  zero_grad();
}

template <typename T>
std::size_t BasicNetwork<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

template <typename T>
typename BasicNetwork<T>::TensorType BasicNetwork<T>::run(const TensorType& input,
                                                          std::vector<TensorType>* cache) const {
  if (input.cols() != input_width()) {
    throw ConfigError("network input has " + std::to_string(input.cols()) +
                      " features per row, expected " + std::to_string(input_width()) +
                      " (shape " + shape_string(input.shape()) + ")");
  }
  const std::size_t batch = input.rows();

  TensorType side;
  TensorType x;
  if (side_width_ > 0) {
    x = TensorType({batch, stream_width_});
    side = TensorType({batch, side_width_});
    for (std::size_t b = 0; b < batch; ++b) {
      auto in = input.row(b);
      std::copy(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(stream_width_),
                x.row(b).begin());
      std::copy(in.begin() + static_cast<std::ptrdiff_t>(stream_width_), in.end(),
                side.row(b).begin());
    }
  } else {
    x = input;
  }

  if (cache) {
    cache->clear();
    cache->reserve(layers_.size() + 1);
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& s = layers_[i];
    TensorType y({batch, widths_[i]});
    switch (s.kind) {
      case LayerKind::kDense:
        dense_forward<T>(s, params_[i], x, y);
        break;
      case LayerKind::kConv2d:
        conv_forward<T>(s, params_[i], x, y);
        break;
      case LayerKind::kLeakyRelu: {
        const T slope = static_cast<T>(s.slope);
        auto src = x.data();
        auto dst = y.data();
        for (std::size_t k = 0; k < src.size(); ++k) dst[k] = src[k] > 0 ? src[k] : slope * src[k];
        break;
      }
      case LayerKind::kTanh:
      case LayerKind::kSigmoid: {
        y = x;
        auto [lo, hi] = column_range(s, x.cols());
        for (std::size_t b = 0; b < batch; ++b) {
          auto r = y.row(b);
          for (std::size_t c = lo; c < hi; ++c) {
            r[c] = s.kind == LayerKind::kTanh ? std::tanh(r[c]) : sigmoid(r[c]);
          }
        }
        break;
      }
      case LayerKind::kFlatten:
        y = x;
        break;
      case LayerKind::kConcat:
        for (std::size_t b = 0; b < batch; ++b) {
          auto r = y.row(b);
          auto xr = x.row(b);
          auto sr = side.row(b);
          std::copy(xr.begin(), xr.end(), r.begin());
          std::copy(sr.begin(), sr.end(), r.begin() + static_cast<std::ptrdiff_t>(xr.size()));
        }
        break;
    }
    if (cache) cache->push_back(std::move(x));
    x = std::move(y);
  }
  if (cache) cache->push_back(x);
  return x;
}

template <typename T>
const typename BasicNetwork<T>::TensorType& BasicNetwork<T>::forward(const TensorType& input) {
  run(input, &cache_);
  return cache_.back();
}

template <typename T>
typename BasicNetwork<T>::TensorType BasicNetwork<T>::predict(const TensorType& input) const {
  return run(input, nullptr);
}

template <typename T>
const typename BasicNetwork<T>::TensorType& BasicNetwork<T>::layer_input(std::size_t i) const {
  if (cache_.empty()) throw StateError("layer_input requested before forward");
  return cache_.at(i);
}

template <typename T>
typename BasicNetwork<T>::TensorType BasicNetwork<T>::backward(const TensorType& output_grad) {
  if (cache_.empty()) throw StateError("backward called before forward");
  const auto& out = cache_.back();
  if (output_grad.shape() != out.shape()) {
    throw ConfigError("output gradient shape " + shape_string(output_grad.shape()) +
                      " does not match output " + shape_string(out.shape()));
  }
  const std::size_t batch = out.rows();
  TensorType g = output_grad;
  TensorType side_grad;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const auto& s = layers_[li];
    const TensorType& x = cache_[li];
    const TensorType& y = cache_[li + 1];
    TensorType gx({batch, x.cols()});
    switch (s.kind) {
      case LayerKind::kDense:
        dense_backward<T>(s, params_[li], grads_[li], x, g, gx);
        break;
      case LayerKind::kConv2d:
        conv_backward<T>(s, params_[li], grads_[li], x, g, gx);
        break;
      case LayerKind::kLeakyRelu: {
        const T slope = static_cast<T>(s.slope);
        auto xs = x.data();
        auto gs = g.data();
        auto dst = gx.data();
        for (std::size_t k = 0; k < xs.size(); ++k) dst[k] = xs[k] > 0 ? gs[k] : slope * gs[k];
        break;
      }
      case LayerKind::kTanh:
      case LayerKind::kSigmoid: {
        gx = g;
        auto [lo, hi] = column_range(s, x.cols());
        for (std::size_t b = 0; b < batch; ++b) {
          auto yr = y.row(b);
          auto gr = gx.row(b);
          for (std::size_t c = lo; c < hi; ++c) {
            const T v = yr[c];
            gr[c] *= s.kind == LayerKind::kTanh ? (T(1) - v * v) : v * (T(1) - v);
          }
        }
        break;
      }
      case LayerKind::kFlatten:
        gx = g;
        break;
      case LayerKind::kConcat: {
        side_grad = TensorType({batch, side_width_});
        const std::size_t w = x.cols();
        for (std::size_t b = 0; b < batch; ++b) {
          auto gr = g.row(b);
          std::copy(gr.begin(), gr.begin() + static_cast<std::ptrdiff_t>(w), gx.row(b).begin());
          std::copy(gr.begin() + static_cast<std::ptrdiff_t>(w), gr.end(),
                    side_grad.row(b).begin());
        }
        break;
      }
    }
    g = std::move(gx);
  }

  if (side_width_ == 0) return g;
  TensorType input_grad({batch, input_width()});
  for (std::size_t b = 0; b < batch; ++b) {
    auto dst = input_grad.row(b);
    auto gs = g.row(b);
    auto ss = side_grad.row(b);
    std::copy(gs.begin(), gs.end(), dst.begin());
    std::copy(ss.begin(), ss.end(), dst.begin() + static_cast<std::ptrdiff_t>(gs.size()));
  }
  return input_grad;
}

template <typename T>
void BasicNetwork<T>::zero_grad() {
  for (auto& g : grads_) std::fill(g.begin(), g.end(), T(0));
}

template class BasicNetwork<float>;
template class BasicNetwork<double>;

}  // namespace gaildrive::nn
