// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include "multinet/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "blas.hpp"
#include "multinet/errors.hpp"

namespace multinet {

namespace {

template <typename T>
using Impl = detail::TensorImpl<T>;
template <typename T>
using ImplPtr = std::shared_ptr<Impl<T>>;

struct ConvGeometry {
  std::size_t batch, channels, height, width;
  std::size_t out_ch, kh, kw, stride;
  std::size_t out_h, out_w;
  std::size_t pad_top, pad_left;

  std::size_t patch() const { return channels * kh * kw; }
  std::size_t positions() const { return out_h * out_w; }
};

std::size_t same_pad_before(std::size_t input, std::size_t kernel, std::size_t stride) {
  const std::size_t out = (input + stride - 1) / stride;
  const std::size_t needed = (out - 1) * stride + kernel;
  return needed > input ? (needed - input) / 2 : 0;
}

template <typename T>
void im2col(const T* x, const ConvGeometry& g, T* cols) {
  const std::size_t pos = g.positions();
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t i = 0; i < g.kh; ++i) {
      for (std::size_t j = 0; j < g.kw; ++j) {
        T* row = cols + ((c * g.kh + i) * g.kw + j) * pos;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + i) -
                                    static_cast<std::ptrdiff_t>(g.pad_top);
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + j) -
                                      static_cast<std::ptrdiff_t>(g.pad_left);
            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<std::ptrdiff_t>(g.height) &&
                                ix < static_cast<std::ptrdiff_t>(g.width);
            row[oy * g.out_w + ox] =
                inside ? x[(c * g.height + static_cast<std::size_t>(iy)) * g.width + static_cast<std::size_t>(ix)]
                       : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* cols, const ConvGeometry& g, T* dx) {
  const std::size_t pos = g.positions();
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t i = 0; i < g.kh; ++i) {
      for (std::size_t j = 0; j < g.kw; ++j) {
        const T* row = cols + ((c * g.kh + i) * g.kw + j) * pos;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + i) -
                                    static_cast<std::ptrdiff_t>(g.pad_top);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + j) -
                                      static_cast<std::ptrdiff_t>(g.pad_left);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) continue;
            dx[(c * g.height + static_cast<std::size_t>(iy)) * g.width + static_cast<std::size_t>(ix)] +=
                row[oy * g.out_w + ox];
          }
        }
      }
    }
  }
}

void require_nchw(const Shape& s, const char* op) {
  if (s.size() != 4) {
    throw ShapeError(std::string(op) + ": expected a (B,C,H,W) input, got " + shape_str(s));
  }
}

}  // namespace

std::size_t conv_output_extent(std::size_t input, std::size_t kernel, std::size_t stride,
                               Padding padding) {
  if (stride == 0 || kernel == 0) throw ConfigError("kernel and stride must be positive");
  if (padding == Padding::kSame) return (input + stride - 1) / stride;
  if (input < kernel) {
    throw ShapeError("kernel of size " + std::to_string(kernel) + " is larger than the input extent " +
                     std::to_string(input));
  }
  return (input - kernel) / stride + 1;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  const auto& xv = x.values();
  std::vector<T> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > T(0) ? xv[i] : T(0);
  ImplPtr<T> px = x.impl();
  return make_result<T>(x.shape(), std::move(out), "relu", {x}, [px](Impl<T>& self) {
    px->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (px->data[i] > T(0)) px->grad[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  const T inv_sqrt2 = T(1) / std::sqrt(T(2));
  const auto& xv = x.values();
  std::vector<T> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    out[i] = T(0.5) * xv[i] * (T(1) + std::erf(xv[i] * inv_sqrt2));
  }
  ImplPtr<T> px = x.impl();
  return make_result<T>(x.shape(), std::move(out), "gelu", {x}, [px, inv_sqrt2](Impl<T>& self) {
    const T inv_sqrt_2pi = T(1) / std::sqrt(T(2) * std::numbers::pi_v<T>);
    px->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const T v = px->data[i];
      const T cdf = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
      const T pdf = inv_sqrt_2pi * std::exp(T(-0.5) * v * v);
      px->grad[i] += self.grad[i] * (cdf + v * pdf);
    }
  });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x) {
  if (x.dim() == 0 || x.shape().back() == 0) {
    throw ShapeError("softmax needs a non-empty last axis, got " + shape_str(x.shape()));
  }
  const std::size_t cols = x.shape().back();
  const std::size_t rows = x.numel() / cols;
  const auto& xv = x.values();
  std::vector<T> out(xv.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = xv.data() + r * cols;
    T* o = out.data() + r * cols;
    const T peak = *std::max_element(in, in + cols);
    T total = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      o[c] = std::exp(in[c] - peak);
      total += o[c];
    }
    for (std::size_t c = 0; c < cols; ++c) o[c] /= total;
  }
  ImplPtr<T> px = x.impl();
  return make_result<T>(x.shape(), std::move(out), "softmax", {x}, [px, rows, cols](Impl<T>& self) {
    px->ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      const T* y = self.data.data() + r * cols;
      const T* g = self.grad.data() + r * cols;
      T dot = 0;
      for (std::size_t c = 0; c < cols; ++c) dot += g[c] * y[c];
      T* dx = px->grad.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) dx[c] += y[c] * (g[c] - dot);
    }
  });
}

template <typename T>
Tensor<T> log_softmax(const Tensor<T>& x) {
  if (x.dim() == 0 || x.shape().back() == 0) {
    throw ShapeError("log_softmax needs a non-empty last axis, got " + shape_str(x.shape()));
  }
  const std::size_t cols = x.shape().back();
  const std::size_t rows = x.numel() / cols;
  const auto& xv = x.values();
  std::vector<T> out(xv.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = xv.data() + r * cols;
    T* o = out.data() + r * cols;
    const T peak = *std::max_element(in, in + cols);
    T total = 0;
    for (std::size_t c = 0; c < cols; ++c) total += std::exp(in[c] - peak);
    const T lse = peak + std::log(total);
    for (std::size_t c = 0; c < cols; ++c) o[c] = in[c] - lse;
  }
  ImplPtr<T> px = x.impl();
  return make_result<T>(x.shape(), std::move(out), "log_softmax", {x},
                        [px, rows, cols](Impl<T>& self) {
                          px->ensure_grad();
                          for (std::size_t r = 0; r < rows; ++r) {
                            const T* y = self.data.data() + r * cols;
                            const T* g = self.grad.data() + r * cols;
                            T gsum = 0;
                            for (std::size_t c = 0; c < cols; ++c) gsum += g[c];
                            T* dx = px->grad.data() + r * cols;
                            for (std::size_t c = 0; c < cols; ++c) dx[c] += g[c] - std::exp(y[c]) * gsum;
                          }
                        });
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  if (x.dim() == 0) throw ShapeError("layer_norm needs at least one axis");
  const std::size_t cols = x.shape().back();
  if (gamma.numel() != cols || beta.numel() != cols) {
    throw ShapeError("layer_norm: scale " + shape_str(gamma.shape()) + " / shift " +
                     shape_str(beta.shape()) + " do not match input " + shape_str(x.shape()));
  }
  const std::size_t rows = x.numel() / cols;
  const auto& xv = x.values();
  std::vector<T> out(xv.size());
  std::vector<T> xhat(xv.size());
  std::vector<T> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = xv.data() + r * cols;
    T mu = 0;
    for (std::size_t c = 0; c < cols; ++c) mu += in[c];
    mu /= static_cast<T>(cols);
    T var = 0;
    for (std::size_t c = 0; c < cols; ++c) var += (in[c] - mu) * (in[c] - mu);
    var /= static_cast<T>(cols);
    const T is = T(1) / std::sqrt(var + eps);
    inv_std[r] = is;
    for (std::size_t c = 0; c < cols; ++c) {
      const T h = (in[c] - mu) * is;
      xhat[r * cols + c] = h;
      out[r * cols + c] = gamma.values()[c] * h + beta.values()[c];
    }
  }
  ImplPtr<T> px = x.impl();
  ImplPtr<T> pg = gamma.impl();
  ImplPtr<T> pb = beta.impl();
  return make_result<T>(
      x.shape(), std::move(out), "layer_norm", {x, gamma, beta},
      [px, pg, pb, rows, cols, xhat = std::move(xhat), inv_std = std::move(inv_std)](Impl<T>& self) {
        if (pg->requires_grad) pg->ensure_grad();
        if (pb->requires_grad) pb->ensure_grad();
        if (px->requires_grad) px->ensure_grad();
        std::vector<T> dxhat(cols);
        for (std::size_t r = 0; r < rows; ++r) {
          const T* g = self.grad.data() + r * cols;
          const T* h = xhat.data() + r * cols;
          if (pg->requires_grad)
            for (std::size_t c = 0; c < cols; ++c) pg->grad[c] += g[c] * h[c];
          if (pb->requires_grad)
            for (std::size_t c = 0; c < cols; ++c) pb->grad[c] += g[c];
          if (!px->requires_grad) continue;
          T mean_d = 0, mean_dh = 0;
          for (std::size_t c = 0; c < cols; ++c) {
            dxhat[c] = g[c] * pg->data[c];
            mean_d += dxhat[c];
            mean_dh += dxhat[c] * h[c];
          }
          mean_d /= static_cast<T>(cols);
          mean_dh /= static_cast<T>(cols);
          T* dx = px->grad.data() + r * cols;
          for (std::size_t c = 0; c < cols; ++c) dx[c] += inv_std[r] * (dxhat[c] - mean_d - h[c] * mean_dh);
        }
      });
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double rate, const ForwardContext& ctx) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!ctx.training || rate == 0.0) return x;
  if (ctx.rng == nullptr) throw ConfigError("dropout in training mode needs a seeded random source");
  std::bernoulli_distribution drop(rate);
  const T scale = static_cast<T>(1.0 / (1.0 - rate));
  std::vector<T> mask(x.numel());
  for (T& m : mask) m = drop(*ctx.rng) ? T(0) : scale;
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.values()[i] * mask[i];
  ImplPtr<T> px = x.impl();
  return make_result<T>(x.shape(), std::move(out), "dropout", {x},
                        [px, mask = std::move(mask)](Impl<T>& self) {
                          px->ensure_grad();
                          for (std::size_t i = 0; i < mask.size(); ++i) px->grad[i] += self.grad[i] * mask[i];
                        });
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                 std::size_t stride, Padding padding) {
  require_nchw(x.shape(), "conv2d");
  if (weight.dim() != 4) throw ShapeError("conv2d: weight must be (O,C,kh,kw), got " + shape_str(weight.shape()));
  if (x.extent(1) != weight.extent(1)) {
    throw ShapeError("conv2d: input has " + std::to_string(x.extent(1)) + " channels but weight " +
                     shape_str(weight.shape()) + " expects " + std::to_string(weight.extent(1)));
  }
  if (bias.defined() && bias.numel() != weight.extent(0)) {
    throw ShapeError("conv2d: bias " + shape_str(bias.shape()) + " does not match weight " +
                     shape_str(weight.shape()));
  }
  ConvGeometry g{};
  g.batch = x.extent(0);
  g.channels = x.extent(1);
  g.height = x.extent(2);
  g.width = x.extent(3);
  g.out_ch = weight.extent(0);
  g.kh = weight.extent(2);
  g.kw = weight.extent(3);
  g.stride = stride;
  try {
    g.out_h = conv_output_extent(g.height, g.kh, stride, padding);
    g.out_w = conv_output_extent(g.width, g.kw, stride, padding);
  } catch (const ShapeError&) {
    throw ShapeError("conv2d: kernel " + shape_str(weight.shape()) + " is larger than the input " +
                     shape_str(x.shape()));
  }
  g.pad_top = padding == Padding::kSame ? same_pad_before(g.height, g.kh, stride) : 0;
  g.pad_left = padding == Padding::kSame ? same_pad_before(g.width, g.kw, stride) : 0;

  const std::size_t patch = g.patch(), pos = g.positions();
  const std::size_t in_block = g.channels * g.height * g.width;
  const std::size_t out_block = g.out_ch * pos;
  std::vector<T> cols(g.batch * patch * pos);
  std::vector<T> out(g.batch * out_block, T(0));
  for (std::size_t b = 0; b < g.batch; ++b) {
    T* c = cols.data() + b * patch * pos;
    im2col(x.values().data() + b * in_block, g, c);
    T* o = out.data() + b * out_block;
    if (bias.defined()) {
      for (std::size_t oc = 0; oc < g.out_ch; ++oc) std::fill_n(o + oc * pos, pos, bias.values()[oc]);
    }
    detail::gemm(false, false, g.out_ch, pos, patch, T(1), weight.values().data(), patch, c, pos, T(1), o, pos);
  }
  ImplPtr<T> px = x.impl();
  ImplPtr<T> pw = weight.impl();
  ImplPtr<T> pb = bias.defined() ? bias.impl() : nullptr;
  return make_result<T>(
      Shape{g.batch, g.out_ch, g.out_h, g.out_w}, std::move(out), "conv2d", {x, weight, bias},
      [px, pw, pb, g, cols = std::move(cols)](Impl<T>& self) {
        const std::size_t patch = g.patch(), pos = g.positions();
        const std::size_t in_block = g.channels * g.height * g.width;
        const std::size_t out_block = g.out_ch * pos;
        std::vector<T> dcols(px->requires_grad ? patch * pos : 0);
        if (pw->requires_grad) pw->ensure_grad();
        if (pb && pb->requires_grad) pb->ensure_grad();
        if (px->requires_grad) px->ensure_grad();
        for (std::size_t b = 0; b < g.batch; ++b) {
          const T* dout = self.grad.data() + b * out_block;
          if (pw->requires_grad) {
            detail::gemm(false, true, g.out_ch, patch, pos, T(1), dout, pos, cols.data() + b * patch * pos, pos,
                         T(1), pw->grad.data(), patch);
          }
          if (pb && pb->requires_grad) {
            for (std::size_t oc = 0; oc < g.out_ch; ++oc) {
              T s = 0;
              for (std::size_t p = 0; p < pos; ++p) s += dout[oc * pos + p];
              pb->grad[oc] += s;
            }
          }
          if (px->requires_grad) {
            detail::gemm(true, false, patch, pos, g.out_ch, T(1), pw->data.data(), patch, dout, pos, T(0),
                         dcols.data(), pos);
            col2im_add(dcols.data(), g, px->grad.data() + b * in_block);
          }
        }
      });
}

template <typename T>
Tensor<T> maxpool2d(const Tensor<T>& x, std::size_t kernel, std::size_t stride) {
  require_nchw(x.shape(), "maxpool2d");
  const std::size_t batch = x.extent(0), ch = x.extent(1), h = x.extent(2), w = x.extent(3);
  if (kernel == 0 || stride == 0) throw ConfigError("maxpool2d: kernel and stride must be positive");
  if (h < kernel || w < kernel) {
    throw ShapeError("maxpool2d: window " + std::to_string(kernel) + "x" + std::to_string(kernel) +
                     " exceeds input " + shape_str(x.shape()));
  }
  const std::size_t oh = (h - kernel) / stride + 1, ow = (w - kernel) / stride + 1;
  std::vector<T> out(batch * ch * oh * ow);
  std::vector<std::size_t> argmax(out.size());
  const auto& xv = x.values();
  for (std::size_t plane = 0; plane < batch * ch; ++plane) {
    const std::size_t base = plane * h * w;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = base + (oy * stride) * w + ox * stride;
        for (std::size_t i = 0; i < kernel; ++i) {
          for (std::size_t j = 0; j < kernel; ++j) {
            const std::size_t idx = base + (oy * stride + i) * w + ox * stride + j;
            if (xv[idx] > xv[best]) best = idx;
          }
        }
        const std::size_t o = (plane * oh + oy) * ow + ox;
        out[o] = xv[best];
        argmax[o] = best;
      }
    }
  }
  ImplPtr<T> px = x.impl();
  return make_result<T>(Shape{batch, ch, oh, ow}, std::move(out), "maxpool2d", {x},
                        [px, argmax = std::move(argmax)](Impl<T>& self) {
                          px->ensure_grad();
                          for (std::size_t o = 0; o < argmax.size(); ++o) px->grad[argmax[o]] += self.grad[o];
                        });
}

template <typename T>
Tensor<T> adaptive_avg_pool2d(const Tensor<T>& x, std::size_t out_h, std::size_t out_w) {
  require_nchw(x.shape(), "adaptive_avg_pool2d");
  const std::size_t batch = x.extent(0), ch = x.extent(1), h = x.extent(2), w = x.extent(3);
  if (out_h == 0 || out_w == 0 || h == 0 || w == 0) {
    throw ShapeError("adaptive_avg_pool2d: cannot pool " + shape_str(x.shape()) + " onto " +
                     std::to_string(out_h) + "x" + std::to_string(out_w));
  }
  auto bin = [](std::size_t i, std::size_t in, std::size_t out) {
    return std::pair<std::size_t, std::size_t>{i * in / out, ((i + 1) * in + out - 1) / out};
  };
  std::vector<T> out(batch * ch * out_h * out_w);
  const auto& xv = x.values();
  for (std::size_t plane = 0; plane < batch * ch; ++plane) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      const auto [y0, y1] = bin(oy, h, out_h);
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        const auto [x0, x1] = bin(ox, w, out_w);
        T s = 0;
        for (std::size_t y = y0; y < y1; ++y)
          for (std::size_t xx = x0; xx < x1; ++xx) s += xv[(plane * h + y) * w + xx];
        out[(plane * out_h + oy) * out_w + ox] = s / static_cast<T>((y1 - y0) * (x1 - x0));
      }
    }
  }
  ImplPtr<T> px = x.impl();
  return make_result<T>(Shape{batch, ch, out_h, out_w}, std::move(out), "adaptive_avg_pool2d", {x},
                        [px, batch, ch, h, w, out_h, out_w, bin](Impl<T>& self) {
                          px->ensure_grad();
                          for (std::size_t plane = 0; plane < batch * ch; ++plane) {
                            for (std::size_t oy = 0; oy < out_h; ++oy) {
                              const auto [y0, y1] = bin(oy, h, out_h);
                              for (std::size_t ox = 0; ox < out_w; ++ox) {
                                const auto [x0, x1] = bin(ox, w, out_w);
                                const T g = self.grad[(plane * out_h + oy) * out_w + ox] /
                                            static_cast<T>((y1 - y0) * (x1 - x0));
                                for (std::size_t y = y0; y < y1; ++y)
                                  for (std::size_t xx = x0; xx < x1; ++xx) px->grad[(plane * h + y) * w + xx] += g;
                              }
                            }
                          }
                        });
}

template <typename T>
Linear<T> Linear<T>::init(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  const T fan_in = static_cast<T>(std::max<std::size_t>(in, 1));
  const T bound = std::sqrt(T(6) / fan_in);
  Linear layer;
  layer.weight = Tensor<T>::uniform({out, in}, -bound, bound, rng).set_requires_grad(true);
  layer.bias = Tensor<T>::zeros({out}).set_requires_grad(true);
  return layer;
}

template <typename T>
void Linear<T>::collect(const std::string& prefix, ParameterList<T>& out) const {
  out.push_back({join_name(prefix, "weight"), weight});
  out.push_back({join_name(prefix, "bias"), bias});
}

template <typename T>
Conv2d<T> Conv2d<T>::init(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
                          std::size_t stride, Padding padding, std::mt19937_64& rng) {
  if (kernel == 0 || stride == 0) throw ConfigError("conv kernel and stride must be positive");
  const T fan_in = static_cast<T>(in_ch * kernel * kernel);
  const T bound = std::sqrt(T(6) / fan_in);
  Conv2d layer;
  layer.weight = Tensor<T>::uniform({out_ch, in_ch, kernel, kernel}, -bound, bound, rng).set_requires_grad(true);
  layer.bias = Tensor<T>::zeros({out_ch}).set_requires_grad(true);
  layer.stride = stride;
  layer.padding = padding;
  return layer;
}

template <typename T>
void Conv2d<T>::collect(const std::string& prefix, ParameterList<T>& out) const {
  out.push_back({join_name(prefix, "weight"), weight});
  out.push_back({join_name(prefix, "bias"), bias});
}

template <typename T>
LayerNorm<T> LayerNorm<T>::init(std::size_t features) {
  LayerNorm layer;
  layer.gamma = Tensor<T>::ones({features}).set_requires_grad(true);
  layer.beta = Tensor<T>::zeros({features}).set_requires_grad(true);
  return layer;
}

template <typename T>
void LayerNorm<T>::collect(const std::string& prefix, ParameterList<T>& out) const {
  out.push_back({join_name(prefix, "gamma"), gamma});
  out.push_back({join_name(prefix, "beta"), beta});
}

Dropout::Dropout(double r) : rate(r) {
  if (!(r >= 0.0 && r < 1.0)) throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(r));
}

#define MULTINET_INSTANTIATE_LAYERS(T)                                                            \
  template Tensor<T> relu(const Tensor<T>&);                                                      \
  template Tensor<T> gelu(const Tensor<T>&);                                                      \
  template Tensor<T> softmax(const Tensor<T>&);                                                   \
  template Tensor<T> log_softmax(const Tensor<T>&);                                               \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);         \
  template Tensor<T> dropout(const Tensor<T>&, double, const ForwardContext&);                    \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t,    \
                            Padding);                                                             \
  template Tensor<T> maxpool2d(const Tensor<T>&, std::size_t, std::size_t);                       \
  template Tensor<T> adaptive_avg_pool2d(const Tensor<T>&, std::size_t, std::size_t);             \
  template struct Linear<T>;                                                                      \
  template struct Conv2d<T>;                                                                      \
  template struct LayerNorm<T>;

MULTINET_INSTANTIATE_LAYERS(float)
MULTINET_INSTANTIATE_LAYERS(double)

}  // namespace multinet
