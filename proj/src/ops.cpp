// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include "multinet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "blas.hpp"
#include "multinet/errors.hpp"

namespace multinet {

namespace {

template <typename T>
using Impl = detail::TensorImpl<T>;

template <typename T>
using ImplPtr = std::shared_ptr<Impl<T>>;

// Maps each flat index of a broadcast result onto the flat index of one operand.
class BroadcastMap {
 public:
  BroadcastMap(const Shape& out, const Shape& in) {
    const std::size_t n_in = shape_numel(in);
    const std::size_t n_out = shape_numel(out);
    if (n_in == n_out) {
      kind_ = Kind::kSame;
      return;
    }
    if (n_in == 1) {
      kind_ = Kind::kScalar;
      return;
    }
    // Operand equal to a trailing block of the result (leading ones dropped).
    std::size_t first = 0;
    while (first < in.size() && in[first] == 1) ++first;
    const std::size_t tail = in.size() - first;
    if (tail <= out.size() &&
        std::equal(in.begin() + static_cast<std::ptrdiff_t>(first), in.end(),
                   out.end() - static_cast<std::ptrdiff_t>(tail))) {
      kind_ = Kind::kSuffix;
      period_ = n_in;
      return;
    }
    kind_ = Kind::kGeneral;
    const std::size_t rank = out.size();
    std::vector<std::size_t> padded(rank, 1);
    std::copy(in.begin(), in.end(), padded.begin() + static_cast<std::ptrdiff_t>(rank - in.size()));
    std::vector<std::size_t> in_stride(rank, 0);
    std::size_t s = 1;
    for (std::size_t d = rank; d-- > 0;) {
      in_stride[d] = padded[d] == 1 ? 0 : s;
      s *= padded[d];
    }
    index_.resize(n_out);
    std::vector<std::size_t> counter(rank, 0);
    std::size_t offset = 0;
    for (std::size_t i = 0; i < n_out; ++i) {
      index_[i] = offset;
      for (std::size_t d = rank; d-- > 0;) {
        ++counter[d];
        offset += in_stride[d];
        if (counter[d] < out[d]) break;
        offset -= in_stride[d] * counter[d];
        counter[d] = 0;
      }
    }
  }

  std::size_t operator()(std::size_t i) const {
    switch (kind_) {
      case Kind::kSame: return i;
      case Kind::kScalar: return 0;
      case Kind::kSuffix: return i % period_;
      default: return index_[i];
    }
  }

 private:
  enum class Kind { kSame, kScalar, kSuffix, kGeneral };
  Kind kind_ = Kind::kSame;
  std::size_t period_ = 1;
  std::vector<std::size_t> index_;
};

enum class BinaryOp { kAdd, kSub, kMul, kDiv };

template <typename T>
Tensor<T> binary(const Tensor<T>& a, const Tensor<T>& b, BinaryOp op, const char* name) {
  Shape out_shape;
  try {
    out_shape = broadcast_shape(a.shape(), b.shape());
  } catch (const ShapeError&) {
    throw ShapeError(std::string(name) + ": shapes " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()) + " are not broadcast-compatible");
  }
  const std::size_t n = shape_numel(out_shape);
  BroadcastMap ma(out_shape, a.shape());
  BroadcastMap mb(out_shape, b.shape());
  const auto& av = a.values();
  const auto& bv = b.values();
  std::vector<T> out(n);
  switch (op) {
    case BinaryOp::kAdd:
      for (std::size_t i = 0; i < n; ++i) out[i] = av[ma(i)] + bv[mb(i)];
      break;
    case BinaryOp::kSub:
      for (std::size_t i = 0; i < n; ++i) out[i] = av[ma(i)] - bv[mb(i)];
      break;
    case BinaryOp::kMul:
      for (std::size_t i = 0; i < n; ++i) out[i] = av[ma(i)] * bv[mb(i)];
      break;
    case BinaryOp::kDiv:
      for (std::size_t i = 0; i < n; ++i) out[i] = av[ma(i)] / bv[mb(i)];
      break;
  }
  ImplPtr<T> pa = a.impl();
  ImplPtr<T> pb = b.impl();
  Shape sa = a.shape();
  Shape sb = b.shape();
  return make_result<T>(
      out_shape, std::move(out), name, {a, b},
      [pa, pb, op, out_shape, sa, sb](Impl<T>& self) {
        BroadcastMap ma(out_shape, sa);
        BroadcastMap mb(out_shape, sb);
        const auto& g = self.grad;
        const std::size_t n = g.size();
        if (pa->requires_grad) {
          pa->ensure_grad();
          auto& ga = pa->grad;
          for (std::size_t i = 0; i < n; ++i) {
            T d = g[i];
            if (op == BinaryOp::kMul) d *= pb->data[mb(i)];
            if (op == BinaryOp::kDiv) d /= pb->data[mb(i)];
            ga[ma(i)] += d;
          }
        }
        if (pb->requires_grad) {
          pb->ensure_grad();
          auto& gb = pb->grad;
          for (std::size_t i = 0; i < n; ++i) {
            T d = g[i];
            switch (op) {
              case BinaryOp::kAdd: break;
              case BinaryOp::kSub: d = -d; break;
              case BinaryOp::kMul: d *= pa->data[ma(i)]; break;
              case BinaryOp::kDiv: {
                const T bv = pb->data[mb(i)];
                d = -d * pa->data[ma(i)] / (bv * bv);
                break;
              }
            }
            gb[mb(i)] += d;
          }
        }
      });
}

template <typename T, typename Fwd, typename Local>
Tensor<T> unary(const Tensor<T>& a, const char* name, Fwd fwd, Local local_grad) {
  const auto& av = a.values();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);
  ImplPtr<T> pa = a.impl();
  return make_result<T>(a.shape(), std::move(out), name, {a},
                        [pa, local_grad](Impl<T>& self) {
                          pa->ensure_grad();
                          for (std::size_t i = 0; i < self.grad.size(); ++i) {
                            pa->grad[i] += self.grad[i] * local_grad(pa->data[i], self.data[i]);
                          }
                        });
}

// Copies `src` (row-major, `shape`) into `dst` with axes reordered by `order`.
template <typename T>
void permute_into(const T* src, const Shape& shape, const std::vector<std::size_t>& order, T* dst) {
  const std::size_t rank = shape.size();
  std::vector<std::size_t> src_stride(rank, 1);
  for (std::size_t d = rank; d-- > 1;) src_stride[d - 1] = src_stride[d] * shape[d];
  Shape out_shape(rank);
  std::vector<std::size_t> stride(rank);
  for (std::size_t d = 0; d < rank; ++d) {
    out_shape[d] = shape[order[d]];
    stride[d] = src_stride[order[d]];
  }
  const std::size_t n = shape_numel(shape);
  if (n == 0) return;
  if (rank == 0) {
    dst[0] = src[0];
    return;
  }
  // The innermost output axis is copied in a tight loop.
  const std::size_t inner = out_shape[rank - 1];
  const std::size_t inner_stride = stride[rank - 1];
  std::vector<std::size_t> counter(rank, 0);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < n; i += inner) {
    for (std::size_t j = 0; j < inner; ++j) dst[i + j] = src[offset + j * inner_stride];
    for (std::size_t d = rank - 1; d-- > 0;) {
      ++counter[d];
      offset += stride[d];
      if (counter[d] < out_shape[d]) break;
      offset -= stride[d] * counter[d];
      counter[d] = 0;
    }
  }
}

std::size_t prod(const Shape& s, std::size_t from, std::size_t to) {
  std::size_t p = 1;
  for (std::size_t i = from; i < to; ++i) p *= s[i];
  return p;
}

}  // namespace

Shape broadcast_shape(const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t ea = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::size_t eb = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (ea != eb && ea != 1 && eb != 1) {
      throw ShapeError("shapes " + shape_str(a) + " and " + shape_str(b) +
                       " are not broadcast-compatible");
    }
    out[i] = ea == 1 ? eb : ea;
  }
  return out;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(a, b, BinaryOp::kAdd, "add");
}
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(a, b, BinaryOp::kSub, "sub");
}
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(a, b, BinaryOp::kMul, "mul");
}
template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b) {
  return binary(a, b, BinaryOp::kDiv, "div");
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, T b) {
  return unary(a, "add_scalar", [b](T x) { return x + b; }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, T b) {
  return unary(a, "mul_scalar", [b](T x) { return x * b; }, [b](T, T) { return b; });
}

template <typename T>
Tensor<T> neg(const Tensor<T>& a) {
  return mul(a, T(-1));
}

template <typename T>
Tensor<T> exp(const Tensor<T>& a) {
  return unary(a, "exp", [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Tensor<T> log(const Tensor<T>& a) {
  return unary(a, "log", [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}

template <typename T>
Tensor<T> clamp(const Tensor<T>& a, T lo, T hi) {
  return unary(
      a, "clamp", [lo, hi](T x) { return std::clamp(x, lo, hi); },
      [lo, hi](T x, T) { return (x >= lo && x <= hi) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  T total = std::accumulate(a.values().begin(), a.values().end(), T(0));
  ImplPtr<T> pa = a.impl();
  return make_result<T>(Shape{}, {total}, "sum", {a}, [pa](Impl<T>& self) {
    pa->ensure_grad();
    const T g = self.grad[0];
    for (T& v : pa->grad) v += g;
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  return mul(sum(a), T(1) / static_cast<T>(a.numel()));
}

template <typename T>
Tensor<T> sum_axis(const Tensor<T>& a, std::size_t axis) {
  const Shape& s = a.shape();
  if (axis >= s.size()) {
    throw ShapeError("sum_axis: axis " + std::to_string(axis) + " out of range for " + shape_str(s));
  }
  const std::size_t outer = prod(s, 0, axis);
  const std::size_t len = s[axis];
  const std::size_t inner = prod(s, axis + 1, s.size());
  Shape out_shape = s;
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  std::vector<T> out(outer * inner, T(0));
  const auto& av = a.values();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t j = 0; j < len; ++j)
      for (std::size_t i = 0; i < inner; ++i) out[o * inner + i] += av[(o * len + j) * inner + i];
  ImplPtr<T> pa = a.impl();
  return make_result<T>(out_shape, std::move(out), "sum_axis", {a},
                        [pa, outer, len, inner](Impl<T>& self) {
                          pa->ensure_grad();
                          for (std::size_t o = 0; o < outer; ++o)
                            for (std::size_t j = 0; j < len; ++j)
                              for (std::size_t i = 0; i < inner; ++i)
                                pa->grad[(o * len + j) * inner + i] += self.grad[o * inner + i];
                        });
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.dim() != 2 || b.dim() != 2 || a.extent(1) != b.extent(0)) {
    throw ShapeError("matmul: inner dimensions differ for " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));
  }
  const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
  std::vector<T> out(m * n, T(0));
  if (k > 0) detail::gemm(false, false, m, n, k, T(1), a.values().data(), k, b.values().data(), n, T(0), out.data(), n);
  ImplPtr<T> pa = a.impl();
  ImplPtr<T> pb = b.impl();
  return make_result<T>(Shape{m, n}, std::move(out), "matmul", {a, b},
                        [pa, pb, m, k, n](Impl<T>& self) {
                          if (k == 0) return;
                          if (pa->requires_grad) {
                            pa->ensure_grad();
                            detail::gemm(false, true, m, k, n, T(1), self.grad.data(), n,
                                         pb->data.data(), n, T(1), pa->grad.data(), k);
                          }
                          if (pb->requires_grad) {
                            pb->ensure_grad();
                            detail::gemm(true, false, k, n, m, T(1), pa->data.data(), k,
                                         self.grad.data(), n, T(1), pb->grad.data(), n);
                          }
                        });
}

template <typename T>
Tensor<T> bmm(const Tensor<T>& a, const Tensor<T>& b, bool transpose_b) {
  const bool ok = a.dim() == 3 && b.dim() == 3 && a.extent(0) == b.extent(0) &&
                  a.extent(2) == (transpose_b ? b.extent(2) : b.extent(1));
  if (!ok) {
    throw ShapeError(std::string("bmm: incompatible batched shapes ") + shape_str(a.shape()) +
                     " and " + shape_str(b.shape()) + (transpose_b ? " (second transposed)" : ""));
  }
  const std::size_t batch = a.extent(0), m = a.extent(1), k = a.extent(2);
  const std::size_t n = transpose_b ? b.extent(1) : b.extent(2);
  std::vector<T> out(batch * m * n, T(0));
  const T* av = a.values().data();
  const T* bv = b.values().data();
  for (std::size_t i = 0; i < batch; ++i) {
    detail::gemm(false, transpose_b, m, n, k, T(1), av + i * m * k, k, bv + i * k * n,
                 transpose_b ? k : n, T(0), out.data() + i * m * n, n);
  }
  ImplPtr<T> pa = a.impl();
  ImplPtr<T> pb = b.impl();
  return make_result<T>(
      Shape{batch, m, n}, std::move(out), "bmm", {a, b},
      [pa, pb, batch, m, k, n, transpose_b](Impl<T>& self) {
        const T* g = self.grad.data();
        if (pa->requires_grad) {
          pa->ensure_grad();
          for (std::size_t i = 0; i < batch; ++i) {
            // dA = dC · op(B)ᵀ
            detail::gemm(false, !transpose_b, m, k, n, T(1), g + i * m * n, n,
                         pb->data.data() + i * k * n, transpose_b ? k : n, T(1),
                         pa->grad.data() + i * m * k, k);
          }
        }
        if (pb->requires_grad) {
          pb->ensure_grad();
          for (std::size_t i = 0; i < batch; ++i) {
            if (transpose_b) {
              // B is (n,k): dB = dCᵀ · A
              detail::gemm(true, false, n, k, m, T(1), g + i * m * n, n, pa->data.data() + i * m * k,
                           k, T(1), pb->grad.data() + i * k * n, k);
            } else {
              detail::gemm(true, false, k, n, m, T(1), pa->data.data() + i * m * k, k, g + i * m * n,
                           n, T(1), pb->grad.data() + i * k * n, n);
            }
          }
        }
      });
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  if (weight.dim() != 2 || x.dim() == 0 || x.shape().back() != weight.extent(1)) {
    throw ShapeError("linear: input " + shape_str(x.shape()) + " does not match weight " +
                     shape_str(weight.shape()));
  }
  const std::size_t in = weight.extent(1), outf = weight.extent(0);
  if (bias.defined() && (bias.dim() != 1 || bias.extent(0) != outf)) {
    throw ShapeError("linear: bias " + shape_str(bias.shape()) + " does not match weight " +
                     shape_str(weight.shape()));
  }
  const std::size_t rows = x.numel() / std::max<std::size_t>(in, 1);
  Shape out_shape = x.shape();
  out_shape.back() = outf;
  std::vector<T> out(rows * outf, T(0));
  if (bias.defined()) {
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(bias.values().begin(), bias.values().end(), out.begin() + static_cast<std::ptrdiff_t>(r * outf));
  }
  if (in > 0) {
    detail::gemm(false, true, rows, outf, in, T(1), x.values().data(), in, weight.values().data(), in,
                 T(1), out.data(), outf);
  }
  ImplPtr<T> px = x.impl();
  ImplPtr<T> pw = weight.impl();
  ImplPtr<T> pb = bias.defined() ? bias.impl() : nullptr;
  return make_result<T>(out_shape, std::move(out), "linear", {x, weight, bias},
                        [px, pw, pb, rows, in, outf](Impl<T>& self) {
                          const T* g = self.grad.data();
                          if (px->requires_grad && in > 0) {
                            px->ensure_grad();
                            detail::gemm(false, false, rows, in, outf, T(1), g, outf, pw->data.data(), in,
                                         T(1), px->grad.data(), in);
                          }
                          if (pw->requires_grad && in > 0) {
                            pw->ensure_grad();
                            detail::gemm(true, false, outf, in, rows, T(1), g, outf, px->data.data(), in,
                                         T(1), pw->grad.data(), in);
                          }
                          if (pb && pb->requires_grad) {
                            pb->ensure_grad();
                            for (std::size_t r = 0; r < rows; ++r)
                              for (std::size_t o = 0; o < outf; ++o) pb->grad[o] += g[r * outf + o];
                          }
                        });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw ShapeError("reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(shape) +
                     " (element count differs)");
  }
  ImplPtr<T> pa = a.impl();
  return make_result<T>(std::move(shape), a.values(), "reshape", {a}, [pa](Impl<T>& self) {
    accumulate_grad<T>(*pa, self.grad);
  });
}

template <typename T>
Tensor<T> permute(const Tensor<T>& a, const std::vector<std::size_t>& order) {
  const Shape& s = a.shape();
  std::vector<std::size_t> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  bool valid = order.size() == s.size();
  for (std::size_t i = 0; valid && i < sorted.size(); ++i) valid = sorted[i] == i;
  if (!valid) throw ShapeError("permute: invalid axis order for tensor " + shape_str(s));
  Shape out_shape(s.size());
  std::vector<std::size_t> inverse(s.size());
  for (std::size_t d = 0; d < s.size(); ++d) {
    out_shape[d] = s[order[d]];
    inverse[order[d]] = d;
  }
  std::vector<T> out(a.numel());
  permute_into(a.values().data(), s, order, out.data());
  ImplPtr<T> pa = a.impl();
  return make_result<T>(out_shape, std::move(out), "permute", {a},
                        [pa, out_shape, inverse](Impl<T>& self) {
                          std::vector<T> back(self.grad.size());
                          permute_into(self.grad.data(), out_shape, inverse, back.data());
                          accumulate_grad<T>(*pa, back);
                        });
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a, std::size_t axis0, std::size_t axis1) {
  if (axis0 >= a.dim() || axis1 >= a.dim()) {
    throw ShapeError("transpose: axis out of range for " + shape_str(a.shape()));
  }
  std::vector<std::size_t> order(a.dim());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::swap(order[axis0], order[axis1]);
  return permute(a, order);
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape& ref = parts.front().shape();
  if (axis >= ref.size()) throw ShapeError("concat: axis out of range for " + shape_str(ref));
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool same = s.size() == ref.size();
    for (std::size_t d = 0; same && d < s.size(); ++d) same = d == axis || s[d] == ref[d];
    if (!same) {
      throw ShapeError("concat along axis " + std::to_string(axis) + ": " + shape_str(ref) +
                       " and " + shape_str(s) + " differ off-axis");
    }
    widths.push_back(s[axis]);
    total += s[axis];
  }
  const std::size_t outer = prod(ref, 0, axis);
  const std::size_t inner = prod(ref, axis + 1, ref.size());
  Shape out_shape = ref;
  out_shape[axis] = total;
  std::vector<T> out(outer * total * inner);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& v = parts[p].values();
    const std::size_t block = widths[p] * inner;
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(o * block), block,
                  out.begin() + static_cast<std::ptrdiff_t>(o * total * inner + offset * inner));
    }
    offset += widths[p];
  }
  std::vector<ImplPtr<T>> impls;
  for (const auto& p : parts) impls.push_back(p.impl());
  return make_result<T>(out_shape, std::move(out), "concat", parts,
                        [impls, widths, outer, inner, total](Impl<T>& self) {
                          std::size_t offset = 0;
                          for (std::size_t p = 0; p < impls.size(); ++p) {
                            auto& in = *impls[p];
                            const std::size_t block = widths[p] * inner;
                            if (in.requires_grad) {
                              in.ensure_grad();
                              for (std::size_t o = 0; o < outer; ++o) {
                                const T* g = self.grad.data() + o * total * inner + offset * inner;
                                T* dst = in.grad.data() + o * block;
                                for (std::size_t i = 0; i < block; ++i) dst[i] += g[i];
                              }
                            }
                            offset += widths[p];
                          }
                        });
}

template <typename T>
Tensor<T> slice(const Tensor<T>& a, std::size_t axis, std::size_t start, std::size_t length) {
  const Shape& s = a.shape();
  if (axis >= s.size() || start + length > s[axis]) {
    throw ShapeError("slice [" + std::to_string(start) + ", " + std::to_string(start + length) +
                     ") along axis " + std::to_string(axis) + " exceeds " + shape_str(s));
  }
  const std::size_t outer = prod(s, 0, axis);
  const std::size_t inner = prod(s, axis + 1, s.size());
  const std::size_t full = s[axis];
  Shape out_shape = s;
  out_shape[axis] = length;
  std::vector<T> out(outer * length * inner);
  const auto& v = a.values();
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy_n(v.begin() + static_cast<std::ptrdiff_t>((o * full + start) * inner), length * inner,
                out.begin() + static_cast<std::ptrdiff_t>(o * length * inner));
  }
  ImplPtr<T> pa = a.impl();
  return make_result<T>(out_shape, std::move(out), "slice", {a},
                        [pa, outer, inner, full, start, length](Impl<T>& self) {
                          pa->ensure_grad();
                          for (std::size_t o = 0; o < outer; ++o) {
                            const T* g = self.grad.data() + o * length * inner;
                            T* dst = pa->grad.data() + (o * full + start) * inner;
                            for (std::size_t i = 0; i < length * inner; ++i) dst[i] += g[i];
                          }
                        });
}

template <typename T>
Tensor<T> repeat_batch(const Tensor<T>& a, std::size_t count) {
  if (a.dim() == 0 || a.extent(0) != 1) {
    throw ShapeError("repeat_batch needs a leading extent of 1, got " + shape_str(a.shape()));
  }
  Shape out_shape = a.shape();
  out_shape[0] = count;
  const std::size_t block = a.numel();
  std::vector<T> out(block * count);
  for (std::size_t i = 0; i < count; ++i)
    std::copy(a.values().begin(), a.values().end(), out.begin() + static_cast<std::ptrdiff_t>(i * block));
  ImplPtr<T> pa = a.impl();
  return make_result<T>(out_shape, std::move(out), "repeat_batch", {a},
                        [pa, block, count](Impl<T>& self) {
                          pa->ensure_grad();
                          for (std::size_t i = 0; i < count; ++i)
                            for (std::size_t j = 0; j < block; ++j) pa->grad[j] += self.grad[i * block + j];
                        });
}

#define MULTINET_INSTANTIATE_OPS(T)                                                       \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                            \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                            \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                            \
  template Tensor<T> div(const Tensor<T>&, const Tensor<T>&);                            \
  template Tensor<T> add(const Tensor<T>&, T);                                           \
  template Tensor<T> mul(const Tensor<T>&, T);                                           \
  template Tensor<T> neg(const Tensor<T>&);                                              \
  template Tensor<T> exp(const Tensor<T>&);                                              \
  template Tensor<T> log(const Tensor<T>&);                                              \
  template Tensor<T> clamp(const Tensor<T>&, T, T);                                      \
  template Tensor<T> sum(const Tensor<T>&);                                              \
  template Tensor<T> mean(const Tensor<T>&);                                             \
  template Tensor<T> sum_axis(const Tensor<T>&, std::size_t);                            \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                         \
  template Tensor<T> bmm(const Tensor<T>&, const Tensor<T>&, bool);                      \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);       \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                   \
  template Tensor<T> permute(const Tensor<T>&, const std::vector<std::size_t>&);         \
  template Tensor<T> transpose(const Tensor<T>&, std::size_t, std::size_t);              \
  template Tensor<T> concat(const std::vector<Tensor<T>>&, std::size_t);                 \
  template Tensor<T> slice(const Tensor<T>&, std::size_t, std::size_t, std::size_t);     \
  template Tensor<T> repeat_batch(const Tensor<T>&, std::size_t);

MULTINET_INSTANTIATE_OPS(float)
MULTINET_INSTANTIATE_OPS(double)

}  // namespace multinet
