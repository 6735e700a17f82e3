#pragma once

// Differentiable ops over CHW arrays. Convolution lowers to GEMM through a
// row-banded im2col buffer so peak scratch memory stays bounded; the buffer
// is rebuilt in the backward pass instead of cached.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "edgesr/nn/autograd.hpp"

namespace edgesr::nn {

template <typename T>
using MatrixRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class PadMode { zero, reflect };

namespace detail {

// Mirror without repeating the border sample (PyTorch-style reflection);
// valid while pad < dim, which the layer constructors guarantee.
inline int mirror_index(int i, int n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * n - 2 - i;
  return i;
}

inline void check_same_shape(const std::vector<int>& a, const std::vector<int>& b,
                             const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

constexpr size_t im2col_budget_bytes = 64u << 20;

}  // namespace detail

template <typename T>
NodePtr<T> constant(std::vector<int> shape, const std::vector<T>& values) {
  NodePtr<T> n = make_node<T>(std::move(shape));
  if (n->v.size() != values.size()) throw std::invalid_argument("constant: size mismatch");
  n->v = values;
  return n;
}

template <typename T>
NodePtr<T> add(NodePtr<T> a, NodePtr<T> b) {
  detail::check_same_shape(a->shape, b->shape, "add");
  NodePtr<T> out = make_op_node<T>(
      a->shape, {a, b}, [](Node<T>& self) {
        for (int i = 0; i < 2; ++i) {
          NodePtr<T>& p = self.parents[i];
          if (!p->needs_grad) continue;
          p->ensure_grad();
          for (size_t j = 0; j < self.g.size(); ++j) p->g[j] += self.g[j];
        }
      });
  for (size_t i = 0; i < out->v.size(); ++i) out->v[i] = a->v[i] + b->v[i];
  return out;
}

template <typename T>
NodePtr<T> sub(NodePtr<T> a, NodePtr<T> b) {
  detail::check_same_shape(a->shape, b->shape, "sub");
  NodePtr<T> out = make_op_node<T>(
      a->shape, {a, b}, [](Node<T>& self) {
        for (int i = 0; i < 2; ++i) {
          NodePtr<T>& p = self.parents[i];
          if (!p->needs_grad) continue;
          p->ensure_grad();
          const T sign = i == 0 ? T(1) : T(-1);
          for (size_t j = 0; j < self.g.size(); ++j) p->g[j] += sign * self.g[j];
        }
      });
  for (size_t i = 0; i < out->v.size(); ++i) out->v[i] = a->v[i] - b->v[i];
  return out;
}

template <typename T>
NodePtr<T> mul(NodePtr<T> a, NodePtr<T> b) {
  detail::check_same_shape(a->shape, b->shape, "mul");
  NodePtr<T> out = make_op_node<T>(
      a->shape, {a, b}, [](Node<T>& self) {
        NodePtr<T>& pa = self.parents[0];
        NodePtr<T>& pb = self.parents[1];
        if (pa->needs_grad) {
          pa->ensure_grad();
          for (size_t j = 0; j < self.g.size(); ++j) pa->g[j] += pb->v[j] * self.g[j];
        }
        if (pb->needs_grad) {
          pb->ensure_grad();
          for (size_t j = 0; j < self.g.size(); ++j) pb->g[j] += pa->v[j] * self.g[j];
        }
      });
  for (size_t i = 0; i < out->v.size(); ++i) out->v[i] = a->v[i] * b->v[i];
  return out;
}

// Copies values into a fresh constant: gradients stop here.
template <typename T>
NodePtr<T> detach(const NodePtr<T>& a) {
  NodePtr<T> n = make_node<T>(a->shape);
  n->v = a->v;
  return n;
}

template <typename T>
NodePtr<T> scale(NodePtr<T> a, T s) {
  NodePtr<T> out = make_op_node<T>(
      a->shape, {a}, [s](Node<T>& self) {
        NodePtr<T>& p = self.parents[0];
        if (!p->needs_grad) return;
        p->ensure_grad();
        for (size_t j = 0; j < self.g.size(); ++j) p->g[j] += s * self.g[j];
      });
  for (size_t i = 0; i < out->v.size(); ++i) out->v[i] = s * a->v[i];
  return out;
}

template <typename T>
NodePtr<T> add_scalar(NodePtr<T> a, T s) {
  NodePtr<T> out = make_op_node<T>(
      a->shape, {a}, [](Node<T>& self) {
        NodePtr<T>& p = self.parents[0];
        if (!p->needs_grad) return;
        p->ensure_grad();
        for (size_t j = 0; j < self.g.size(); ++j) p->g[j] += self.g[j];
      });
  for (size_t i = 0; i < out->v.size(); ++i) out->v[i] = a->v[i] + s;
  return out;
}

template <typename T>
NodePtr<T> relu(NodePtr<T> a) {
  NodePtr<T> out = make_op_node<T>(
      a->shape, {a}, [](Node<T>& self) {
        NodePtr<T>& p = self.parents[0];
        if (!p->needs_grad) return;
        p->ensure_grad();
        for (size_t j = 0; j < self.g.size(); ++j)
          if (p->v[j] > T(0)) p->g[j] += self.g[j];
      });
  for (size_t i = 0; i < out->v.size(); ++i) out->v[i] = a->v[i] > T(0) ? a->v[i] : T(0);
  return out;
}

template <typename T>
NodePtr<T> leaky_relu(NodePtr<T> a, T slope) {
  NodePtr<T> out = make_op_node<T>(
      a->shape, {a}, [slope](Node<T>& self) {
        NodePtr<T>& p = self.parents[0];
        if (!p->needs_grad) return;
        p->ensure_grad();
        for (size_t j = 0; j < self.g.size(); ++j)
          p->g[j] += (p->v[j] > T(0) ? T(1) : slope) * self.g[j];
      });
  for (size_t i = 0; i < out->v.size(); ++i)
    out->v[i] = a->v[i] > T(0) ? a->v[i] : slope * a->v[i];
  return out;
}

template <typename T>
NodePtr<T> sigmoid(NodePtr<T> a) {
  NodePtr<T> out = make_op_node<T>(
      a->shape, {a}, [](Node<T>& self) {
        NodePtr<T>& p = self.parents[0];
        if (!p->needs_grad) return;
        p->ensure_grad();
        for (size_t j = 0; j < self.g.size(); ++j) {
          const T y = self.v[j];
          p->g[j] += y * (T(1) - y) * self.g[j];
        }
      });
  for (size_t i = 0; i < out->v.size(); ++i)
    out->v[i] = T(1) / (T(1) + std::exp(-a->v[i]));
  return out;
}

template <typename T>
NodePtr<T> abs_val(NodePtr<T> a) {
  NodePtr<T> out = make_op_node<T>(
      a->shape, {a}, [](Node<T>& self) {
        NodePtr<T>& p = self.parents[0];
        if (!p->needs_grad) return;
        p->ensure_grad();
        for (size_t j = 0; j < self.g.size(); ++j) {
          const T x = p->v[j];
          const T s = x > T(0) ? T(1) : (x < T(0) ? T(-1) : T(0));
          p->g[j] += s * self.g[j];
        }
      });
  for (size_t i = 0; i < out->v.size(); ++i) out->v[i] = std::abs(a->v[i]);
  return out;
}

template <typename T>
NodePtr<T> sum_all(NodePtr<T> a) {
  NodePtr<T> out = make_op_node<T>(
      {1}, {a}, [](Node<T>& self) {
        NodePtr<T>& p = self.parents[0];
        if (!p->needs_grad) return;
        p->ensure_grad();
        for (size_t j = 0; j < p->g.size(); ++j) p->g[j] += self.g[0];
      });
  T acc = T(0);
  for (T x : a->v) acc += x;
  out->v[0] = acc;
  return out;
}

template <typename T>
NodePtr<T> mean_all(NodePtr<T> a) {
  const T inv = T(1) / static_cast<T>(a->numel());
  NodePtr<T> out = make_op_node<T>(
      {1}, {a}, [inv](Node<T>& self) {
        NodePtr<T>& p = self.parents[0];
        if (!p->needs_grad) return;
        p->ensure_grad();
        for (size_t j = 0; j < p->g.size(); ++j) p->g[j] += inv * self.g[0];
      });
  T acc = T(0);
  for (T x : a->v) acc += x;
  out->v[0] = acc * inv;
  return out;
}

template <typename T>
NodePtr<T> concat_channels(NodePtr<T> a, NodePtr<T> b) {
  if (a->shape.size() != 3 || b->shape.size() != 3 || a->shape[1] != b->shape[1] ||
      a->shape[2] != b->shape[2])
    throw std::invalid_argument("concat_channels: incompatible shapes");
  const size_t na = a->v.size(), nb = b->v.size();
  NodePtr<T> out = make_op_node<T>(
      {a->shape[0] + b->shape[0], a->shape[1], a->shape[2]}, {a, b},
      [na, nb](Node<T>& self) {
        NodePtr<T>& pa = self.parents[0];
        NodePtr<T>& pb = self.parents[1];
        if (pa->needs_grad) {
          pa->ensure_grad();
          for (size_t j = 0; j < na; ++j) pa->g[j] += self.g[j];
        }
        if (pb->needs_grad) {
          pb->ensure_grad();
          for (size_t j = 0; j < nb; ++j) pb->g[j] += self.g[na + j];
        }
      });
  std::copy(a->v.begin(), a->v.end(), out->v.begin());
  std::copy(b->v.begin(), b->v.end(), out->v.begin() + na);
  return out;
}

// Nearest-neighbor 2x upsampling; backward sums each 2x2 block.
template <typename T>
NodePtr<T> upsample_nearest2(NodePtr<T> a) {
  if (a->shape.size() != 3) throw std::invalid_argument("upsample_nearest2: need CHW");
  const int c = a->shape[0], h = a->shape[1], w = a->shape[2];
  NodePtr<T> out = make_op_node<T>(
      {c, 2 * h, 2 * w}, {a}, [c, h, w](Node<T>& self) {
        NodePtr<T>& p = self.parents[0];
        if (!p->needs_grad) return;
        p->ensure_grad();
        for (int ch = 0; ch < c; ++ch)
          for (int y = 0; y < 2 * h; ++y)
            for (int x = 0; x < 2 * w; ++x)
              p->g[(static_cast<size_t>(ch) * h + y / 2) * w + x / 2] +=
                  self.g[(static_cast<size_t>(ch) * 2 * h + y) * 2 * w + x];
      });
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < 2 * h; ++y)
      for (int x = 0; x < 2 * w; ++x)
        out->v[(static_cast<size_t>(ch) * 2 * h + y) * 2 * w + x] =
            a->v[(static_cast<size_t>(ch) * h + y / 2) * w + x / 2];
  return out;
}

// 2x2 max pooling, stride 2, truncating odd trailing rows/columns.
template <typename T>
NodePtr<T> maxpool2(NodePtr<T> a) {
  if (a->shape.size() != 3) throw std::invalid_argument("maxpool2: need CHW");
  const int c = a->shape[0], h = a->shape[1], w = a->shape[2];
  const int ho = h / 2, wo = w / 2;
  if (ho < 1 || wo < 1) throw std::invalid_argument("maxpool2: input too small");
  std::vector<uint32_t> argmax(static_cast<size_t>(c) * ho * wo);
  NodePtr<T> out = make_node<T>({c, ho, wo});
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < ho; ++y)
      for (int x = 0; x < wo; ++x) {
        size_t best = (static_cast<size_t>(ch) * h + 2 * y) * w + 2 * x;
        T bv = a->v[best];
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const size_t i = (static_cast<size_t>(ch) * h + 2 * y + dy) * w + 2 * x + dx;
            if (a->v[i] > bv) {
              bv = a->v[i];
              best = i;
            }
          }
        const size_t o = (static_cast<size_t>(ch) * ho + y) * wo + x;
        out->v[o] = bv;
        argmax[o] = static_cast<uint32_t>(best);
      }
  if (wants_grad<T>({a})) {
    out->needs_grad = true;
    out->parents = {a};
    out->backprop = [argmax = std::move(argmax)](Node<T>& self) {
      NodePtr<T>& p = self.parents[0];
      if (!p->needs_grad) return;
      p->ensure_grad();
      for (size_t o = 0; o < self.g.size(); ++o) p->g[argmax[o]] += self.g[o];
    };
  }
  return out;
}

struct ConvOpts {
  int stride = 1;
  int pad = 0;
  int dilation = 1;
  PadMode pad_mode = PadMode::zero;
};

namespace detail {

inline int conv_out_dim(int in, int k, const ConvOpts& o) {
  const int span = o.dilation * (k - 1) + 1;
  const int out = (in + 2 * o.pad - span) / o.stride + 1;
  if (out < 1) throw std::invalid_argument("conv2d: input smaller than kernel span");
  return out;
}

// Fills the im2col block for output rows [row0, row0+rows): one matrix row
// per (ci, ky, kx), one column per output pixel of the band. Out-of-range
// samples are zero (zero padding) or mirrored (reflect padding).
template <typename T>
void fill_im2col(const std::vector<T>& x, int ci, int h, int w, int k, const ConvOpts& o,
                 int wo, int row0, int rows, MatrixRM<T>& col) {
  for (int c = 0; c < ci; ++c)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const int r = (c * k + ky) * k + kx;
        T* dst = col.data() + static_cast<size_t>(r) * col.cols();
        for (int oy = row0; oy < row0 + rows; ++oy) {
          const int iy = oy * o.stride - o.pad + ky * o.dilation;
          const int my = o.pad_mode == PadMode::reflect ? mirror_index(iy, h) : iy;
          const bool y_ok = my >= 0 && my < h;
          for (int ox = 0; ox < wo; ++ox, ++dst) {
            const int ix = ox * o.stride - o.pad + kx * o.dilation;
            const int mx = o.pad_mode == PadMode::reflect ? mirror_index(ix, w) : ix;
            *dst = (y_ok && mx >= 0 && mx < w)
                       ? x[(static_cast<size_t>(c) * h + my) * w + mx]
                       : T(0);
          }
        }
      }
}

// Scatter-adds a col-shaped gradient block back onto the input gradient,
// the transpose of fill_im2col.
template <typename T>
void scatter_col_grad(const MatrixRM<T>& dcol, int ci, int h, int w, int k, const ConvOpts& o,
                      int wo, int row0, int rows, std::vector<T>& dx) {
  for (int c = 0; c < ci; ++c)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const int r = (c * k + ky) * k + kx;
        const T* src = dcol.data() + static_cast<size_t>(r) * dcol.cols();
        for (int oy = row0; oy < row0 + rows; ++oy) {
          const int iy = oy * o.stride - o.pad + ky * o.dilation;
          const int my = o.pad_mode == PadMode::reflect ? mirror_index(iy, h) : iy;
          const bool y_ok = my >= 0 && my < h;
          for (int ox = 0; ox < wo; ++ox, ++src) {
            const int ix = ox * o.stride - o.pad + kx * o.dilation;
            const int mx = o.pad_mode == PadMode::reflect ? mirror_index(ix, w) : ix;
            if (y_ok && mx >= 0 && mx < w)
              dx[(static_cast<size_t>(c) * h + my) * w + mx] += *src;
          }
        }
      }
}

template <typename T>
int conv_band_rows(int ci, int k, int wo) {
  const size_t bytes_per_row =
      static_cast<size_t>(ci) * k * k * wo * sizeof(T);
  const size_t rows = std::max<size_t>(1, im2col_budget_bytes / std::max<size_t>(1, bytes_per_row));
  return static_cast<int>(std::min<size_t>(rows, 1u << 20));
}

}  // namespace detail

// x: (Ci,H,W), weight: (Co,Ci,K,K), bias: (Co). Returns (Co,Ho,Wo).
template <typename T>
NodePtr<T> conv2d(NodePtr<T> x, NodePtr<T> weight, NodePtr<T> bias, const ConvOpts& opts) {
  if (x->shape.size() != 3 || weight->shape.size() != 4)
    throw std::invalid_argument("conv2d: expected CHW input and OIKK weight");
  const int ci = x->shape[0], h = x->shape[1], w = x->shape[2];
  const int co = weight->shape[0], k = weight->shape[2];
  if (weight->shape[1] != ci || weight->shape[3] != k)
    throw std::invalid_argument("conv2d: weight does not match input channels");
  if (bias && (bias->shape.size() != 1 || bias->shape[0] != co))
    throw std::invalid_argument("conv2d: bad bias shape");
  if (opts.pad_mode == PadMode::reflect && (opts.pad >= h || opts.pad >= w))
    throw std::invalid_argument("conv2d: reflect padding needs pad < spatial dims");
  const int ho = detail::conv_out_dim(h, k, opts);
  const int wo = detail::conv_out_dim(w, k, opts);
  const int rk = ci * k * k;

  std::vector<NodePtr<T>> inputs = bias ? std::vector<NodePtr<T>>{x, weight, bias}
                                        : std::vector<NodePtr<T>>{x, weight};
  ConvOpts o = opts;
  NodePtr<T> out = make_op_node<T>(
      {co, ho, wo}, inputs, [ci, h, w, co, k, ho, wo, rk, o](Node<T>& self) {
        NodePtr<T>& px = self.parents[0];
        NodePtr<T>& pw = self.parents[1];
        NodePtr<T> pb = self.parents.size() > 2 ? self.parents[2] : nullptr;

        Eigen::Map<const MatrixRM<T>> wmat(pw->v.data(), co, rk);
        Eigen::Map<const MatrixRM<T>> dy(self.g.data(), co, static_cast<size_t>(ho) * wo);

        if (pb && pb->needs_grad) {
          pb->ensure_grad();
          // Summed by hand: Eigen's vectorized reduction orders the adds by
          // buffer alignment, and gradients must not depend on heap layout.
          const size_t plane = static_cast<size_t>(ho) * wo;
          for (int oc = 0; oc < co; ++oc) {
            const T* gp = self.g.data() + oc * plane;
            double acc = 0.0;
            for (size_t i = 0; i < plane; ++i) acc += gp[i];
            pb->g[oc] += static_cast<T>(acc);
          }
        }
        if (!px->needs_grad && !pw->needs_grad) return;
        if (px->needs_grad) px->ensure_grad();
        if (pw->needs_grad) pw->ensure_grad();

        const int band = std::min(detail::conv_band_rows<T>(ci, k, wo), ho);
        MatrixRM<T> col(rk, static_cast<size_t>(band) * wo);
        for (int row0 = 0; row0 < ho; row0 += band) {
          const int rows = std::min(band, ho - row0);
          auto dy_band = dy.middleCols(static_cast<size_t>(row0) * wo,
                                       static_cast<size_t>(rows) * wo);
          if (pw->needs_grad) {
            detail::fill_im2col(px->v, ci, h, w, k, o, wo, row0, rows, col);
            Eigen::Map<MatrixRM<T>> dwmat(pw->g.data(), co, rk);
            dwmat.noalias() += dy_band * col.leftCols(static_cast<size_t>(rows) * wo).transpose();
          }
          if (px->needs_grad) {
            MatrixRM<T> dcol = wmat.transpose() * dy_band;
            detail::scatter_col_grad(dcol, ci, h, w, k, o, wo, row0, rows, px->g);
          }
        }
      });

  Eigen::Map<const MatrixRM<T>> wmat(weight->v.data(), co, rk);
  Eigen::Map<MatrixRM<T>> ymat(out->v.data(), co, static_cast<size_t>(ho) * wo);
  const int band = std::min(detail::conv_band_rows<T>(ci, k, wo), ho);
  MatrixRM<T> col(rk, static_cast<size_t>(band) * wo);
  for (int row0 = 0; row0 < ho; row0 += band) {
    const int rows = std::min(band, ho - row0);
    detail::fill_im2col(x->v, ci, h, w, k, opts, wo, row0, rows, col);
    ymat.middleCols(static_cast<size_t>(row0) * wo, static_cast<size_t>(rows) * wo).noalias() =
        wmat * col.leftCols(static_cast<size_t>(rows) * wo);
  }
  if (bias)
    for (int oc = 0; oc < co; ++oc)
      ymat.row(oc).array() += bias->v[oc];
  return out;
}

// Per-channel normalization over the spatial extent of a single sample,
// followed by the learned affine transform.
template <typename T>
NodePtr<T> instance_norm(NodePtr<T> x, NodePtr<T> gamma, NodePtr<T> beta, T eps = T(1e-5)) {
  if (x->shape.size() != 3) throw std::invalid_argument("instance_norm: need CHW");
  const int c = x->shape[0], h = x->shape[1], w = x->shape[2];
  if (gamma->shape != std::vector<int>{c} || beta->shape != std::vector<int>{c})
    throw std::invalid_argument("instance_norm: affine parameters must have C entries");
  const size_t hw = static_cast<size_t>(h) * w;

  std::vector<T> xhat(x->v.size());
  std::vector<T> inv_sigma(c);
  for (int ch = 0; ch < c; ++ch) {
    const T* px = x->v.data() + ch * hw;
    T mean = T(0);
    for (size_t i = 0; i < hw; ++i) mean += px[i];
    mean /= static_cast<T>(hw);
    T var = T(0);
    for (size_t i = 0; i < hw; ++i) {
      const T d = px[i] - mean;
      var += d * d;
    }
    var /= static_cast<T>(hw);
    const T is = T(1) / std::sqrt(var + eps);
    inv_sigma[ch] = is;
    T* ph = xhat.data() + ch * hw;
    for (size_t i = 0; i < hw; ++i) ph[i] = (px[i] - mean) * is;
  }

  std::vector<T> yv(x->v.size());
  for (int ch = 0; ch < c; ++ch) {
    const T g = gamma->v[ch], b = beta->v[ch];
    T* po = yv.data() + ch * hw;
    const T* ph = xhat.data() + ch * hw;
    for (size_t i = 0; i < hw; ++i) po[i] = g * ph[i] + b;
  }

  NodePtr<T> out = make_op_node<T>(
      x->shape, {x, gamma, beta},
      [c, hw, xhat = std::move(xhat), inv_sigma = std::move(inv_sigma)](Node<T>& self) {
        NodePtr<T>& px = self.parents[0];
        NodePtr<T>& pg = self.parents[1];
        NodePtr<T>& pb = self.parents[2];
        for (int ch = 0; ch < c; ++ch) {
          const T* dy = self.g.data() + ch * hw;
          const T* ph = xhat.data() + ch * hw;
          if (pb->needs_grad) {
            pb->ensure_grad();
            T acc = T(0);
            for (size_t i = 0; i < hw; ++i) acc += dy[i];
            pb->g[ch] += acc;
          }
          if (pg->needs_grad) {
            pg->ensure_grad();
            T acc = T(0);
            for (size_t i = 0; i < hw; ++i) acc += dy[i] * ph[i];
            pg->g[ch] += acc;
          }
          if (px->needs_grad) {
            px->ensure_grad();
            const T g = pg->v[ch];
            T mean_dy = T(0), mean_dyh = T(0);
            for (size_t i = 0; i < hw; ++i) {
              mean_dy += dy[i];
              mean_dyh += dy[i] * ph[i];
            }
            mean_dy /= static_cast<T>(hw);
            mean_dyh /= static_cast<T>(hw);
            T* dx = px->g.data() + ch * hw;
            const T s = g * inv_sigma[ch];
            for (size_t i = 0; i < hw; ++i)
              dx[i] += s * (dy[i] - mean_dy - ph[i] * mean_dyh);
          }
        }
      });
  out->v = std::move(yv);
  return out;
}

// Gram matrix of a CHW activation: G = F F^T / (C*H*W) with F the C x (H*W)
// unfolding.
template <typename T>
NodePtr<T> gram(NodePtr<T> x) {
  if (x->shape.size() != 3) throw std::invalid_argument("gram: need CHW");
  const int c = x->shape[0];
  const size_t hw = static_cast<size_t>(x->shape[1]) * x->shape[2];
  const T norm = T(1) / (static_cast<T>(c) * static_cast<T>(hw));
  NodePtr<T> out = make_op_node<T>(
      {c, c}, {x}, [c, hw, norm](Node<T>& self) {
        NodePtr<T>& p = self.parents[0];
        if (!p->needs_grad) return;
        p->ensure_grad();
        Eigen::Map<const MatrixRM<T>> f(p->v.data(), c, hw);
        Eigen::Map<const MatrixRM<T>> dg(self.g.data(), c, c);
        Eigen::Map<MatrixRM<T>> df(p->g.data(), c, hw);
        df.noalias() += norm * (dg + dg.transpose()) * f;
      });
  Eigen::Map<const MatrixRM<T>> f(x->v.data(), c, hw);
  Eigen::Map<MatrixRM<T>> g(out->v.data(), c, c);
  g.noalias() = norm * (f * f.transpose());
  return out;
}

// Per-channel y = x * scale + shift on a CHW array; used to map [0,1] images
// into a classifier's expected input range without touching the pipeline.
template <typename T>
NodePtr<T> channel_affine(NodePtr<T> x, std::vector<T> ch_scale, std::vector<T> ch_shift) {
  if (x->shape.size() != 3 || ch_scale.size() != static_cast<size_t>(x->shape[0]) ||
      ch_shift.size() != ch_scale.size())
    throw std::invalid_argument("channel_affine: per-channel vectors must match C");
  const int c = x->shape[0];
  const size_t hw = static_cast<size_t>(x->shape[1]) * x->shape[2];
  NodePtr<T> out = make_op_node<T>(
      x->shape, {x}, [c, hw, ch_scale](Node<T>& self) {
        NodePtr<T>& p = self.parents[0];
        if (!p->needs_grad) return;
        p->ensure_grad();
        for (int ch = 0; ch < c; ++ch)
          for (size_t i = 0; i < hw; ++i)
            p->g[ch * hw + i] += ch_scale[ch] * self.g[ch * hw + i];
      });
  for (int ch = 0; ch < c; ++ch)
    for (size_t i = 0; i < hw; ++i)
      out->v[ch * hw + i] = ch_scale[ch] * x->v[ch * hw + i] + ch_shift[ch];
  return out;
}

// Divides a raw weight by its leading singular value estimated as u^T W v;
// u and v are treated as constants of the current step.
template <typename T>
NodePtr<T> spectral_scale(NodePtr<T> weight, std::vector<T> u, std::vector<T> v, T sigma) {
  const T inv = T(1) / sigma;
  const int rows = static_cast<int>(u.size());
  const int cols = static_cast<int>(v.size());
  if (weight->numel() != u.size() * v.size())
    throw std::invalid_argument("spectral_scale: u/v do not factor the weight");
  NodePtr<T> out = make_op_node<T>(
      weight->shape, {weight},
      [u = std::move(u), v = std::move(v), inv, rows, cols](Node<T>& self) {
        NodePtr<T>& p = self.parents[0];
        if (!p->needs_grad) return;
        p->ensure_grad();
        // d(W/sigma) = G/sigma - (<G, W_hat>/sigma) u v^T
        T inner = T(0);
        for (size_t i = 0; i < self.g.size(); ++i) inner += self.g[i] * self.v[i];
        const T coef = inner * inv;
        for (int r = 0; r < rows; ++r)
          for (int cidx = 0; cidx < cols; ++cidx) {
            const size_t i = static_cast<size_t>(r) * cols + cidx;
            p->g[i] += self.g[i] * inv - coef * u[r] * v[cidx];
          }
      });
  for (size_t i = 0; i < out->v.size(); ++i) out->v[i] = weight->v[i] * inv;
  return out;
}

}  // namespace edgesr::nn
