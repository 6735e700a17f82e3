#pragma once

// Trainable layers. Weight tensors are leaves owned by the layer; a layer's
// forward() stitches them into the caller's graph. Spectral normalization
// follows the power-iteration scheme: persistent u/v estimates, one update
// per training forward, a short warmup at construction so the estimate is
// already tight for freshly initialized weights.

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "edgesr/nn/ops.hpp"

namespace edgesr::nn {

// Named views over a module's state: parameters take gradients and optimizer
// slots, buffers (the u/v estimates) are plain persisted arrays.
template <typename T>
struct ParamRefs {
  std::vector<std::pair<std::string, NodePtr<T>>> params;
  std::vector<std::pair<std::string, std::vector<T>*>> buffers;
};

namespace detail {

template <typename T>
void fill_gaussian(std::vector<T>& v, std::mt19937& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (T& x : v) x = static_cast<T>(dist(rng));
}

template <typename T>
void l2_normalize(std::vector<T>& v) {
  double n = 0.0;
  for (T x : v) n += static_cast<double>(x) * x;
  n = std::sqrt(n) + 1e-12;
  for (T& x : v) x = static_cast<T>(x / n);
}

}  // namespace detail

template <typename T>
class Conv2dLayer {
 public:
  // Random Gaussian weights can carry a nearly degenerate top singular pair,
  // and from a cold start the estimate then needs hundreds of iterations to
  // land within a percent of the true norm. Warming up this long at
  // construction keeps the layer 1-Lipschitz from the very first step.
  static constexpr int kSnWarmupIterations = 800;

  Conv2dLayer(int in_c, int out_c, int k, ConvOpts opts, bool spectral_norm, std::mt19937& rng)
      : opts_(opts), use_sn_(spectral_norm), out_c_(out_c), cols_(in_c * k * k) {
    weight_ = make_leaf<T>({out_c, in_c, k, k});
    bias_ = make_leaf<T>({out_c});
    detail::fill_gaussian(weight_->v, rng, 0.02);
    if (use_sn_) {
      u_.resize(out_c_);
      v_.resize(cols_);
      detail::fill_gaussian(u_, rng, 1.0);
      detail::l2_normalize(u_);
      detail::fill_gaussian(v_, rng, 1.0);
      detail::l2_normalize(v_);
      warmup_power_iteration();
    }
  }

  NodePtr<T> forward(NodePtr<T> x) {
    return conv2d(x, effective_weight(), bias_, opts_);
  }

  // The weight actually convolved with: spectrally normalized when enabled.
  NodePtr<T> effective_weight() {
    if (!use_sn_) return weight_;
    if (training_) power_iteration();
    return spectral_scale(weight_, u_, v_, sigma());
  }

  // Plain loops with double accumulators instead of Eigen matrix-vector
  // products: vectorized reductions round differently depending on how the
  // heap happens to align the buffers, which would break bit-exact resume.
  void power_iteration() {
    const T* w = weight_->v.data();
    for (int j = 0; j < cols_; ++j) {
      double acc = 0.0;
      for (int i = 0; i < out_c_; ++i) acc += double(w[size_t(i) * cols_ + j]) * u_[i];
      v_[j] = static_cast<T>(acc);
    }
    detail::l2_normalize(v_);
    for (int i = 0; i < out_c_; ++i) {
      double acc = 0.0;
      for (int j = 0; j < cols_; ++j) acc += double(w[size_t(i) * cols_ + j]) * v_[j];
      u_[i] = static_cast<T>(acc);
    }
    detail::l2_normalize(u_);
  }

  T sigma() const {
    const T* w = weight_->v.data();
    double s = 0.0;
    for (int i = 0; i < out_c_; ++i) {
      double row = 0.0;
      for (int j = 0; j < cols_; ++j) row += double(w[size_t(i) * cols_ + j]) * v_[j];
      s += row * u_[i];
    }
    return s > 1e-12 ? static_cast<T>(s) : T(1e-12);
  }

  // Construction-time bulk iteration. Here Eigen products are fine: the
  // matrix and vectors are owned Eigen objects, allocated aligned, so the
  // summation order is a function of the shape alone and every run rounds
  // identically.
  void warmup_power_iteration() {
    using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
    Mat w(out_c_, cols_);
    std::copy(weight_->v.begin(), weight_->v.end(), w.data());
    Vec u = Eigen::Map<const Vec>(u_.data(), out_c_);
    Vec v(cols_);
    for (int it = 0; it < kSnWarmupIterations; ++it) {
      v.noalias() = w.transpose() * u;
      v /= v.norm() + T(1e-12);
      u.noalias() = w * v;
      u /= u.norm() + T(1e-12);
    }
    std::copy(u.data(), u.data() + out_c_, u_.begin());
    std::copy(v.data(), v.data() + cols_, v_.begin());
  }

  void set_training(bool on) { training_ = on; }
  bool spectral_norm_enabled() const { return use_sn_; }
  NodePtr<T> weight() { return weight_; }
  NodePtr<T> bias() { return bias_; }

  void collect(const std::string& prefix, ParamRefs<T>& out) {
    out.params.emplace_back(prefix + ".weight", weight_);
    out.params.emplace_back(prefix + ".bias", bias_);
    if (use_sn_) {
      out.buffers.emplace_back(prefix + ".sn_u", &u_);
      out.buffers.emplace_back(prefix + ".sn_v", &v_);
    }
  }

 private:
  NodePtr<T> weight_;
  NodePtr<T> bias_;
  std::vector<T> u_, v_;
  ConvOpts opts_;
  bool use_sn_;
  bool training_ = true;
  int out_c_, cols_;
};

template <typename T>
class InstanceNorm2d {
 public:
  explicit InstanceNorm2d(int channels) {
    gamma_ = make_leaf<T>({channels});
    beta_ = make_leaf<T>({channels});
    std::fill(gamma_->v.begin(), gamma_->v.end(), T(1));
  }

  NodePtr<T> forward(NodePtr<T> x) { return instance_norm(x, gamma_, beta_); }

  void collect(const std::string& prefix, ParamRefs<T>& out) {
    out.params.emplace_back(prefix + ".gamma", gamma_);
    out.params.emplace_back(prefix + ".beta", beta_);
  }

 private:
  NodePtr<T> gamma_, beta_;
};

// Two 3x3 convolutions around a skip connection; the first one dilated to
// widen the receptive field without shrinking the map.
template <typename T>
class ResidualBlock {
 public:
  ResidualBlock(int channels, int dilation, bool spectral_norm, std::mt19937& rng)
      : conv1_(channels, channels, 3,
               ConvOpts{1, dilation, dilation, PadMode::reflect}, spectral_norm, rng),
        norm1_(channels),
        conv2_(channels, channels, 3, ConvOpts{1, 1, 1, PadMode::reflect}, spectral_norm, rng),
        norm2_(channels) {}

  NodePtr<T> forward(NodePtr<T> x) {
    NodePtr<T> y = relu(norm1_.forward(conv1_.forward(x)));
    y = norm2_.forward(conv2_.forward(y));
    return add(x, y);
  }

  void set_training(bool on) {
    conv1_.set_training(on);
    conv2_.set_training(on);
  }

  void collect(const std::string& prefix, ParamRefs<T>& out) {
    conv1_.collect(prefix + ".conv1", out);
    norm1_.collect(prefix + ".norm1", out);
    conv2_.collect(prefix + ".conv2", out);
    norm2_.collect(prefix + ".norm2", out);
  }

 private:
  Conv2dLayer<T> conv1_;
  InstanceNorm2d<T> norm1_;
  Conv2dLayer<T> conv2_;
  InstanceNorm2d<T> norm2_;
};

}  // namespace edgesr::nn
