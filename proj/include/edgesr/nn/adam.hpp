#pragma once

// Adam with bias correction. One optimizer instance owns the moment buffers
// for a fixed parameter list; the buffers and step counter round-trip through
// checkpoints so resumed runs continue bit-identically.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "edgesr/nn/autograd.hpp"

namespace edgesr::nn {

template <typename T>
class Adam {
 public:
  struct Slot {
    std::string name;
    NodePtr<T> param;
    std::vector<T> m;
    std::vector<T> v;
  };

  Adam(const std::vector<std::pair<std::string, NodePtr<T>>>& params, double lr, double beta1,
       double beta2, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (params.empty()) throw std::invalid_argument("Adam: empty parameter list");
    for (const auto& [name, p] : params) {
      Slot s;
      s.name = name;
      s.param = p;
      s.m.assign(p->numel(), T(0));
      s.v.assign(p->numel(), T(0));
      slots_.push_back(std::move(s));
    }
  }

  void zero_grad() {
    for (Slot& s : slots_) s.param->zero_grad();
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (Slot& s : slots_) {
      s.param->ensure_grad();
      for (size_t i = 0; i < s.m.size(); ++i) {
        const double g = static_cast<double>(s.param->g[i]);
        const double m = beta1_ * s.m[i] + (1.0 - beta1_) * g;
        const double v = beta2_ * s.v[i] + (1.0 - beta2_) * g * g;
        s.m[i] = static_cast<T>(m);
        s.v[i] = static_cast<T>(v);
        const double update = lr_ * (m / bc1) / (std::sqrt(v / bc2) + eps_);
        s.param->v[i] -= static_cast<T>(update);
      }
    }
  }

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  double beta1() const { return beta1_; }
  double beta2() const { return beta2_; }
  int64_t step_count() const { return t_; }
  void set_step_count(int64_t t) { t_ = t; }
  std::vector<Slot>& slots() { return slots_; }
  const std::vector<Slot>& slots() const { return slots_; }

 private:
  std::vector<Slot> slots_;
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
};

}  // namespace edgesr::nn
