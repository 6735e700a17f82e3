#pragma once

// Training objectives: hinge adversarial terms, discriminator feature
// matching, pixel l1, and the perceptual/style pair over frozen classifier
// features, plus the two weighted joint objectives.

#include <stdexcept>
#include <vector>

#include "edgesr/nn/extractor.hpp"
#include "edgesr/nn/ops.hpp"

namespace edgesr {

struct LossWeights {
  double lambda_g1 = 1.0;
  double lambda_fm = 10.0;
  double lambda_l1 = 1.0;
  double lambda_g2 = 0.1;
  double lambda_p = 0.1;
  double lambda_s = 250.0;

  void validate() const {
    if (lambda_g1 < 0 || lambda_fm < 0 || lambda_l1 < 0 || lambda_g2 < 0 || lambda_p < 0 ||
        lambda_s < 0)
      throw std::invalid_argument("LossWeights: weights must be nonnegative");
  }
};

namespace losses {

using nn::NodePtr;

// mean(max(0, 1 - real)) + mean(max(0, 1 + fake))
template <typename T>
NodePtr<T> hinge_d(NodePtr<T> real, NodePtr<T> fake) {
  if (real->shape != fake->shape)
    throw std::invalid_argument("hinge_d: score maps must have identical shape");
  NodePtr<T> real_term = nn::mean_all(nn::relu(nn::add_scalar(nn::scale(real, T(-1)), T(1))));
  NodePtr<T> fake_term = nn::mean_all(nn::relu(nn::add_scalar(fake, T(1))));
  return nn::add(real_term, fake_term);
}

// -mean(fake)
template <typename T>
NodePtr<T> hinge_g(NodePtr<T> fake) {
  return nn::scale(nn::mean_all(fake), T(-1));
}

// mean |a - b|
template <typename T>
NodePtr<T> l1(NodePtr<T> a, NodePtr<T> b) {
  return nn::mean_all(nn::abs_val(nn::sub(a, b)));
}

// sum_i mean_i |real_i - fake_i| over paired activation lists
template <typename T>
NodePtr<T> feature_matching(const std::vector<NodePtr<T>>& real,
                            const std::vector<NodePtr<T>>& fake) {
  if (real.empty() || real.size() != fake.size())
    throw std::invalid_argument("feature_matching: activation lists must pair up");
  NodePtr<T> total;
  for (size_t i = 0; i < real.size(); ++i) {
    if (real[i]->shape != fake[i]->shape)
      throw std::invalid_argument("feature_matching: layer shapes must match");
    NodePtr<T> term = nn::mean_all(nn::abs_val(nn::sub(real[i], fake[i])));
    total = total ? nn::add(total, term) : term;
  }
  return total;
}

// sum_i mean_i |phi_i(gt) - phi_i(pred)| over the extractor's tap layers
template <typename T>
NodePtr<T> perceptual(NodePtr<T> gt, NodePtr<T> pred, const nn::FeatureExtractor<T>& fx) {
  if (gt->shape != pred->shape)
    throw std::invalid_argument("perceptual: images must have identical shape");
  return feature_matching(fx.features(gt), fx.features(pred));
}

// sum_i || G(phi_i(gt)) - G(phi_i(pred)) ||_1, entrywise over Gram matrices
template <typename T>
NodePtr<T> style(NodePtr<T> gt, NodePtr<T> pred, const nn::FeatureExtractor<T>& fx) {
  if (gt->shape != pred->shape)
    throw std::invalid_argument("style: images must have identical shape");
  std::vector<NodePtr<T>> fa = fx.features(gt);
  std::vector<NodePtr<T>> fb = fx.features(pred);
  NodePtr<T> total;
  for (size_t i = 0; i < fa.size(); ++i) {
    NodePtr<T> term = nn::sum_all(nn::abs_val(nn::sub(nn::gram(fa[i]), nn::gram(fb[i]))));
    total = total ? nn::add(total, term) : term;
  }
  return total;
}

template <typename T>
NodePtr<T> joint_g1(NodePtr<T> adv, NodePtr<T> fm, const LossWeights& w) {
  return nn::add(nn::scale(adv, T(w.lambda_g1)), nn::scale(fm, T(w.lambda_fm)));
}

template <typename T>
NodePtr<T> joint_g2(NodePtr<T> l1_term, NodePtr<T> adv, NodePtr<T> perc, NodePtr<T> style_term,
                    const LossWeights& w) {
  NodePtr<T> total = nn::add(nn::scale(l1_term, T(w.lambda_l1)), nn::scale(adv, T(w.lambda_g2)));
  total = nn::add(total, nn::scale(perc, T(w.lambda_p)));
  return nn::add(total, nn::scale(style_term, T(w.lambda_s)));
}

inline double joint_g1(double adv, double fm, const LossWeights& w) {
  return w.lambda_g1 * adv + w.lambda_fm * fm;
}

inline double joint_g2(double l1_term, double adv, double perc, double style_term,
                       const LossWeights& w) {
  return w.lambda_l1 * l1_term + w.lambda_g2 * adv + w.lambda_p * perc +
         w.lambda_s * style_term;
}

}  // namespace losses
}  // namespace edgesr
