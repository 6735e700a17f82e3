#pragma once

// Frozen convolutional feature extractor shaped like the VGG-19 prefix up to
// relu5_1. The perceptual and style losses read the activations after the
// first convolution of each block. Weights are never trained here; gradients
// flow through the extractor into its input only.

#include <array>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgesr/nn/ops.hpp"

namespace edgesr::nn {

template <typename T>
class FeatureExtractor {
 public:
  struct ConvDef {
    std::string name;
    int in_c;
    int out_c;
    bool tap;          // activation recorded after this conv's ReLU
    bool pool_before;  // 2x2 max pool applied before this conv
  };

  // Channel plan of VGG-19 through relu5_1.
  static const std::vector<ConvDef>& conv_plan() {
    static const std::vector<ConvDef> plan = {
        {"conv1_1", 3, 64, true, false},    {"conv1_2", 64, 64, false, false},
        {"conv2_1", 64, 128, true, true},   {"conv2_2", 128, 128, false, false},
        {"conv3_1", 128, 256, true, true},  {"conv3_2", 256, 256, false, false},
        {"conv3_3", 256, 256, false, false}, {"conv3_4", 256, 256, false, false},
        {"conv4_1", 256, 512, true, true},  {"conv4_2", 512, 512, false, false},
        {"conv4_3", 512, 512, false, false}, {"conv4_4", 512, 512, false, false},
        {"conv5_1", 512, 512, true, true},
    };
    return plan;
  }

  static constexpr int n_taps = 5;

  // Weights keyed "<name>.weight" (out*in*3*3, OIKK order) and "<name>.bias".
  explicit FeatureExtractor(const std::map<std::string, std::vector<T>>& weights)
      : FeatureExtractor() {
    for (const ConvDef& def : conv_plan()) {
      auto wit = weights.find(def.name + ".weight");
      auto bit = weights.find(def.name + ".bias");
      if (wit == weights.end() || bit == weights.end())
        throw std::invalid_argument("FeatureExtractor: missing weights for " + def.name);
      push_conv(def, wit->second, bit->second);
    }
  }

  // Random extractor for tests: He-scaled weights keep activation magnitudes
  // stable through the 13 convolutions.
  static FeatureExtractor random(std::mt19937& rng) {
    FeatureExtractor fx;
    for (const ConvDef& def : conv_plan()) {
      std::vector<T> w(static_cast<size_t>(def.out_c) * def.in_c * 9);
      std::vector<T> b(def.out_c, T(0));
      std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / (def.in_c * 9.0)));
      for (T& x : w) x = static_cast<T>(dist(rng));
      fx.push_conv(def, w, b);
    }
    return fx;
  }

  // Activations at the five tap points for an RGB input in [0,1]; the
  // classifier's mean/std mapping is applied internally.
  std::vector<NodePtr<T>> features(NodePtr<T> rgb) const {
    if (rgb->shape.size() != 3 || rgb->shape[0] != 3)
      throw std::invalid_argument("FeatureExtractor: input must be (3,H,W)");
    if (rgb->shape[1] < 16 || rgb->shape[2] < 16)
      throw std::invalid_argument("FeatureExtractor: input must be at least 16x16");
    NodePtr<T> h = channel_affine(rgb, scales_, shifts_);
    std::vector<NodePtr<T>> taps;
    const std::vector<ConvDef>& plan = conv_plan();
    for (size_t i = 0; i < plan.size(); ++i) {
      if (plan[i].pool_before) h = maxpool2(h);
      h = relu(conv2d(h, convs_[i].w, convs_[i].b, ConvOpts{1, 1, 1, PadMode::zero}));
      if (plan[i].tap) taps.push_back(h);
    }
    return taps;
  }

 private:
  FeatureExtractor()
      : scales_{T(1.0 / 0.229), T(1.0 / 0.224), T(1.0 / 0.225)},
        shifts_{T(-0.485 / 0.229), T(-0.456 / 0.224), T(-0.406 / 0.225)} {}

  void push_conv(const ConvDef& def, const std::vector<T>& w, const std::vector<T>& b) {
    if (w.size() != static_cast<size_t>(def.out_c) * def.in_c * 9 ||
        b.size() != static_cast<size_t>(def.out_c))
      throw std::invalid_argument("FeatureExtractor: wrong array size for " + def.name);
    Stored s;
    s.w = constant<T>({def.out_c, def.in_c, 3, 3}, w);
    s.b = constant<T>({def.out_c}, b);
    convs_.push_back(std::move(s));
  }

  struct Stored {
    NodePtr<T> w, b;
  };
  std::vector<Stored> convs_;
  std::vector<T> scales_, shifts_;
};

}  // namespace edgesr::nn
