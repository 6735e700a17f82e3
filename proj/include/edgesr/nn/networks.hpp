#pragma once

// The four networks: edge generator, completion generator, and their patch
// discriminators. Generators keep spatial size through a downsample-2x2 /
// residual / upsample-2x2 hourglass; discriminators map the input to a grid
// of patch scores whose receptive field is 70x70 pixels.

#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgesr/image.hpp"
#include "edgesr/nn/layers.hpp"

namespace edgesr::nn {

struct GeneratorSpec {
  int in_channels = 2;
  int out_channels = 1;
  int base_width = 64;
  int n_residual_blocks = 8;
  int residual_dilation = 2;
  int downsample_steps = 2;
  bool use_spectral_norm = true;

  void validate() const {
    if (in_channels < 1 || out_channels < 1 || base_width < 1)
      throw std::invalid_argument("GeneratorSpec: channel counts must be positive");
    if (n_residual_blocks != 8)
      throw std::invalid_argument("GeneratorSpec: residual trunk is fixed at 8 blocks");
    if (downsample_steps != 2)
      throw std::invalid_argument("GeneratorSpec: encoder is fixed at 2 downsampling steps");
    if (residual_dilation < 1)
      throw std::invalid_argument("GeneratorSpec: dilation must be >= 1");
  }
};

struct DiscriminatorSpec {
  int in_channels = 2;
  int base_width = 64;
  bool use_spectral_norm = true;

  void validate() const {
    if (in_channels < 1 || base_width < 1)
      throw std::invalid_argument("DiscriminatorSpec: channel counts must be positive");
  }
};

template <typename T>
class Generator {
 public:
  Generator(const GeneratorSpec& spec, std::mt19937& rng) : spec_(spec) {
    spec_.validate();
    const int w = spec_.base_width;
    const bool sn = spec_.use_spectral_norm;
    enc1_ = std::make_unique<Conv2dLayer<T>>(
        spec_.in_channels, w, 7, ConvOpts{1, 3, 1, PadMode::reflect}, sn, rng);
    enc1_norm_ = std::make_unique<InstanceNorm2d<T>>(w);
    enc2_ = std::make_unique<Conv2dLayer<T>>(w, 2 * w, 4, ConvOpts{2, 1, 1, PadMode::zero}, sn,
                                             rng);
    enc2_norm_ = std::make_unique<InstanceNorm2d<T>>(2 * w);
    enc3_ = std::make_unique<Conv2dLayer<T>>(2 * w, 4 * w, 4, ConvOpts{2, 1, 1, PadMode::zero},
                                             sn, rng);
    enc3_norm_ = std::make_unique<InstanceNorm2d<T>>(4 * w);
    for (int i = 0; i < spec_.n_residual_blocks; ++i)
      blocks_.push_back(
          std::make_unique<ResidualBlock<T>>(4 * w, spec_.residual_dilation, sn, rng));
    dec1_ = std::make_unique<Conv2dLayer<T>>(4 * w, 2 * w, 3, ConvOpts{1, 1, 1, PadMode::reflect},
                                             sn, rng);
    dec1_norm_ = std::make_unique<InstanceNorm2d<T>>(2 * w);
    dec2_ = std::make_unique<Conv2dLayer<T>>(2 * w, w, 3, ConvOpts{1, 1, 1, PadMode::reflect},
                                             sn, rng);
    dec2_norm_ = std::make_unique<InstanceNorm2d<T>>(w);
    out_ = std::make_unique<Conv2dLayer<T>>(w, spec_.out_channels, 7,
                                            ConvOpts{1, 3, 1, PadMode::reflect}, sn, rng);
  }

  NodePtr<T> forward(NodePtr<T> x) {
    if (x->shape.size() != 3 || x->shape[0] != spec_.in_channels)
      throw std::invalid_argument("Generator: input must be (" +
                                  std::to_string(spec_.in_channels) + ",H,W)");
    if (x->shape[1] % 4 != 0 || x->shape[2] % 4 != 0 || x->shape[1] < 16 || x->shape[2] < 16)
      throw std::invalid_argument("Generator: spatial dims must be multiples of 4, at least 16");
    NodePtr<T> h = relu(enc1_norm_->forward(enc1_->forward(x)));
    h = relu(enc2_norm_->forward(enc2_->forward(h)));
    h = relu(enc3_norm_->forward(enc3_->forward(h)));
    for (auto& b : blocks_) h = b->forward(h);
    h = relu(dec1_norm_->forward(dec1_->forward(upsample_nearest2(h))));
    h = relu(dec2_norm_->forward(dec2_->forward(upsample_nearest2(h))));
    return sigmoid(out_->forward(h));
  }

  void set_training(bool on) {
    enc1_->set_training(on);
    enc2_->set_training(on);
    enc3_->set_training(on);
    for (auto& b : blocks_) b->set_training(on);
    dec1_->set_training(on);
    dec2_->set_training(on);
    out_->set_training(on);
  }

  void collect(const std::string& prefix, ParamRefs<T>& out) {
    enc1_->collect(prefix + ".enc1", out);
    enc1_norm_->collect(prefix + ".enc1_norm", out);
    enc2_->collect(prefix + ".enc2", out);
    enc2_norm_->collect(prefix + ".enc2_norm", out);
    enc3_->collect(prefix + ".enc3", out);
    enc3_norm_->collect(prefix + ".enc3_norm", out);
    for (size_t i = 0; i < blocks_.size(); ++i)
      blocks_[i]->collect(prefix + ".res" + std::to_string(i), out);
    dec1_->collect(prefix + ".dec1", out);
    dec1_norm_->collect(prefix + ".dec1_norm", out);
    dec2_->collect(prefix + ".dec2", out);
    dec2_norm_->collect(prefix + ".dec2_norm", out);
    out_->collect(prefix + ".out", out);
  }

  const GeneratorSpec& spec() const { return spec_; }

 private:
  GeneratorSpec spec_;
  std::unique_ptr<Conv2dLayer<T>> enc1_, enc2_, enc3_, dec1_, dec2_, out_;
  std::unique_ptr<InstanceNorm2d<T>> enc1_norm_, enc2_norm_, enc3_norm_, dec1_norm_, dec2_norm_;
  std::vector<std::unique_ptr<ResidualBlock<T>>> blocks_;
};

template <typename T>
struct DiscriminatorOut {
  NodePtr<T> score;                   // (1, Ho, Wo) patch-score map
  std::vector<NodePtr<T>> features;   // post-activation maps of the 4 hidden convs
};

// Patch discriminator: 4x4 convolutions at widths w, 2w, 4w, 8w with strides
// 2,2,2,1 and a final stride-1 score convolution; each score sees a 70x70
// window of the input. LeakyReLU(0.2) activations, no normalization layers.
template <typename T>
class Discriminator {
 public:
  Discriminator(const DiscriminatorSpec& spec, std::mt19937& rng) : spec_(spec) {
    spec_.validate();
    const int w = spec_.base_width;
    const bool sn = spec_.use_spectral_norm;
    const ConvOpts s2{2, 1, 1, PadMode::zero};
    const ConvOpts s1{1, 1, 1, PadMode::zero};
    conv1_ = std::make_unique<Conv2dLayer<T>>(spec_.in_channels, w, 4, s2, sn, rng);
    conv2_ = std::make_unique<Conv2dLayer<T>>(w, 2 * w, 4, s2, sn, rng);
    conv3_ = std::make_unique<Conv2dLayer<T>>(2 * w, 4 * w, 4, s2, sn, rng);
    conv4_ = std::make_unique<Conv2dLayer<T>>(4 * w, 8 * w, 4, s1, sn, rng);
    score_ = std::make_unique<Conv2dLayer<T>>(8 * w, 1, 4, s1, sn, rng);
  }

  DiscriminatorOut<T> forward(NodePtr<T> x) {
    if (x->shape.size() != 3 || x->shape[0] != spec_.in_channels)
      throw std::invalid_argument("Discriminator: input must be (" +
                                  std::to_string(spec_.in_channels) + ",H,W)");
    DiscriminatorOut<T> out;
    NodePtr<T> h = leaky_relu(conv1_->forward(x), T(0.2));
    out.features.push_back(h);
    h = leaky_relu(conv2_->forward(h), T(0.2));
    out.features.push_back(h);
    h = leaky_relu(conv3_->forward(h), T(0.2));
    out.features.push_back(h);
    h = leaky_relu(conv4_->forward(h), T(0.2));
    out.features.push_back(h);
    out.score = score_->forward(h);
    return out;
  }

  void set_training(bool on) {
    conv1_->set_training(on);
    conv2_->set_training(on);
    conv3_->set_training(on);
    conv4_->set_training(on);
    score_->set_training(on);
  }

  void collect(const std::string& prefix, ParamRefs<T>& out) {
    conv1_->collect(prefix + ".conv1", out);
    conv2_->collect(prefix + ".conv2", out);
    conv3_->collect(prefix + ".conv3", out);
    conv4_->collect(prefix + ".conv4", out);
    score_->collect(prefix + ".score", out);
  }

  const DiscriminatorSpec& spec() const { return spec_; }

 private:
  DiscriminatorSpec spec_;
  std::unique_ptr<Conv2dLayer<T>> conv1_, conv2_, conv3_, conv4_, score_;
};

// Conversions between the imaging types (HWC interleaved float) and graph
// nodes (planar CHW).
template <typename T>
NodePtr<T> image_to_node(const ImageTensor& img) {
  NodePtr<T> n = make_node<T>({img.channels, img.height, img.width});
  const size_t hw = static_cast<size_t>(img.height) * img.width;
  for (int c = 0; c < img.channels; ++c)
    for (size_t i = 0; i < hw; ++i)
      n->v[c * hw + i] = static_cast<T>(img.data[i * img.channels + c]);
  return n;
}

template <typename T>
NodePtr<T> edges_to_node(const EdgeMap& m) {
  NodePtr<T> n = make_node<T>({1, m.height, m.width});
  for (size_t i = 0; i < m.data.size(); ++i) n->v[i] = static_cast<T>(m.data[i]);
  return n;
}

template <typename T>
ImageTensor node_to_image(const NodePtr<T>& n) {
  if (n->shape.size() != 3) throw std::invalid_argument("node_to_image: need CHW");
  ImageTensor img(n->shape[1], n->shape[2], n->shape[0]);
  const size_t hw = static_cast<size_t>(img.height) * img.width;
  for (int c = 0; c < img.channels; ++c)
    for (size_t i = 0; i < hw; ++i) {
      float v = static_cast<float>(n->v[c * hw + i]);
      img.data[i * img.channels + c] = std::min(1.0f, std::max(0.0f, v));
    }
  return img;
}

template <typename T>
EdgeMap node_to_edges(const NodePtr<T>& n, EdgeKind kind) {
  if (n->shape.size() != 3 || n->shape[0] != 1)
    throw std::invalid_argument("node_to_edges: need (1,H,W)");
  EdgeMap m(n->shape[1], n->shape[2], kind);
  for (size_t i = 0; i < m.data.size(); ++i) {
    float v = static_cast<float>(n->v[i]);
    m.data[i] = std::min(1.0f, std::max(0.0f, v));
  }
  return m;
}

}  // namespace edgesr::nn
