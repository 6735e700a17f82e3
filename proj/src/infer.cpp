#include "edgesr/infer.hpp"

#include <stdexcept>
#include <string>

#include "edgesr/imaging.hpp"
#include "edgesr/nn/networks.hpp"

namespace edgesr {

struct SuperResolver::Impl {
  TrainConfig cfg;
  nn::Generator<float> g1;
  nn::Generator<float> g2;

  static nn::GeneratorSpec edge_spec(const TrainConfig& cfg) {
    nn::GeneratorSpec s;
    s.in_channels = 2;
    s.out_channels = 1;
    s.base_width = cfg.base_width;
    return s;
  }
  static nn::GeneratorSpec sr_spec(const TrainConfig& cfg) {
    nn::GeneratorSpec s;
    s.in_channels = 4;
    s.out_channels = 3;
    s.base_width = cfg.base_width;
    return s;
  }

  explicit Impl(const Archive& a, std::mt19937 rng = std::mt19937(0))
      : cfg(parse_train_config(a.meta.at("config").get<std::string>())),
        g1(edge_spec(cfg), rng),
        g2(sr_spec(cfg), rng) {
    if (a.meta.value("stage", std::string()) != "sr")
      throw std::runtime_error(
          "SuperResolver: checkpoint does not contain a trained completion stage");
    nn::ParamRefs<float> g1_refs, g2_refs;
    g1.collect("g1", g1_refs);
    g2.collect("g2", g2_refs);
    load_network(a, "", g1_refs);
    load_network(a, "", g2_refs);
    g1.set_training(false);
    g2.set_training(false);
  }
};

SuperResolver::SuperResolver(const std::string& checkpoint_path)
    : impl_(std::make_unique<Impl>(load_archive(checkpoint_path))) {}

SuperResolver::SuperResolver(const Archive& checkpoint)
    : impl_(std::make_unique<Impl>(checkpoint)) {}

SuperResolver::~SuperResolver() = default;
SuperResolver::SuperResolver(SuperResolver&&) noexcept = default;
SuperResolver& SuperResolver::operator=(SuperResolver&&) noexcept = default;

int SuperResolver::scale() const { return impl_->cfg.scale; }
const TrainConfig& SuperResolver::config() const { return impl_->cfg; }

InferenceOutput SuperResolver::run(const ImageTensor& lr_rgb) {
  if (lr_rgb.channels != 3)
    throw std::invalid_argument("SuperResolver: expected a 3-channel input image");
  const int scale = impl_->cfg.scale;
  const int out_h = lr_rgb.height * scale;
  const int out_w = lr_rgb.width * scale;
  if (out_h < 16 || out_w < 16 || out_h % 4 != 0 || out_w % 4 != 0)
    throw std::invalid_argument("SuperResolver: output size " + std::to_string(out_w) + "x" +
                                std::to_string(out_h) +
                                " must be at least 16 and divisible by 4");

  const ImageTensor gray = to_grayscale(lr_rgb);
  const EdgeMap c_lr = canny(gray, impl_->cfg.canny_sigma);
  const ImageTensor gray_up = interpolate(gray, out_h, out_w, Interp::nearest);
  const EdgeMap c_lr_up = interpolate_edges(c_lr, out_h, out_w);

  nn::NoGradGuard no_grad;
  nn::NodePtr<float> x1 = nn::concat_channels(nn::image_to_node<float>(gray_up),
                                              nn::edges_to_node<float>(c_lr_up));
  nn::NodePtr<float> c_pred = impl_->g1.forward(x1);
  nn::NodePtr<float> x2 = nn::concat_channels(
      nn::image_to_node<float>(offset_upsample(lr_rgb, scale)), c_pred);
  nn::NodePtr<float> sr = impl_->g2.forward(x2);

  InferenceOutput out;
  out.sr = nn::node_to_image(sr);
  out.edges = nn::node_to_edges(c_pred, EdgeKind::soft);
  return out;
}

}  // namespace edgesr
