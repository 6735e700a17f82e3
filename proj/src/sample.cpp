#include "edgesr/sample.hpp"

#include <stdexcept>
#include <string>

#include "edgesr/imaging.hpp"

namespace edgesr {

namespace {

ImageTensor crop(const ImageTensor& img, int top, int left, int size) {
  ImageTensor out(size, size, img.channels);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(top + y, left + x, c);
  return out;
}

SamplePair build(const ImageTensor& hr, const TrainConfig& cfg, int top, int left) {
  cfg.validate();
  SamplePair s;
  s.hr = crop(hr, top, left, cfg.hr_size);
  s.lr = degrade(s.hr, cfg.scale, cfg.degrade_sigma);
  s.hr_gray = to_grayscale(s.hr);
  s.lr_gray = to_grayscale(s.lr);
  s.c_gt = canny(s.hr_gray, cfg.canny_sigma);
  s.c_lr = canny(s.lr_gray, cfg.canny_sigma);
  s.lr_gray_up = interpolate(s.lr_gray, cfg.hr_size, cfg.hr_size, Interp::nearest);
  s.c_lr_up = interpolate_edges(s.c_lr, cfg.hr_size, cfg.hr_size);
  return s;
}

void check_size(const ImageTensor& hr, const TrainConfig& cfg) {
  if (hr.height < cfg.hr_size || hr.width < cfg.hr_size)
    throw std::invalid_argument("make_sample: image " + std::to_string(hr.width) + "x" +
                                std::to_string(hr.height) + " is smaller than hr_size " +
                                std::to_string(cfg.hr_size));
}

}  // namespace

SamplePair make_sample(const ImageTensor& hr, const TrainConfig& cfg) {
  check_size(hr, cfg);
  return build(hr, cfg, (hr.height - cfg.hr_size) / 2, (hr.width - cfg.hr_size) / 2);
}

SamplePair make_sample(const ImageTensor& hr, const TrainConfig& cfg, std::mt19937& rng) {
  check_size(hr, cfg);
  if (!cfg.random_crop) return make_sample(hr, cfg);
  std::uniform_int_distribution<int> top_dist(0, hr.height - cfg.hr_size);
  std::uniform_int_distribution<int> left_dist(0, hr.width - cfg.hr_size);
  const int top = top_dist(rng);
  const int left = left_dist(rng);
  return build(hr, cfg, top, left);
}

}  // namespace edgesr
