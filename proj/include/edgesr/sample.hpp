#pragma once

// Training sample preparation: a high-resolution crop plus every derived view
// the two stages consume, all produced by the imaging module so the sample is
// consistent by construction.

#include <random>

#include "edgesr/config.hpp"
#include "edgesr/image.hpp"

namespace edgesr {

struct SamplePair {
  ImageTensor hr;          // cropped ground truth, hr_size x hr_size
  ImageTensor lr;          // degraded input, hr_size / scale per side
  ImageTensor hr_gray;
  ImageTensor lr_gray;
  EdgeMap c_gt;            // Canny edges of hr_gray
  EdgeMap c_lr;            // Canny edges of lr_gray
  ImageTensor lr_gray_up;  // lr_gray nearest-upscaled to hr_size
  EdgeMap c_lr_up;         // c_lr nearest-upscaled to hr_size
};

// Center crop. Rejects images smaller than cfg.hr_size on either side.
SamplePair make_sample(const ImageTensor& hr, const TrainConfig& cfg);

// Random crop driven by rng when cfg.random_crop is set, center crop
// otherwise. Same image and rng state produce identical samples.
SamplePair make_sample(const ImageTensor& hr, const TrainConfig& cfg, std::mt19937& rng);

}  // namespace edgesr
