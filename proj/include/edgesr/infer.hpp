#pragma once

// Inference pipeline: low-resolution color image in, predicted edge map and
// high-resolution image out, with both generators loaded frozen from a
// completed stage-two checkpoint.

#include <memory>
#include <string>

#include "edgesr/checkpoint.hpp"
#include "edgesr/config.hpp"
#include "edgesr/image.hpp"

namespace edgesr {

struct InferenceOutput {
  ImageTensor sr;  // predicted high-resolution image, values in [0, 1]
  EdgeMap edges;   // predicted soft edge map at the output resolution
};

class SuperResolver {
 public:
  explicit SuperResolver(const std::string& checkpoint_path);
  explicit SuperResolver(const Archive& checkpoint);
  ~SuperResolver();
  SuperResolver(SuperResolver&&) noexcept;
  SuperResolver& operator=(SuperResolver&&) noexcept;

  int scale() const;
  const TrainConfig& config() const;

  // Upscales one image by the checkpoint's scale factor. The output
  // dimensions (input times scale) must be at least 16 and divisible by 4.
  InferenceOutput run(const ImageTensor& lr_rgb);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace edgesr
