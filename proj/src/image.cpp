#include "edgesr/image.hpp"

#include <cmath>
#include <stdexcept>

namespace edgesr {

bool image_in_range(const ImageTensor& img) {
  for (float v : img.data) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) return false;
  }
  return true;
}

bool edge_map_is_binary(const EdgeMap& m) {
  for (float v : m.data) {
    if (v != 0.0f && v != 1.0f) return false;
  }
  return true;
}

ImageTensor center_crop(const ImageTensor& img, int th, int tw) {
  if (th > img.height || tw > img.width)
    throw std::invalid_argument("center_crop: target exceeds image size");
  const int top = (img.height - th) / 2;
  const int left = (img.width - tw) / 2;
  ImageTensor out(th, tw, img.channels);
  for (int y = 0; y < th; ++y)
    for (int x = 0; x < tw; ++x)
      for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(top + y, left + x, c);
  return out;
}

}  // namespace edgesr
