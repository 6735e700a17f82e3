#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace edgesr {

// H x W x C image with interleaved channels, intensities in [0,1].
struct ImageTensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  ImageTensor() = default;
  ImageTensor(int h, int w, int c, float fill = 0.0f) : height(h), width(w), channels(c) {
    if (h < 1 || w < 1 || (c != 1 && c != 3))
      throw std::invalid_argument("ImageTensor: bad shape " + std::to_string(h) + "x" +
                                  std::to_string(w) + "x" + std::to_string(c));
    data.assign(static_cast<size_t>(h) * w * c, fill);
  }

  float& at(int y, int x, int c) { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }
  float at(int y, int x, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  size_t size() const { return data.size(); }
  bool same_shape(const ImageTensor& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

enum class EdgeKind { binary, soft };

// H x W edge map. Binary maps hold only 0/1, soft maps anything in [0,1].
struct EdgeMap {
  int height = 0;
  int width = 0;
  EdgeKind kind = EdgeKind::binary;
  std::vector<float> data;

  EdgeMap() = default;
  EdgeMap(int h, int w, EdgeKind k, float fill = 0.0f) : height(h), width(w), kind(k) {
    if (h < 1 || w < 1) throw std::invalid_argument("EdgeMap: bad shape");
    data.assign(static_cast<size_t>(h) * w, fill);
  }

  float& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  float at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
  size_t size() const { return data.size(); }
};

// s x s kernel with a single 1 at the origin; placing each LR pixel at
// stride-s positions of the HR grid.
struct OffsetKernel {
  int scale = 0;
  std::vector<float> weights;  // s*s, row-major

  float at(int y, int x) const { return weights[static_cast<size_t>(y) * scale + x]; }
};

// Validation helpers used by tests and at module boundaries.
bool image_in_range(const ImageTensor& img);
bool edge_map_is_binary(const EdgeMap& m);

// Symmetric crop to th x tw; rejects targets larger than the image.
ImageTensor center_crop(const ImageTensor& img, int th, int tw);

}  // namespace edgesr
