#pragma once

#include <string>

#include "edgesr/image.hpp"

namespace edgesr {

// 8-bit PNG in/out, intensities mapped linearly between [0,255] and [0,1].
// Palette/alpha/16-bit inputs are converted; grayscale stays 1-channel.
ImageTensor read_png(const std::string& path);
void write_png(const std::string& path, const ImageTensor& img);
void write_png(const std::string& path, const EdgeMap& map);

// Reads a PNG as an edge map: nonzero luminance thresholded at 0.5.
EdgeMap read_png_edges(const std::string& path);

}  // namespace edgesr
