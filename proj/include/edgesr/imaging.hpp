#pragma once

#include <string>

#include "edgesr/image.hpp"

namespace edgesr {

enum class Interp { nearest, bilinear, bicubic };

// Throws std::invalid_argument for anything but "nearest"/"bilinear"/"bicubic".
Interp interp_from_string(const std::string& name);
std::string to_string(Interp method);

// BT.601 luminance: 0.299 R + 0.587 G + 0.114 B. Rejects non-3-channel input.
ImageTensor to_grayscale(const ImageTensor& img);

// Separable Gaussian, radius ceil(3*sigma), kernel renormalized, symmetric
// (border-repeating) reflection at the boundary. sigma must be > 0.
ImageTensor gaussian_blur(const ImageTensor& img, double sigma);

// Gaussian blur followed by subsampling at indices == 0 (mod scale).
// sigma == 0 skips the blur. Dimensions must divide evenly by scale.
ImageTensor degrade(const ImageTensor& hr, int scale, double sigma);

// Canny on a single-channel image: Gaussian smoothing controlled by sigma,
// Sobel gradients, non-maximum suppression, hysteresis at 0.1/0.2 of the
// maximum gradient magnitude. Returns a binary map with 1-pixel-wide edges.
EdgeMap canny(const ImageTensor& gray, double sigma);

// Resampling with half-pixel-center coordinates; bicubic is Catmull-Rom
// (a = -0.5) with the output clamped to [0,1].
ImageTensor interpolate(const ImageTensor& img, int target_h, int target_w, Interp method);

// Nearest-neighbor resize of an edge map (keeps binary maps binary).
EdgeMap interpolate_edges(const EdgeMap& m, int target_h, int target_w);

// s x s kernel with weights[0][0] = 1, zero elsewhere. scale must be 2, 4 or 8.
OffsetKernel offset_kernel(int scale);

// Zero-insertion upsampling: out[s*i][s*j] = lr[i][j], all other pixels 0.
ImageTensor offset_upsample(const ImageTensor& lr, int scale);

}  // namespace edgesr
