#include "edgesr/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

namespace edgesr {

namespace {

constexpr double luma_r = 0.299;
constexpr double luma_g = 0.587;
constexpr double luma_b = 0.114;

float clamp01(double v) {
  return static_cast<float>(std::min(1.0, std::max(0.0, v)));
}

// Symmetric reflection that repeats the border sample (d c b a | a b c d).
int reflect_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    k[i + radius] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

}  // namespace

Interp interp_from_string(const std::string& name) {
  if (name == "nearest") return Interp::nearest;
  if (name == "bilinear") return Interp::bilinear;
  if (name == "bicubic") return Interp::bicubic;
  throw std::invalid_argument("unknown interpolation method: " + name);
}

std::string to_string(Interp method) {
  switch (method) {
    case Interp::nearest: return "nearest";
    case Interp::bilinear: return "bilinear";
    case Interp::bicubic: return "bicubic";
  }
  return "?";
}

ImageTensor to_grayscale(const ImageTensor& img) {
  if (img.channels != 3)
    throw std::invalid_argument("to_grayscale expects a 3-channel image");
  ImageTensor out(img.height, img.width, 1);
  const size_t n = static_cast<size_t>(img.height) * img.width;
  for (size_t i = 0; i < n; ++i) {
    const double y = luma_r * img.data[3 * i] + luma_g * img.data[3 * i + 1] +
                     luma_b * img.data[3 * i + 2];
    out.data[i] = clamp01(y);
  }
  return out;
}

ImageTensor gaussian_blur(const ImageTensor& img, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_blur: sigma must be > 0");
  const std::vector<double> k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  const int h = img.height, w = img.width, c = img.channels;

  // Horizontal pass in double, then vertical.
  std::vector<double> tmp(img.data.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t) {
          const int xs = reflect_index(x + t, w);
          acc += k[t + radius] * img.at(y, xs, ch);
        }
        tmp[(static_cast<size_t>(y) * w + x) * c + ch] = acc;
      }
    }
  }
  ImageTensor out(h, w, c);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t) {
          const int ys = reflect_index(y + t, h);
          acc += k[t + radius] * tmp[(static_cast<size_t>(ys) * w + x) * c + ch];
        }
        out.at(y, x, ch) = clamp01(acc);
      }
    }
  }
  return out;
}

ImageTensor degrade(const ImageTensor& hr, int scale, double sigma) {
  if (scale < 1) throw std::invalid_argument("degrade: scale must be >= 1");
  if (hr.height % scale != 0 || hr.width % scale != 0)
    throw std::invalid_argument("degrade: dimensions " + std::to_string(hr.height) + "x" +
                                std::to_string(hr.width) + " not divisible by scale " +
                                std::to_string(scale));
  if (sigma < 0.0) throw std::invalid_argument("degrade: sigma must be >= 0");
  ImageTensor blurred;
  const ImageTensor& src = (sigma == 0.0) ? hr : (blurred = gaussian_blur(hr, sigma));
  ImageTensor out(hr.height / scale, hr.width / scale, hr.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int ch = 0; ch < out.channels; ++ch)
        out.at(y, x, ch) = src.at(y * scale, x * scale, ch);
  return out;
}

EdgeMap canny(const ImageTensor& gray, double sigma) {
  if (gray.channels != 1) throw std::invalid_argument("canny expects a single-channel image");
  if (!(sigma > 0.0)) throw std::invalid_argument("canny: sigma must be > 0");
  const ImageTensor smooth = gaussian_blur(gray, sigma);
  const int h = gray.height, w = gray.width;

  // Sobel gradients with reflected borders.
  std::vector<double> gx(static_cast<size_t>(h) * w), gy(gx.size()), mag(gx.size());
  double max_mag = 0.0;
  auto px = [&](int y, int x) -> double {
    return smooth.at(reflect_index(y, h), reflect_index(x, w), 0);
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = (px(y - 1, x + 1) + 2.0 * px(y, x + 1) + px(y + 1, x + 1)) -
                        (px(y - 1, x - 1) + 2.0 * px(y, x - 1) + px(y + 1, x - 1));
      const double dy = (px(y + 1, x - 1) + 2.0 * px(y + 1, x) + px(y + 1, x + 1)) -
                        (px(y - 1, x - 1) + 2.0 * px(y - 1, x) + px(y - 1, x + 1));
      const size_t i = static_cast<size_t>(y) * w + x;
      gx[i] = dx;
      gy[i] = dy;
      mag[i] = std::hypot(dx, dy);
      max_mag = std::max(max_mag, mag[i]);
    }
  }

  EdgeMap out(h, w, EdgeKind::binary);
  if (max_mag == 0.0) return out;
  const double low = 0.10 * max_mag;
  const double high = 0.20 * max_mag;

  // Non-maximum suppression. The two comparison neighbors follow the
  // quantized gradient direction; the tie on the first neighbor is strict so
  // a perfectly symmetric step keeps a single pixel.
  constexpr double tan225 = 0.41421356237309503;
  std::vector<uint8_t> cls(mag.size(), 0);  // 0 none, 1 weak, 2 strong
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      if (mag[i] < low) continue;
      const double ax = std::fabs(gx[i]), ay = std::fabs(gy[i]);
      int d1y, d1x, d2y, d2x;
      if (ay <= ax * tan225) {        // horizontal gradient, vertical edge
        d1y = 0; d1x = -1; d2y = 0; d2x = 1;
      } else if (ax <= ay * tan225) { // vertical gradient
        d1y = -1; d1x = 0; d2y = 1; d2x = 0;
      } else if (gx[i] * gy[i] > 0) { // 45 degrees
        d1y = -1; d1x = -1; d2y = 1; d2x = 1;
      } else {
        d1y = -1; d1x = 1; d2y = 1; d2x = -1;
      }
      auto m_at = [&](int yy, int xx) -> double {
        if (yy < 0 || yy >= h || xx < 0 || xx >= w) return 0.0;
        return mag[static_cast<size_t>(yy) * w + xx];
      };
      if (mag[i] > m_at(y + d1y, x + d1x) && mag[i] >= m_at(y + d2y, x + d2x))
        cls[i] = (mag[i] >= high) ? 2 : 1;
    }
  }

  // Hysteresis: weak pixels survive only when 8-connected to a strong one.
  std::deque<std::pair<int, int>> frontier;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (cls[static_cast<size_t>(y) * w + x] == 2) {
        out.at(y, x) = 1.0f;
        frontier.emplace_back(y, x);
      }
  while (!frontier.empty()) {
    auto [y, x] = frontier.front();
    frontier.pop_front();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int yy = y + dy, xx = x + dx;
        if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
        const size_t j = static_cast<size_t>(yy) * w + xx;
        if (cls[j] == 1 && out.at(yy, xx) == 0.0f) {
          out.at(yy, xx) = 1.0f;
          frontier.emplace_back(yy, xx);
        }
      }
    }
  }
  return out;
}

namespace {

double cubic_weight(double t) {
  // Catmull-Rom, a = -0.5.
  constexpr double a = -0.5;
  t = std::fabs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

}  // namespace

ImageTensor interpolate(const ImageTensor& img, int target_h, int target_w, Interp method) {
  if (target_h < 1 || target_w < 1)
    throw std::invalid_argument("interpolate: target dimensions must be >= 1");
  const int h = img.height, w = img.width, c = img.channels;
  ImageTensor out(target_h, target_w, c);

  if (method == Interp::nearest) {
    for (int y = 0; y < target_h; ++y) {
      const int ys = static_cast<int>((static_cast<int64_t>(y) * h) / target_h);
      for (int x = 0; x < target_w; ++x) {
        const int xs = static_cast<int>((static_cast<int64_t>(x) * w) / target_w);
        for (int ch = 0; ch < c; ++ch) out.at(y, x, ch) = img.at(ys, xs, ch);
      }
    }
    return out;
  }

  const double ry = static_cast<double>(h) / target_h;
  const double rx = static_cast<double>(w) / target_w;
  auto clampi = [](int i, int n) { return std::min(n - 1, std::max(0, i)); };

  if (method == Interp::bilinear) {
    for (int y = 0; y < target_h; ++y) {
      const double fy = (y + 0.5) * ry - 0.5;
      const int y0 = static_cast<int>(std::floor(fy));
      const double wy = fy - y0;
      const int ya = clampi(y0, h), yb = clampi(y0 + 1, h);
      for (int x = 0; x < target_w; ++x) {
        const double fx = (x + 0.5) * rx - 0.5;
        const int x0 = static_cast<int>(std::floor(fx));
        const double wx = fx - x0;
        const int xa = clampi(x0, w), xb = clampi(x0 + 1, w);
        for (int ch = 0; ch < c; ++ch) {
          const double top = (1.0 - wx) * img.at(ya, xa, ch) + wx * img.at(ya, xb, ch);
          const double bot = (1.0 - wx) * img.at(yb, xa, ch) + wx * img.at(yb, xb, ch);
          out.at(y, x, ch) = clamp01((1.0 - wy) * top + wy * bot);
        }
      }
    }
    return out;
  }

  // bicubic
  for (int y = 0; y < target_h; ++y) {
    const double fy = (y + 0.5) * ry - 0.5;
    const int y0 = static_cast<int>(std::floor(fy));
    double wy[4];
    for (int t = 0; t < 4; ++t) wy[t] = cubic_weight(fy - (y0 - 1 + t));
    for (int x = 0; x < target_w; ++x) {
      const double fx = (x + 0.5) * rx - 0.5;
      const int x0 = static_cast<int>(std::floor(fx));
      double wx[4];
      for (int t = 0; t < 4; ++t) wx[t] = cubic_weight(fx - (x0 - 1 + t));
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int ty = 0; ty < 4; ++ty) {
          const int ys = clampi(y0 - 1 + ty, h);
          double row = 0.0;
          for (int tx = 0; tx < 4; ++tx) {
            const int xs = clampi(x0 - 1 + tx, w);
            row += wx[tx] * img.at(ys, xs, ch);
          }
          acc += wy[ty] * row;
        }
        out.at(y, x, ch) = clamp01(acc);
      }
    }
  }
  return out;
}

EdgeMap interpolate_edges(const EdgeMap& m, int target_h, int target_w) {
  if (target_h < 1 || target_w < 1)
    throw std::invalid_argument("interpolate_edges: target dimensions must be >= 1");
  EdgeMap out(target_h, target_w, m.kind);
  for (int y = 0; y < target_h; ++y) {
    const int ys = static_cast<int>((static_cast<int64_t>(y) * m.height) / target_h);
    for (int x = 0; x < target_w; ++x) {
      const int xs = static_cast<int>((static_cast<int64_t>(x) * m.width) / target_w);
      out.at(y, x) = m.at(ys, xs);
    }
  }
  return out;
}

OffsetKernel offset_kernel(int scale) {
  if (scale != 2 && scale != 4 && scale != 8)
    throw std::invalid_argument("offset_kernel: scale must be 2, 4 or 8");
  OffsetKernel k;
  k.scale = scale;
  k.weights.assign(static_cast<size_t>(scale) * scale, 0.0f);
  k.weights[0] = 1.0f;
  return k;
}

ImageTensor offset_upsample(const ImageTensor& lr, int scale) {
  const OffsetKernel k = offset_kernel(scale);  // validates scale
  ImageTensor out(lr.height * scale, lr.width * scale, lr.channels);
  for (int y = 0; y < lr.height; ++y)
    for (int x = 0; x < lr.width; ++x)
      for (int ch = 0; ch < lr.channels; ++ch)
        out.at(y * k.scale, x * k.scale, ch) = lr.at(y, x, ch);
  return out;
}

}  // namespace edgesr
