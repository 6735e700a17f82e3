#include "edgesr/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace edgesr {

double psnr(const ImageTensor& a, const ImageTensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("psnr: shape mismatch");
  double se = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

namespace {

constexpr int ssim_win = 11;
constexpr double ssim_sigma = 1.5;
constexpr double ssim_c1 = 0.01 * 0.01;
constexpr double ssim_c2 = 0.03 * 0.03;

std::vector<double> ssim_window() {
  std::vector<double> w(ssim_win);
  const int r = ssim_win / 2;
  double sum = 0.0;
  for (int i = 0; i < ssim_win; ++i) {
    const double d = i - r;
    w[i] = std::exp(-d * d / (2.0 * ssim_sigma * ssim_sigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Separable weighted filtering, valid region only.
std::vector<double> filter_valid(const std::vector<double>& img, int h, int w,
                                 const std::vector<double>& k) {
  const int r = static_cast<int>(k.size()) / 2;
  const int vh = h - 2 * r, vw = w - 2 * r;
  std::vector<double> tmp(static_cast<size_t>(h) * vw);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < vw; ++x) {
      double acc = 0.0;
      for (int t = 0; t < static_cast<int>(k.size()); ++t)
        acc += k[t] * img[static_cast<size_t>(y) * w + x + t];
      tmp[static_cast<size_t>(y) * vw + x] = acc;
    }
  std::vector<double> out(static_cast<size_t>(vh) * vw);
  for (int y = 0; y < vh; ++y)
    for (int x = 0; x < vw; ++x) {
      double acc = 0.0;
      for (int t = 0; t < static_cast<int>(k.size()); ++t)
        acc += k[t] * tmp[static_cast<size_t>(y + t) * vw + x];
      out[static_cast<size_t>(y) * vw + x] = acc;
    }
  return out;
}

double ssim_channel(const std::vector<double>& x, const std::vector<double>& y, int h, int w) {
  const std::vector<double> k = ssim_window();
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const std::vector<double> mx = filter_valid(x, h, w, k);
  const std::vector<double> my = filter_valid(y, h, w, k);
  const std::vector<double> mxx = filter_valid(xx, h, w, k);
  const std::vector<double> myy = filter_valid(yy, h, w, k);
  const std::vector<double> mxy = filter_valid(xy, h, w, k);
  double acc = 0.0;
  for (size_t i = 0; i < mx.size(); ++i) {
    const double vx = mxx[i] - mx[i] * mx[i];
    const double vy = myy[i] - my[i] * my[i];
    const double cov = mxy[i] - mx[i] * my[i];
    const double num = (2.0 * mx[i] * my[i] + ssim_c1) * (2.0 * cov + ssim_c2);
    const double den = (mx[i] * mx[i] + my[i] * my[i] + ssim_c1) * (vx + vy + ssim_c2);
    acc += num / den;
  }
  return acc / static_cast<double>(mx.size());
}

}  // namespace

double ssim(const ImageTensor& a, const ImageTensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("ssim: shape mismatch");
  if (a.height < ssim_win || a.width < ssim_win)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");
  const size_t n = static_cast<size_t>(a.height) * a.width;
  double total = 0.0;
  std::vector<double> x(n), y(n);
  for (int ch = 0; ch < a.channels; ++ch) {
    for (size_t i = 0; i < n; ++i) {
      x[i] = a.data[i * a.channels + ch];
      y[i] = b.data[i * a.channels + ch];
    }
    total += ssim_channel(x, y, a.height, a.width);
  }
  return total / a.channels;
}

PrecisionRecall edge_precision_recall(const EdgeMap& pred, const EdgeMap& gt) {
  if (pred.height != gt.height || pred.width != gt.width)
    throw std::invalid_argument("edge_precision_recall: shape mismatch");
  if (pred.kind != EdgeKind::binary || gt.kind != EdgeKind::binary)
    throw std::invalid_argument("edge_precision_recall: maps must be binary");
  size_t n_pred = 0, n_gt = 0, n_both = 0;
  for (size_t i = 0; i < pred.data.size(); ++i) {
    const bool p = pred.data[i] != 0.0f;
    const bool g = gt.data[i] != 0.0f;
    n_pred += p;
    n_gt += g;
    n_both += p && g;
  }
  PrecisionRecall pr;
  pr.precision = n_pred > 0 ? static_cast<double>(n_both) / n_pred : (n_gt == 0 ? 1.0 : 0.0);
  pr.recall = n_gt > 0 ? static_cast<double>(n_both) / n_gt : 1.0;
  return pr;
}

std::string format_psnr(double v) {
  if (std::isinf(v)) return "infinite";
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << v;
  return os.str();
}

namespace {

std::string format_fixed(double v, int prec = 6) {
  if (std::isinf(v)) return "infinite";
  std::ostringstream os;
  os.precision(prec);
  os << std::fixed << v;
  return os.str();
}

}  // namespace

MetricsRow MetricsReport::aggregate() const {
  MetricsRow agg;
  agg.image_id = "mean";
  if (per_image.empty()) return agg;
  double sp = 0.0, ss = 0.0, spr = 0.0, sre = 0.0;
  bool edges = has_edge_columns();
  for (const MetricsRow& r : per_image) {
    sp += r.psnr_db;
    ss += r.ssim;
    if (edges) {
      spr += r.precision.value();
      sre += r.recall.value();
    }
  }
  const double n = static_cast<double>(per_image.size());
  agg.psnr_db = sp / n;
  agg.ssim = ss / n;
  if (edges) {
    agg.precision = spr / n;
    agg.recall = sre / n;
  }
  return agg;
}

bool MetricsReport::has_edge_columns() const {
  if (per_image.empty()) return false;
  for (const MetricsRow& r : per_image)
    if (!r.precision || !r.recall) return false;
  return true;
}

std::string MetricsReport::to_csv() const {
  const bool edges = has_edge_columns();
  std::ostringstream os;
  os << "image_id,psnr_db,ssim";
  if (edges) os << ",precision,recall";
  os << "\n";
  auto emit = [&](const MetricsRow& r) {
    os << r.image_id << "," << format_fixed(r.psnr_db) << "," << format_fixed(r.ssim);
    if (edges) os << "," << format_fixed(r.precision.value()) << ","
                  << format_fixed(r.recall.value());
    os << "\n";
  };
  for (const MetricsRow& r : per_image) emit(r);
  emit(aggregate());
  return os.str();
}

std::string MetricsReport::to_text() const {
  const bool edges = has_edge_columns();
  std::ostringstream os;
  os << "dataset: " << dataset_name << "  scale: x" << scale_factor
     << "  method: " << method_name << "\n";
  os << "image_id                     psnr_db      ssim";
  if (edges) os << "  precision     recall";
  os << "\n";
  auto emit = [&](const MetricsRow& r) {
    os << r.image_id;
    for (size_t i = r.image_id.size(); i < 24; ++i) os << ' ';
    std::string p = format_fixed(r.psnr_db, 4);
    for (size_t i = p.size(); i < 12; ++i) os << ' ';
    os << p;
    std::string s = format_fixed(r.ssim, 4);
    for (size_t i = s.size(); i < 10; ++i) os << ' ';
    os << s;
    if (edges) {
      std::string pr = format_fixed(r.precision.value(), 4);
      for (size_t i = pr.size(); i < 11; ++i) os << ' ';
      os << pr;
      std::string re = format_fixed(r.recall.value(), 4);
      for (size_t i = re.size(); i < 11; ++i) os << ' ';
      os << re;
    }
    os << "\n";
  };
  for (const MetricsRow& r : per_image) emit(r);
  os << "----\n";
  emit(aggregate());
  return os.str();
}

}  // namespace edgesr
