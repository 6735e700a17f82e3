#pragma once

#include <optional>
#include <string>
#include <vector>

#include "edgesr/image.hpp"

namespace edgesr {

// 10*log10(1/MSE) over all channels, peak 1.0. Returns +infinity when the
// images match exactly.
double psnr(const ImageTensor& a, const ImageTensor& b);

// Mean local SSIM, Gaussian window size 11 / sigma 1.5, C1=(0.01)^2,
// C2=(0.03)^2 for unit dynamic range, valid windows only. Color images use
// the mean of per-channel SSIM. Images smaller than the window are rejected.
double ssim(const ImageTensor& a, const ImageTensor& b);

// Exact per-pixel precision/recall between binary maps.
// Degenerate counts: |pred|=0 -> precision 0 if |gt|>0 else 1; |gt|=0 -> recall 1.
struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};
PrecisionRecall edge_precision_recall(const EdgeMap& pred, const EdgeMap& gt);

struct MetricsRow {
  std::string image_id;
  double psnr_db = 0.0;
  double ssim = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
};

// Per-image rows plus arithmetic-mean aggregates for one evaluation run.
struct MetricsReport {
  std::string dataset_name;
  int scale_factor = 0;
  std::string method_name;
  std::vector<MetricsRow> per_image;

  MetricsRow aggregate() const;
  bool has_edge_columns() const;
  std::string to_csv() const;
  std::string to_text() const;
};

std::string format_psnr(double v);  // "infinite" sentinel for exact matches

}  // namespace edgesr
