#pragma once

// Directory-level evaluation: pairs files across prediction and ground-truth
// directories by filename stem, scores the metric suite per image, and can
// synthesize classical interpolation baselines on the fly without writing
// intermediate files.

#include <string>
#include <vector>

#include "edgesr/imaging.hpp"
#include "edgesr/metrics.hpp"

namespace edgesr {

struct EvalPair {
  std::string id;  // shared filename stem
  std::string pred_path;
  std::string gt_path;
};

struct PairingResult {
  std::vector<EvalPair> pairs;        // sorted by id
  std::vector<std::string> unpaired;  // stems found on one side only
};

// Pairs *.png files by stem. Files named "<stem>_edges.png" are edge-map
// companions of "<stem>.png" predictions, not predictions of their own.
PairingResult pair_directories(const std::string& pred_dir, const std::string& gt_dir);

// Scores each prediction against its ground truth; oversized ground truths
// are center-cropped to the prediction size. When every prediction has an
// "<stem>_edges.png" companion, the report gains precision/recall columns
// against Canny edges of the ground truth. Per-file problems are appended to
// `warnings` and the file is skipped.
MetricsReport evaluate_pairs(const std::vector<EvalPair>& pairs, const std::string& dataset,
                             int scale, const std::string& method, double canny_sigma,
                             std::vector<std::string>& warnings);

// Degrade-then-upscale baseline over every PNG in a ground-truth directory.
// Each image is center-cropped to a multiple of the scale first, matching the
// protocol used to make low-resolution evaluation inputs.
MetricsReport evaluate_baseline(const std::string& gt_dir, const std::string& dataset, int scale,
                                Interp method, double degrade_sigma,
                                std::vector<std::string>& warnings);

}  // namespace edgesr
