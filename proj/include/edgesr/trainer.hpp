#pragma once

// Two-stage training orchestration. Stage one fits the edge generator and its
// discriminator on upscaled edge maps; stage two freezes the edge generator
// and fits the completion generator on offset-upsampled color inputs. Both
// stages checkpoint on an interval, log per-step loss components, and resume
// bit-identically from their own checkpoints.

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "edgesr/checkpoint.hpp"
#include "edgesr/config.hpp"
#include "edgesr/image.hpp"
#include "edgesr/nn/extractor.hpp"

namespace edgesr {

// Moving-average plateau watch on the generator objective. The learning rate
// drop fires once: when the windowed average has not beaten the best seen by
// the configured fraction for `patience` consecutive steps.
class PlateauDetector {
 public:
  PlateauDetector(int window, double min_improvement, int patience);

  // Feeds one objective value; returns true on the single step the plateau
  // fires.
  bool update(double value);
  bool fired() const { return fired_; }
  double moving_average() const;

  void store(Archive& a, const std::string& prefix) const;
  void load(const Archive& a, const std::string& prefix);

 private:
  int window_;
  double min_improvement_;
  int patience_;
  std::deque<double> recent_;
  double running_sum_ = 0.0;
  double best_average_ = 0.0;
  bool has_best_ = false;
  int steps_since_improvement_ = 0;
  bool fired_ = false;
};

struct TrainResult {
  std::string checkpoint_path;
  std::int64_t steps = 0;
  // Per-step generator objective, in order; resumed runs only append the new
  // steps.
  std::vector<double> generator_objective;
};

// Stage one. Writes <checkpoint dir>/edge_stage.ckpt and appends to
// <checkpoint dir>/edge_stage_log.txt (or log_path when given). Pass
// resume_from to continue an interrupted run.
TrainResult train_edge_stage(const TrainConfig& cfg, const std::vector<ImageTensor>& dataset,
                             const std::string& log_path = "",
                             const std::string& resume_from = "");

// Stage two. Loads the frozen edge generator from g1_checkpoint and verifies
// its weights are untouched after training. The extractor may be null only
// when both perceptual and style weights are zero.
TrainResult train_sr_stage(const TrainConfig& cfg, const std::vector<ImageTensor>& dataset,
                           const std::string& g1_checkpoint,
                           const nn::FeatureExtractor<float>* extractor,
                           const std::string& log_path = "",
                           const std::string& resume_from = "");

}  // namespace edgesr
