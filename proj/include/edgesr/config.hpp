#pragma once

// Run configuration for both training stages. Every knob loads from a flat
// key = value text file so a run is reproducible from one document, and the
// same text is embedded verbatim in checkpoints as the config snapshot.

#include <cstdint>
#include <string>

#include "edgesr/losses.hpp"

namespace edgesr {

struct TrainConfig {
  int scale = 2;
  int hr_size = 512;
  int batch_size = 8;
  double lr_initial = 1e-4;
  double lr_fine = 1e-5;
  double adam_beta1 = 0.0;
  double adam_beta2 = 0.9;
  double canny_sigma = 2.0;
  double degrade_sigma = 1.0;
  double d_to_g_lr_ratio = 0.1;
  int plateau_window = 1000;
  double plateau_min_improvement = 0.01;
  int plateau_patience = 5000;
  std::int64_t max_steps = 2000;
  std::uint64_t seed = 0;
  int base_width = 64;
  std::int64_t checkpoint_interval = 500;
  std::string checkpoint_dir = "checkpoints";
  bool random_crop = true;
  LossWeights weights;

  void validate() const;

  // Serializes every field as key = value lines; parse_train_config inverts
  // this exactly, including float round-trips.
  std::string to_key_values() const;
};

TrainConfig parse_train_config(const std::string& text);
TrainConfig load_train_config(const std::string& path);

// The EDGESR_CHECKPOINT_DIR environment variable, when set, wins over the
// configured checkpoint directory.
std::string resolved_checkpoint_dir(const TrainConfig& cfg);

}  // namespace edgesr
