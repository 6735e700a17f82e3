#include "edgesr/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "edgesr/imaging.hpp"
#include "edgesr/losses.hpp"
#include "edgesr/nn/networks.hpp"
#include "edgesr/sample.hpp"

namespace edgesr {

PlateauDetector::PlateauDetector(int window, double min_improvement, int patience)
    : window_(window), min_improvement_(min_improvement), patience_(patience) {
  if (window < 1 || patience < 1 || min_improvement < 0.0)
    throw std::invalid_argument("PlateauDetector: bad settings");
}

bool PlateauDetector::update(double value) {
  recent_.push_back(value);
  running_sum_ += value;
  if (static_cast<int>(recent_.size()) > window_) {
    running_sum_ -= recent_.front();
    recent_.pop_front();
  }
  // Improvement is measured against the magnitude of the best average so the
  // rule keeps working once adversarial terms push the objective negative.
  const double avg = moving_average();
  if (!has_best_ || avg < best_average_ - min_improvement_ * std::fabs(best_average_)) {
    best_average_ = avg;
    has_best_ = true;
    steps_since_improvement_ = 0;
  } else {
    ++steps_since_improvement_;
  }
  if (!fired_ && steps_since_improvement_ >= patience_) {
    fired_ = true;
    return true;
  }
  return false;
}

double PlateauDetector::moving_average() const {
  if (recent_.empty()) throw std::logic_error("PlateauDetector: no observations yet");
  return running_sum_ / static_cast<double>(recent_.size());
}

void PlateauDetector::store(Archive& a, const std::string& prefix) const {
  if (!recent_.empty()) {
    std::vector<double> window(recent_.begin(), recent_.end());
    const int count = static_cast<int>(window.size());
    a.put_f64(prefix + ".window", {count}, std::move(window));
  }
  a.meta[prefix] = {{"best_average", best_average_},
                    {"has_best", has_best_},
                    {"steps_since_improvement", steps_since_improvement_},
                    {"fired", fired_},
                    {"running_sum", running_sum_}};
}

void PlateauDetector::load(const Archive& a, const std::string& prefix) {
  recent_.clear();
  if (a.contains(prefix + ".window")) {
    const std::vector<double>& window = a.at(prefix + ".window").f64;
    recent_.assign(window.begin(), window.end());
  }
  const nlohmann::json& j = a.meta.at(prefix);
  best_average_ = j.at("best_average").get<double>();
  has_best_ = j.at("has_best").get<bool>();
  steps_since_improvement_ = j.at("steps_since_improvement").get<int>();
  fired_ = j.at("fired").get<bool>();
  running_sum_ = j.at("running_sum").get<double>();
}

namespace {

using nn::NodePtr;

std::string timestamp_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string rng_to_string(const std::mt19937& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

void rng_from_string(std::mt19937& rng, const std::string& text) {
  std::istringstream in(text);
  in >> rng;
  if (!in) throw std::runtime_error("train: corrupt rng state in checkpoint");
}

std::uint64_t params_hash(const nn::ParamRefs<float>& refs) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& [name, node] : refs.params) {
    const unsigned char* bytes = reinterpret_cast<const unsigned char*>(node->v.data());
    for (size_t i = 0; i < node->v.size() * sizeof(float); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  }
  return h;
}

void check_dataset(const std::vector<ImageTensor>& dataset, const TrainConfig& cfg) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  for (size_t i = 0; i < dataset.size(); ++i)
    if (dataset[i].height < cfg.hr_size || dataset[i].width < cfg.hr_size)
      throw std::invalid_argument("train: dataset image " + std::to_string(i) +
                                  " is smaller than hr_size");
}

class TrainLog {
 public:
  explicit TrainLog(const std::string& path) : out_(path, std::ios::app) {
    if (!out_) throw std::runtime_error("train: cannot open log file " + path);
  }
  void line(const std::string& text) {
    out_ << text << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(6);
  out << x;
  return out.str();
}

[[noreturn]] void abort_non_finite(const std::string& stage, std::int64_t step, double j_d,
                                   double j_g, const std::string& dir,
                                   const std::function<void(Archive&)>& dump_state) {
  Archive dump;
  dump_state(dump);
  dump.meta["abort"] = {{"stage", stage}, {"step", step}, {"j_d", j_d}, {"j_g", j_g}};
  const std::string path = dir + "/" + stage + "_abort_dump.ckpt";
  save_archive(path, dump);
  throw std::runtime_error("train: non-finite loss at step " + std::to_string(step) +
                           "; state dumped to " + path);
}

NodePtr<float> zero_scalar() { return nn::constant<float>({1}, {0.0f}); }

}  // namespace

TrainResult train_edge_stage(const TrainConfig& cfg, const std::vector<ImageTensor>& dataset,
                             const std::string& log_path, const std::string& resume_from) {
  cfg.validate();
  check_dataset(dataset, cfg);
  const std::string dir = resolved_checkpoint_dir(cfg);
  std::filesystem::create_directories(dir);

  std::mt19937 rng(static_cast<std::mt19937::result_type>(cfg.seed));
  nn::GeneratorSpec gspec;
  gspec.in_channels = 2;
  gspec.out_channels = 1;
  gspec.base_width = cfg.base_width;
  nn::DiscriminatorSpec dspec;
  dspec.in_channels = 2;
  dspec.base_width = cfg.base_width;
  nn::Generator<float> g1(gspec, rng);
  nn::Discriminator<float> d1(dspec, rng);

  nn::ParamRefs<float> g_refs, d_refs;
  g1.collect("g1", g_refs);
  d1.collect("d1", d_refs);
  nn::Adam<float> g_opt(g_refs.params, cfg.lr_initial, cfg.adam_beta1, cfg.adam_beta2);
  nn::Adam<float> d_opt(d_refs.params, cfg.lr_initial * cfg.d_to_g_lr_ratio, cfg.adam_beta1,
                        cfg.adam_beta2);
  PlateauDetector plateau(cfg.plateau_window, cfg.plateau_min_improvement, cfg.plateau_patience);

  std::int64_t start_step = 0;
  if (!resume_from.empty()) {
    Archive a = load_archive(resume_from);
    if (a.meta.at("stage").get<std::string>() != "edge")
      throw std::runtime_error("train: " + resume_from + " is not an edge-stage checkpoint");
    load_network(a, "", g_refs);
    load_network(a, "", d_refs);
    load_adam(a, "optim.g1.", g_opt);
    load_adam(a, "optim.d1.", d_opt);
    plateau.load(a, "plateau");
    rng_from_string(rng, a.meta.at("rng").get<std::string>());
    start_step = a.meta.at("step").get<std::int64_t>();
  }

  const std::string ckpt_path = dir + "/edge_stage.ckpt";
  auto save_state = [&](std::int64_t step, Archive& a) {
    store_network(a, "", g_refs);
    store_network(a, "", d_refs);
    store_adam(a, "optim.g1.", g_opt);
    store_adam(a, "optim.d1.", d_opt);
    plateau.store(a, "plateau");
    a.meta["stage"] = "edge";
    a.meta["step"] = step;
    a.meta["rng"] = rng_to_string(rng);
    a.meta["config"] = cfg.to_key_values();
  };

  TrainLog log(log_path.empty() ? dir + "/edge_stage_log.txt" : log_path);
  TrainResult result;
  result.checkpoint_path = ckpt_path;
  result.steps = start_step;

  std::uniform_int_distribution<size_t> pick(0, dataset.size() - 1);
  g1.set_training(true);
  d1.set_training(true);
  const float inv_b = 1.0f / static_cast<float>(cfg.batch_size);

  for (std::int64_t step = start_step + 1; step <= cfg.max_steps; ++step) {
    std::vector<SamplePair> batch;
    batch.reserve(cfg.batch_size);
    for (int b = 0; b < cfg.batch_size; ++b)
      batch.push_back(make_sample(dataset[pick(rng)], cfg, rng));

    // One generator forward per sample; the graphs survive the discriminator
    // update behind a detach barrier and then drive the generator update, so
    // the alternation stays one D step then one G step per iteration.
    std::vector<NodePtr<float>> preds, conds, targets;
    for (const SamplePair& s : batch) {
      NodePtr<float> x = nn::concat_channels(nn::image_to_node<float>(s.lr_gray_up),
                                             nn::edges_to_node<float>(s.c_lr_up));
      preds.push_back(g1.forward(x));
      conds.push_back(nn::image_to_node<float>(s.hr_gray));
      targets.push_back(nn::edges_to_node<float>(s.c_gt));
    }

    double j_d = 0.0;
    d_opt.zero_grad();
    for (int b = 0; b < cfg.batch_size; ++b) {
      nn::DiscriminatorOut<float> real = d1.forward(nn::concat_channels(targets[b], conds[b]));
      nn::DiscriminatorOut<float> fake =
          d1.forward(nn::concat_channels(nn::detach(preds[b]), conds[b]));
      NodePtr<float> loss = nn::scale(losses::hinge_d(real.score, fake.score), inv_b);
      j_d += loss->v[0];
      nn::backward(loss);
    }
    d_opt.step();

    double j_g = 0.0, adv_mean = 0.0, fm_mean = 0.0;
    g_opt.zero_grad();
    for (int b = 0; b < cfg.batch_size; ++b) {
      nn::DiscriminatorOut<float> fake = d1.forward(nn::concat_channels(preds[b], conds[b]));
      NodePtr<float> adv = losses::hinge_g(fake.score);
      NodePtr<float> fm = zero_scalar();
      if (cfg.weights.lambda_fm != 0.0) {
        // Feature targets come from an inference-mode pass so computing
        // constants does not advance the spectral power iterations.
        d1.set_training(false);
        std::vector<NodePtr<float>> real_features;
        {
          nn::NoGradGuard no_grad;
          real_features = d1.forward(nn::concat_channels(targets[b], conds[b])).features;
        }
        d1.set_training(true);
        fm = losses::feature_matching(real_features, fake.features);
      }
      NodePtr<float> joint = nn::scale(losses::joint_g1(adv, fm, cfg.weights), inv_b);
      j_g += joint->v[0];
      adv_mean += adv->v[0] * inv_b;
      fm_mean += fm->v[0] * inv_b;
      nn::backward(joint);
    }
    g_opt.step();
    preds.clear();
    conds.clear();
    targets.clear();

    if (!std::isfinite(j_d) || !std::isfinite(j_g))
      abort_non_finite("edge", step, j_d, j_g, dir,
                       [&](Archive& a) { save_state(step, a); });

    result.generator_objective.push_back(j_g);
    if (plateau.update(j_g)) {
      g_opt.set_lr(cfg.lr_fine);
      d_opt.set_lr(cfg.lr_fine * cfg.d_to_g_lr_ratio);
    }

    log.line("step=" + std::to_string(step) + " j_d=" + fmt(j_d) + " j_g=" + fmt(j_g) +
             " adv=" + fmt(adv_mean) + " fm=" + fmt(fm_mean) + " lr_g=" + fmt(g_opt.lr()) +
             " lr_d=" + fmt(d_opt.lr()) + " time=" + timestamp_utc());

    if (step % cfg.checkpoint_interval == 0 || step == cfg.max_steps) {
      Archive a;
      save_state(step, a);
      save_archive(ckpt_path, a);
    }
    result.steps = step;
  }
  return result;
}

TrainResult train_sr_stage(const TrainConfig& cfg, const std::vector<ImageTensor>& dataset,
                           const std::string& g1_checkpoint,
                           const nn::FeatureExtractor<float>* extractor,
                           const std::string& log_path, const std::string& resume_from) {
  cfg.validate();
  check_dataset(dataset, cfg);
  const bool wants_features = cfg.weights.lambda_p != 0.0 || cfg.weights.lambda_s != 0.0;
  if (wants_features && extractor == nullptr)
    throw std::invalid_argument(
        "train: perceptual/style weights are nonzero but no extractor weights were given");
  const std::string dir = resolved_checkpoint_dir(cfg);
  std::filesystem::create_directories(dir);

  std::mt19937 rng(static_cast<std::mt19937::result_type>(cfg.seed));
  nn::GeneratorSpec g1spec;
  g1spec.in_channels = 2;
  g1spec.out_channels = 1;
  g1spec.base_width = cfg.base_width;
  nn::GeneratorSpec g2spec;
  g2spec.in_channels = 4;
  g2spec.out_channels = 3;
  g2spec.base_width = cfg.base_width;
  nn::DiscriminatorSpec d2spec;
  d2spec.in_channels = 4;
  d2spec.base_width = cfg.base_width;
  nn::Generator<float> g1(g1spec, rng);
  nn::Generator<float> g2(g2spec, rng);
  nn::Discriminator<float> d2(d2spec, rng);

  nn::ParamRefs<float> g1_refs, g2_refs, d2_refs;
  g1.collect("g1", g1_refs);
  g2.collect("g2", g2_refs);
  d2.collect("d2", d2_refs);

  {
    Archive a = load_archive(g1_checkpoint);
    load_network(a, "", g1_refs);
  }
  g1.set_training(false);
  const std::uint64_t g1_hash = params_hash(g1_refs);

  nn::Adam<float> g_opt(g2_refs.params, cfg.lr_initial, cfg.adam_beta1, cfg.adam_beta2);
  nn::Adam<float> d_opt(d2_refs.params, cfg.lr_initial * cfg.d_to_g_lr_ratio, cfg.adam_beta1,
                        cfg.adam_beta2);
  PlateauDetector plateau(cfg.plateau_window, cfg.plateau_min_improvement, cfg.plateau_patience);

  std::int64_t start_step = 0;
  if (!resume_from.empty()) {
    Archive a = load_archive(resume_from);
    if (a.meta.at("stage").get<std::string>() != "sr")
      throw std::runtime_error("train: " + resume_from + " is not an sr-stage checkpoint");
    load_network(a, "", g1_refs);
    load_network(a, "", g2_refs);
    load_network(a, "", d2_refs);
    load_adam(a, "optim.g2.", g_opt);
    load_adam(a, "optim.d2.", d_opt);
    plateau.load(a, "plateau");
    rng_from_string(rng, a.meta.at("rng").get<std::string>());
    start_step = a.meta.at("step").get<std::int64_t>();
  }

  const std::string ckpt_path = dir + "/sr_stage.ckpt";
  auto save_state = [&](std::int64_t step, Archive& a) {
    store_network(a, "", g1_refs);
    store_network(a, "", g2_refs);
    store_network(a, "", d2_refs);
    store_adam(a, "optim.g2.", g_opt);
    store_adam(a, "optim.d2.", d_opt);
    plateau.store(a, "plateau");
    a.meta["stage"] = "sr";
    a.meta["step"] = step;
    a.meta["rng"] = rng_to_string(rng);
    a.meta["config"] = cfg.to_key_values();
  };

  TrainLog log(log_path.empty() ? dir + "/sr_stage_log.txt" : log_path);
  TrainResult result;
  result.checkpoint_path = ckpt_path;
  result.steps = start_step;

  std::uniform_int_distribution<size_t> pick(0, dataset.size() - 1);
  g2.set_training(true);
  d2.set_training(true);
  const float inv_b = 1.0f / static_cast<float>(cfg.batch_size);

  for (std::int64_t step = start_step + 1; step <= cfg.max_steps; ++step) {
    std::vector<SamplePair> batch;
    batch.reserve(cfg.batch_size);
    for (int b = 0; b < cfg.batch_size; ++b)
      batch.push_back(make_sample(dataset[pick(rng)], cfg, rng));

    std::vector<NodePtr<float>> preds, conds, gts;
    for (const SamplePair& s : batch) {
      // Frozen edge prediction: inference mode, no graph, no gradients.
      NodePtr<float> c_pred;
      {
        nn::NoGradGuard no_grad;
        NodePtr<float> x1 = nn::concat_channels(nn::image_to_node<float>(s.lr_gray_up),
                                                nn::edges_to_node<float>(s.c_lr_up));
        c_pred = g1.forward(x1);
      }
      NodePtr<float> x2 = nn::concat_channels(
          nn::image_to_node<float>(offset_upsample(s.lr, cfg.scale)), c_pred);
      preds.push_back(g2.forward(x2));
      conds.push_back(c_pred);
      gts.push_back(nn::image_to_node<float>(s.hr));
    }

    double j_d = 0.0;
    d_opt.zero_grad();
    for (int b = 0; b < cfg.batch_size; ++b) {
      nn::DiscriminatorOut<float> real = d2.forward(nn::concat_channels(gts[b], conds[b]));
      nn::DiscriminatorOut<float> fake =
          d2.forward(nn::concat_channels(nn::detach(preds[b]), conds[b]));
      NodePtr<float> loss = nn::scale(losses::hinge_d(real.score, fake.score), inv_b);
      j_d += loss->v[0];
      nn::backward(loss);
    }
    d_opt.step();

    double j_g = 0.0, l1_mean = 0.0, adv_mean = 0.0, perc_mean = 0.0, style_mean = 0.0;
    g_opt.zero_grad();
    for (int b = 0; b < cfg.batch_size; ++b) {
      nn::DiscriminatorOut<float> fake = d2.forward(nn::concat_channels(preds[b], conds[b]));
      NodePtr<float> l1_term = losses::l1(preds[b], gts[b]);
      NodePtr<float> adv = losses::hinge_g(fake.score);
      NodePtr<float> perc = zero_scalar();
      NodePtr<float> style_term = zero_scalar();
      if (extractor != nullptr && cfg.weights.lambda_p != 0.0)
        perc = losses::perceptual(gts[b], preds[b], *extractor);
      if (extractor != nullptr && cfg.weights.lambda_s != 0.0)
        style_term = losses::style(gts[b], preds[b], *extractor);
      NodePtr<float> joint =
          nn::scale(losses::joint_g2(l1_term, adv, perc, style_term, cfg.weights), inv_b);
      j_g += joint->v[0];
      l1_mean += l1_term->v[0] * inv_b;
      adv_mean += adv->v[0] * inv_b;
      perc_mean += perc->v[0] * inv_b;
      style_mean += style_term->v[0] * inv_b;
      nn::backward(joint);
    }
    g_opt.step();
    preds.clear();
    conds.clear();
    gts.clear();

    if (!std::isfinite(j_d) || !std::isfinite(j_g))
      abort_non_finite("sr", step, j_d, j_g, dir, [&](Archive& a) { save_state(step, a); });

    result.generator_objective.push_back(j_g);
    if (plateau.update(j_g)) {
      g_opt.set_lr(cfg.lr_fine);
      d_opt.set_lr(cfg.lr_fine * cfg.d_to_g_lr_ratio);
    }

    log.line("step=" + std::to_string(step) + " j_d=" + fmt(j_d) + " j_g=" + fmt(j_g) +
             " l1=" + fmt(l1_mean) + " adv=" + fmt(adv_mean) + " perc=" + fmt(perc_mean) +
             " style=" + fmt(style_mean) + " lr_g=" + fmt(g_opt.lr()) +
             " lr_d=" + fmt(d_opt.lr()) + " time=" + timestamp_utc());

    if (step % cfg.checkpoint_interval == 0 || step == cfg.max_steps) {
      Archive a;
      save_state(step, a);
      save_archive(ckpt_path, a);
    }
    result.steps = step;
  }

  if (params_hash(g1_refs) != g1_hash)
    throw std::logic_error("train: frozen edge generator weights changed during stage two");
  return result;
}

}  // namespace edgesr
