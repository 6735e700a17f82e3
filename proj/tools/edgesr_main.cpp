// Command line front end: prepares low resolution datasets, trains both
// stages, super-resolves single images, and scores prediction directories
// with the published benchmark numbers printed alongside.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "edgesr/evaluate.hpp"
#include "edgesr/infer.hpp"
#include "edgesr/png_io.hpp"
#include "edgesr/reference_table.hpp"
#include "edgesr/trainer.hpp"

namespace fs = std::filesystem;
using namespace edgesr;

namespace {

std::vector<fs::path> list_pngs(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

int cmd_degrade(const std::string& input_dir, const std::string& output_dir, int scale,
                double sigma) {
  const std::vector<fs::path> files = list_pngs(input_dir);
  fs::create_directories(output_dir);
  nlohmann::json pairs = nlohmann::json::array();
  int written = 0;
  for (const fs::path& path : files) {
    try {
      ImageTensor hr = read_png(path.string());
      // Indivisible sizes are cropped here, deliberately, so the library's
      // strict degrade contract stays intact.
      const int th = hr.height / scale * scale;
      const int tw = hr.width / scale * scale;
      if (th == 0 || tw == 0) throw std::runtime_error("image smaller than the scale factor");
      if (th != hr.height || tw != hr.width) hr = center_crop(hr, th, tw);
      const std::string name = path.stem().string() + ".png";
      write_png((fs::path(output_dir) / name).string(), degrade(hr, scale, sigma));
      pairs.push_back({{"lr", name}, {"hr", fs::absolute(path).string()}});
      ++written;
    } catch (const std::exception& e) {
      std::cerr << "degrade: skipping " << path.string() << ": " << e.what() << "\n";
    }
  }
  if (written == 0) {
    std::cerr << "degrade: no usable images in " << input_dir << "\n";
    return 1;
  }
  const nlohmann::json manifest = {
      {"scale", scale}, {"sigma_blur", sigma}, {"pairs", pairs}};
  std::ofstream out(fs::path(output_dir) / "manifest.json");
  out << manifest.dump(2) << "\n";
  if (!out) {
    std::cerr << "degrade: failed to write manifest\n";
    return 1;
  }
  std::cout << "degrade: wrote " << written << " images and manifest.json to " << output_dir
            << "\n";
  return 0;
}

int cmd_infer(const std::string& input, const std::string& checkpoint, const std::string& prefix,
              std::optional<int> scale, bool baselines) {
  SuperResolver resolver(checkpoint);
  if (scale && *scale != resolver.scale()) {
    std::cerr << "infer: checkpoint was trained for scale " << resolver.scale()
              << " but --scale " << *scale << " was requested\n";
    return 1;
  }
  const ImageTensor lr = read_png(input);
  const InferenceOutput out = resolver.run(lr);
  const fs::path parent = fs::path(prefix).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  write_png(prefix + "_sr.png", out.sr);
  write_png(prefix + "_edges.png", out.edges);
  if (baselines) {
    write_png(prefix + "_nearest.png",
              interpolate(lr, out.sr.height, out.sr.width, Interp::nearest));
    write_png(prefix + "_bicubic.png",
              interpolate(lr, out.sr.height, out.sr.width, Interp::bicubic));
  }
  std::cout << "infer: wrote " << prefix << "_sr.png and " << prefix << "_edges.png ("
            << out.sr.width << "x" << out.sr.height << ")\n";
  return 0;
}

// Published rows matching the report's dataset and scale, for side-by-side
// reading under the measured aggregate.
std::string reference_section(const MetricsReport& rep) {
  std::ostringstream os;
  os << std::fixed;
  const std::string dataset = lower(rep.dataset_name);
  bool any = false;
  for (const ReferenceRecord& r : reference_table()) {
    if (lower(r.dataset) != dataset || r.scale != rep.scale_factor) continue;
    if (std::isnan(r.psnr_db)) continue;
    if (!any) os << "published references, " << r.dataset << " x" << rep.scale_factor << ":\n";
    any = true;
    os << "  " << std::left << std::setw(10) << r.method << std::setprecision(2) << " psnr "
       << r.psnr_db << std::setprecision(3) << "  ssim " << r.ssim << "\n";
  }
  if (!any)
    os << "no published reference rows for " << rep.dataset_name << " x" << rep.scale_factor
       << "\n";
  if (rep.has_edge_columns()) {
    for (const EdgeReferenceRecord& r : edge_reference_table()) {
      if (lower(r.dataset) != dataset || r.scale != rep.scale_factor) continue;
      os << "published edge reference, " << r.dataset << " x" << r.scale << " (percent): "
         << std::setprecision(2) << "precision " << r.precision_pct << "  recall "
         << r.recall_pct << "\n";
    }
  }
  os << reference_provenance() << "\n";
  return os.str();
}

int cmd_evaluate(const std::string& pred_dir, const std::string& method,
                 const std::string& gt_dir, int scale, std::string dataset, double canny_sigma,
                 double blur_sigma, const std::string& csv_path, const std::string& report_path) {
  if (pred_dir.empty() == method.empty()) {
    std::cerr << "evaluate: give exactly one of --pred or --method\n";
    return 1;
  }
  if (dataset.empty()) {
    fs::path d(gt_dir);
    if (d.filename().empty()) d = d.parent_path();
    dataset = d.filename().string();
  }

  std::vector<std::string> warnings;
  MetricsReport rep;
  if (!method.empty()) {
    rep = evaluate_baseline(gt_dir, dataset, scale, interp_from_string(method), blur_sigma,
                            warnings);
  } else {
    const PairingResult pairing = pair_directories(pred_dir, gt_dir);
    for (const std::string& u : pairing.unpaired) warnings.push_back("unpaired: " + u);
    rep = evaluate_pairs(pairing.pairs, dataset, scale, "model", canny_sigma, warnings);
  }
  for (const std::string& w : warnings) std::cerr << "evaluate: " << w << "\n";
  if (rep.per_image.empty()) {
    std::cerr << "evaluate: no image pairs scored\n";
    return 1;
  }

  const std::string text = rep.to_text() + "\n" + reference_section(rep);
  std::cout << text;
  for (const auto& [path, content] :
       {std::pair{csv_path, rep.to_csv()}, std::pair{report_path, text}}) {
    if (path.empty()) continue;
    std::ofstream out(path);
    out << content;
    if (!out) {
      std::cerr << "evaluate: failed to write " << path << "\n";
      return 1;
    }
  }
  return 0;
}

int cmd_train(const std::string& stage, const std::string& data_dir,
              const std::string& config_path, const std::string& g1_checkpoint,
              const std::string& extractor_path, const std::string& resume,
              std::optional<int> scale, std::optional<std::uint64_t> seed,
              const std::string& log_path) {
  TrainConfig cfg = config_path.empty() ? TrainConfig{} : load_train_config(config_path);
  if (scale) cfg.scale = *scale;
  if (seed) cfg.seed = *seed;
  cfg.validate();

  std::vector<ImageTensor> dataset;
  for (const fs::path& path : list_pngs(data_dir)) {
    try {
      ImageTensor img = read_png(path.string());
      if (img.height < cfg.hr_size || img.width < cfg.hr_size)
        throw std::runtime_error("smaller than the training crop");
      dataset.push_back(std::move(img));
    } catch (const std::exception& e) {
      std::cerr << "train: excluding " << path.string() << ": " << e.what() << "\n";
    }
  }

  TrainResult result;
  if (stage == "edge") {
    result = train_edge_stage(cfg, dataset, log_path, resume);
  } else {
    if (g1_checkpoint.empty()) {
      std::cerr << "train: --g1 <edge stage checkpoint> is required for the sr stage\n";
      return 1;
    }
    std::unique_ptr<nn::FeatureExtractor<float>> extractor;
    if (!extractor_path.empty()) {
      const Archive weights = load_archive(extractor_path);
      std::map<std::string, std::vector<float>> by_name;
      for (const auto& [name, blob] : weights.tensors()) by_name[name] = blob.f32;
      extractor = std::make_unique<nn::FeatureExtractor<float>>(by_name);
    }
    result = train_sr_stage(cfg, dataset, g1_checkpoint, extractor.get(), log_path, resume);
  }
  std::cout << "train: " << stage << " stage finished after " << result.steps << " steps";
  if (!result.generator_objective.empty())
    std::cout << ", final generator objective " << result.generator_objective.back();
  std::cout << "\ntrain: checkpoint at " << result.checkpoint_path << "\n";
  return 0;
}

int guarded(const char* name, const std::function<int()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge informed single image super resolution"};
  app.require_subcommand(1);
  int rc = 0;

  std::string in_dir, out_dir;
  int scale = 2;
  double sigma_blur = 1.0;
  auto* deg = app.add_subcommand("degrade", "Blur and subsample HR images into LR inputs");
  deg->add_option("--input", in_dir, "Directory of HR PNGs")
      ->required()
      ->check(CLI::ExistingDirectory);
  deg->add_option("--output", out_dir, "Directory for LR PNGs and manifest.json")->required();
  deg->add_option("--scale", scale, "Downscale factor")
      ->required()
      ->check(CLI::IsMember({2, 4, 8}));
  deg->add_option("--sigma-blur", sigma_blur, "Gaussian blur before subsampling")
      ->capture_default_str();
  deg->callback(
      [&] { rc = guarded("degrade", [&] { return cmd_degrade(in_dir, out_dir, scale, sigma_blur); }); });

  std::string lr_path, checkpoint, prefix;
  std::optional<int> infer_scale;
  bool baselines = false;
  auto* inf = app.add_subcommand("infer", "Super resolve one LR image with a trained checkpoint");
  inf->add_option("--input", lr_path, "LR PNG")->required()->check(CLI::ExistingFile);
  inf->add_option("--checkpoint", checkpoint, "Trained sr stage checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  inf->add_option("--out-prefix", prefix, "Outputs <prefix>_sr.png and <prefix>_edges.png")
      ->required();
  inf->add_option("--scale", infer_scale, "Expected upscale factor, verified against the checkpoint")
      ->check(CLI::IsMember({2, 4, 8}));
  inf->add_flag("--baselines", baselines, "Also write nearest and bicubic upscales");
  inf->callback([&] {
    rc = guarded("infer",
                 [&] { return cmd_infer(lr_path, checkpoint, prefix, infer_scale, baselines); });
  });

  std::string pred_dir, method, gt_dir, dataset, csv_path, report_path;
  double sigma_canny = 2.0;
  auto* ev = app.add_subcommand("evaluate", "Score predictions or a classical baseline against HR");
  auto* pred_opt =
      ev->add_option("--pred", pred_dir, "Directory of predicted PNGs (stems matched against --gt)")
          ->check(CLI::ExistingDirectory);
  ev->add_option("--method", method, "Classical baseline computed on the fly")
      ->check(CLI::IsMember({"bicubic", "nearest"}))
      ->excludes(pred_opt);
  ev->add_option("--gt", gt_dir, "Directory of ground truth PNGs")
      ->required()
      ->check(CLI::ExistingDirectory);
  ev->add_option("--scale", scale, "Upscale factor under evaluation")
      ->required()
      ->check(CLI::IsMember({2, 4, 8}));
  ev->add_option("--dataset", dataset, "Dataset label for the report (default: --gt directory name)");
  ev->add_option("--sigma-canny", sigma_canny, "Canny sigma for ground truth edge maps")
      ->capture_default_str();
  ev->add_option("--sigma-blur", sigma_blur, "Degradation blur for --method baselines")
      ->capture_default_str();
  ev->add_option("--csv", csv_path, "Write the CSV report here");
  ev->add_option("--report", report_path, "Write the text report here");
  ev->callback([&] {
    rc = guarded("evaluate", [&] {
      return cmd_evaluate(pred_dir, method, gt_dir, scale, dataset, sigma_canny, sigma_blur,
                          csv_path, report_path);
    });
  });

  std::string stage, data_dir, config_path, g1_checkpoint, extractor_path, resume, log_path;
  std::optional<int> train_scale;
  std::optional<std::uint64_t> seed;
  auto* tr = app.add_subcommand("train", "Train the edge stage or the completion stage");
  tr->add_option("--stage", stage, "Which stage to train")
      ->required()
      ->check(CLI::IsMember({"edge", "sr"}));
  tr->add_option("--data", data_dir, "Directory of HR training PNGs")
      ->required()
      ->check(CLI::ExistingDirectory);
  tr->add_option("--config", config_path, "Key = value training configuration")
      ->check(CLI::ExistingFile);
  tr->add_option("--g1", g1_checkpoint, "Edge stage checkpoint (sr stage only)")
      ->check(CLI::ExistingFile);
  tr->add_option("--extractor", extractor_path,
                 "Feature extractor weights archive for perceptual and style terms")
      ->check(CLI::ExistingFile);
  tr->add_option("--checkpoint", resume, "Resume from this checkpoint")->check(CLI::ExistingFile);
  tr->add_option("--scale", train_scale, "Override the configured scale")
      ->check(CLI::IsMember({2, 4, 8}));
  tr->add_option("--seed", seed, "Override the configured seed");
  tr->add_option("--log", log_path, "Training log path (default: next to the checkpoint)");
  tr->callback([&] {
    rc = guarded("train", [&] {
      return cmd_train(stage, data_dir, config_path, g1_checkpoint, extractor_path, resume,
                       train_scale, seed, log_path);
    });
  });

  CLI11_PARSE(app, argc, argv);
  return rc;
}
