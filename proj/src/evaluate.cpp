#include "edgesr/evaluate.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <stdexcept>

#include "edgesr/png_io.hpp"

namespace edgesr {

namespace {

namespace fs = std::filesystem;

bool is_png(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png";
}

bool is_edge_companion(const std::string& stem) {
  const std::string suffix = "_edges";
  return stem.size() > suffix.size() &&
         stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::map<std::string, std::string> list_pngs(const std::string& dir, bool skip_edge_maps) {
  if (!fs::is_directory(dir)) throw std::runtime_error("evaluate: " + dir + " is not a directory");
  std::map<std::string, std::string> out;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || !is_png(entry.path())) continue;
    const std::string stem = entry.path().stem().string();
    if (skip_edge_maps && is_edge_companion(stem)) continue;
    out[stem] = entry.path().string();
  }
  return out;
}

ImageTensor as_rgb(const ImageTensor& img) {
  if (img.channels == 3) return img;
  ImageTensor out(img.height, img.width, 3);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y, x, 0);
  return out;
}

}  // namespace

PairingResult pair_directories(const std::string& pred_dir, const std::string& gt_dir) {
  const std::map<std::string, std::string> preds = list_pngs(pred_dir, true);
  const std::map<std::string, std::string> gts = list_pngs(gt_dir, false);
  PairingResult result;
  for (const auto& [stem, pred_path] : preds) {
    auto it = gts.find(stem);
    if (it == gts.end())
      result.unpaired.push_back(stem + " (prediction only)");
    else
      result.pairs.push_back({stem, pred_path, it->second});
  }
  for (const auto& [stem, gt_path] : gts)
    if (preds.find(stem) == preds.end()) result.unpaired.push_back(stem + " (ground truth only)");
  return result;
}

MetricsReport evaluate_pairs(const std::vector<EvalPair>& pairs, const std::string& dataset,
                             int scale, const std::string& method, double canny_sigma,
                             std::vector<std::string>& warnings) {
  MetricsReport report;
  report.dataset_name = dataset;
  report.scale_factor = scale;
  report.method_name = method;
  for (const EvalPair& pair : pairs) {
    try {
      const ImageTensor pred = as_rgb(read_png(pair.pred_path));
      ImageTensor gt = as_rgb(read_png(pair.gt_path));
      if (gt.height < pred.height || gt.width < pred.width)
        throw std::runtime_error("ground truth is smaller than the prediction");
      if (gt.height != pred.height || gt.width != pred.width)
        gt = center_crop(gt, pred.height, pred.width);

      MetricsRow row;
      row.image_id = pair.id;
      row.psnr_db = psnr(pred, gt);
      row.ssim = ssim(pred, gt);

      const fs::path edge_path =
          fs::path(pair.pred_path).parent_path() / (pair.id + "_edges.png");
      if (fs::exists(edge_path)) {
        const EdgeMap pred_edges = read_png_edges(edge_path.string());
        if (pred_edges.height != gt.height || pred_edges.width != gt.width)
          throw std::runtime_error("edge map size does not match the prediction");
        const EdgeMap gt_edges = canny(to_grayscale(gt), canny_sigma);
        const PrecisionRecall pr = edge_precision_recall(pred_edges, gt_edges);
        row.precision = pr.precision;
        row.recall = pr.recall;
      }
      report.per_image.push_back(std::move(row));
    } catch (const std::exception& e) {
      warnings.push_back(pair.id + ": " + e.what());
    }
  }
  return report;
}

MetricsReport evaluate_baseline(const std::string& gt_dir, const std::string& dataset, int scale,
                                Interp method, double degrade_sigma,
                                std::vector<std::string>& warnings) {
  MetricsReport report;
  report.dataset_name = dataset;
  report.scale_factor = scale;
  report.method_name = to_string(method);
  for (const auto& [stem, path] : list_pngs(gt_dir, false)) {
    try {
      const ImageTensor gt = read_png(path);
      const int th = gt.height / scale * scale;
      const int tw = gt.width / scale * scale;
      if (th < 11 || tw < 11) throw std::runtime_error("image too small to evaluate");
      const ImageTensor crop = center_crop(gt, th, tw);
      const ImageTensor lr = degrade(crop, scale, degrade_sigma);
      const ImageTensor up = interpolate(lr, th, tw, method);

      MetricsRow row;
      row.image_id = stem;
      row.psnr_db = psnr(up, crop);
      row.ssim = ssim(up, crop);
      report.per_image.push_back(std::move(row));
    } catch (const std::exception& e) {
      warnings.push_back(stem + ": " + e.what());
    }
  }
  return report;
}

}  // namespace edgesr
