#pragma once

// Published benchmark results embedded for side-by-side comparison in
// evaluation reports: PSNR/SSIM for bicubic, ENet, EDSR, the no-edge baseline
// and the full two-stage model on the standard test sets, plus edge-map
// precision/recall for the edge enhancer. A full-scale training run is needed
// to approach the model rows; the classical rows are directly checkable.

#include <string>
#include <vector>

namespace edgesr {

struct ReferenceRecord {
  const char* method;   // "bicubic", "enet", "edsr", "baseline", "ours"
  const char* dataset;  // "Set5", "Set14", "BSD100", "Celeb-HQ"
  int scale;
  double psnr_db;  // NaN where the source table reports no value
  double ssim;
};

struct EdgeReferenceRecord {
  const char* dataset;  // "Celeb-HQ", "Places2"
  int scale;
  double precision_pct;
  double recall_pct;
};

const std::vector<ReferenceRecord>& reference_table();
const std::vector<EdgeReferenceRecord>& edge_reference_table();

// Case-insensitive on method and dataset; nullptr when no row matches or the
// matching cell is unreported.
const ReferenceRecord* find_reference(const std::string& method, const std::string& dataset,
                                      int scale);

std::string reference_provenance();

}  // namespace edgesr
