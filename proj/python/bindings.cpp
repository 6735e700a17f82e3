// Python bindings for the core operations: degradation, offset upsampling,
// interpolation, edge detection, the quality metrics, single-image inference
// and the published reference scores. Images cross the boundary as float32
// numpy arrays, (H, W, C) with interleaved channels; edge maps as (H, W).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "edgesr/image.hpp"
#include "edgesr/imaging.hpp"
#include "edgesr/infer.hpp"
#include "edgesr/metrics.hpp"
#include "edgesr/png_io.hpp"
#include "edgesr/reference_table.hpp"

namespace py = pybind11;
using namespace edgesr;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

ImageTensor to_image(const FloatArray& arr) {
  if (arr.ndim() != 2 && arr.ndim() != 3)
    throw std::invalid_argument("expected an (H, W) or (H, W, C) array");
  const int h = static_cast<int>(arr.shape(0));
  const int w = static_cast<int>(arr.shape(1));
  const int c = arr.ndim() == 3 ? static_cast<int>(arr.shape(2)) : 1;
  ImageTensor img(h, w, c);
  std::memcpy(img.data.data(), arr.data(), img.data.size() * sizeof(float));
  return img;
}

py::array_t<float> from_image(const ImageTensor& img) {
  py::array_t<float> arr({img.height, img.width, img.channels});
  std::memcpy(arr.mutable_data(), img.data.data(), img.data.size() * sizeof(float));
  return arr;
}

EdgeMap to_edges(const FloatArray& arr) {
  if (arr.ndim() != 2) throw std::invalid_argument("expected an (H, W) edge array");
  EdgeMap m(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)), EdgeKind::binary);
  std::memcpy(m.data.data(), arr.data(), m.data.size() * sizeof(float));
  if (!edge_map_is_binary(m)) m.kind = EdgeKind::soft;
  return m;
}

py::array_t<float> from_edges(const EdgeMap& m) {
  py::array_t<float> arr({m.height, m.width});
  std::memcpy(arr.mutable_data(), m.data.data(), m.data.size() * sizeof(float));
  return arr;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Edge informed single image super resolution";

  m.def("grayscale", [](const FloatArray& img) { return from_image(to_grayscale(to_image(img))); },
        py::arg("image"), "ITU-R 601 luma of an RGB image; grayscale passes through.");

  m.def("degrade",
        [](const FloatArray& img, int scale, double sigma) {
          return from_image(degrade(to_image(img), scale, sigma));
        },
        py::arg("image"), py::arg("scale"), py::arg("sigma") = 1.0,
        "Gaussian blur followed by stride-`scale` point sampling. sigma=0 disables the blur.");

  m.def("canny",
        [](const FloatArray& gray, double sigma) {
          return from_edges(canny(to_image(gray), sigma));
        },
        py::arg("gray"), py::arg("sigma") = 2.0,
        "Binary Canny edges of a single-channel image.");

  m.def("interpolate",
        [](const FloatArray& img, int height, int width, const std::string& method) {
          return from_image(interpolate(to_image(img), height, width, interp_from_string(method)));
        },
        py::arg("image"), py::arg("height"), py::arg("width"), py::arg("method") = "bicubic",
        "Resample to height x width with 'nearest', 'bilinear' or 'bicubic'.");

  m.def("interpolate_edges",
        [](const FloatArray& edges, int height, int width) {
          return from_edges(interpolate_edges(to_edges(edges), height, width));
        },
        py::arg("edges"), py::arg("height"), py::arg("width"),
        "Nearest-neighbor resampling of a binary edge map.");

  m.def("offset_kernel",
        [](int scale) {
          OffsetKernel k = offset_kernel(scale);
          py::array_t<float> arr({scale, scale});
          std::memcpy(arr.mutable_data(), k.weights.data(), k.weights.size() * sizeof(float));
          return arr;
        },
        py::arg("scale"), "The s x s placement kernel: a single 1 at the origin.");

  m.def("offset_upsample",
        [](const FloatArray& img, int scale) {
          return from_image(offset_upsample(to_image(img), scale));
        },
        py::arg("image"), py::arg("scale"),
        "Zero-filled upsampling that keeps each LR pixel at its stride-s grid position.");

  m.def("center_crop",
        [](const FloatArray& img, int height, int width) {
          return from_image(center_crop(to_image(img), height, width));
        },
        py::arg("image"), py::arg("height"), py::arg("width"));

  m.def("psnr", [](const FloatArray& a, const FloatArray& b) { return psnr(to_image(a), to_image(b)); },
        py::arg("a"), py::arg("b"), "Peak signal-to-noise ratio in dB; inf for identical inputs.");

  m.def("ssim", [](const FloatArray& a, const FloatArray& b) { return ssim(to_image(a), to_image(b)); },
        py::arg("a"), py::arg("b"), "Mean structural similarity over an 11x11 Gaussian window.");

  m.def("edge_precision_recall",
        [](const FloatArray& pred, const FloatArray& gt) {
          PrecisionRecall pr = edge_precision_recall(to_edges(pred), to_edges(gt));
          return py::make_tuple(pr.precision, pr.recall);
        },
        py::arg("pred"), py::arg("gt"),
        "(precision, recall) of a predicted binary edge map against ground truth.");

  m.def("read_png", [](const std::string& path) { return from_image(read_png(path)); },
        py::arg("path"));
  m.def("write_png",
        [](const std::string& path, const FloatArray& img) { write_png(path, to_image(img)); },
        py::arg("path"), py::arg("image"));
  m.def("read_png_edges",
        [](const std::string& path) { return from_edges(read_png_edges(path)); }, py::arg("path"));
  m.def("write_png_edges",
        [](const std::string& path, const FloatArray& edges) { write_png(path, to_edges(edges)); },
        py::arg("path"), py::arg("edges"));

  py::class_<SuperResolver>(m, "SuperResolver",
                            "Runs a trained two-stage checkpoint on low-resolution images.")
      .def(py::init<const std::string&>(), py::arg("checkpoint_path"))
      .def_property_readonly("scale", &SuperResolver::scale)
      .def("run",
           [](SuperResolver& self, const FloatArray& lr) {
             InferenceOutput out = self.run(to_image(lr));
             return py::make_tuple(from_image(out.sr), from_edges(out.edges));
           },
           py::arg("lr_rgb"),
           "Returns (sr_image, soft_edges) upscaled by the checkpoint's factor.");

  m.def("reference_table", [] {
    py::list rows;
    for (const ReferenceRecord& r : reference_table()) {
      py::dict d;
      d["method"] = r.method;
      d["dataset"] = r.dataset;
      d["scale"] = r.scale;
      d["psnr_db"] = std::isnan(r.psnr_db) ? py::object(py::none()) : py::object(py::float_(r.psnr_db));
      d["ssim"] = std::isnan(r.ssim) ? py::object(py::none()) : py::object(py::float_(r.ssim));
      rows.append(d);
    }
    return rows;
  }, "Published PSNR/SSIM rows for the standard benchmarks; None marks unreported cells.");

  m.def("edge_reference_table", [] {
    py::list rows;
    for (const EdgeReferenceRecord& r : edge_reference_table()) {
      py::dict d;
      d["dataset"] = r.dataset;
      d["scale"] = r.scale;
      d["precision_pct"] = r.precision_pct;
      d["recall_pct"] = r.recall_pct;
      rows.append(d);
    }
    return rows;
  }, "Published edge precision/recall percentages.");

  m.def("reference_provenance", &reference_provenance);
}
