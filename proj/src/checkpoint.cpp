#include "edgesr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "archive payloads are written in native little-endian order");

namespace edgesr {

namespace {

constexpr char kMagic[8] = {'E', 'D', 'G', 'E', 'S', 'R', '0', '1'};

std::int64_t shape_numel(const std::vector<int>& shape, const std::string& name) {
  if (shape.empty()) throw std::invalid_argument("Archive: empty shape for tensor " + name);
  std::int64_t n = 1;
  for (int d : shape) {
    if (d < 1)
      throw std::invalid_argument("Archive: nonpositive dimension in tensor " + name);
    n *= d;
  }
  return n;
}

const char* dtype_name(TensorBlob::Dtype d) {
  return d == TensorBlob::Dtype::f32 ? "f32" : "f64";
}

TensorBlob::Dtype dtype_from_name(const std::string& s) {
  if (s == "f32") return TensorBlob::Dtype::f32;
  if (s == "f64") return TensorBlob::Dtype::f64;
  throw std::runtime_error("Archive: unknown dtype " + s);
}

size_t element_size(TensorBlob::Dtype d) {
  return d == TensorBlob::Dtype::f32 ? sizeof(float) : sizeof(double);
}

}  // namespace

std::int64_t TensorBlob::numel() const { return shape_numel(shape, "<unnamed>"); }

void Archive::put_f32(const std::string& name, std::vector<int> shape, std::vector<float> data) {
  if (shape_numel(shape, name) != static_cast<std::int64_t>(data.size()))
    throw std::invalid_argument("Archive: data size does not match shape for " + name);
  TensorBlob blob;
  blob.dtype = TensorBlob::Dtype::f32;
  blob.shape = std::move(shape);
  blob.f32 = std::move(data);
  tensors_[name] = std::move(blob);
}

void Archive::put_f64(const std::string& name, std::vector<int> shape, std::vector<double> data) {
  if (shape_numel(shape, name) != static_cast<std::int64_t>(data.size()))
    throw std::invalid_argument("Archive: data size does not match shape for " + name);
  TensorBlob blob;
  blob.dtype = TensorBlob::Dtype::f64;
  blob.shape = std::move(shape);
  blob.f64 = std::move(data);
  tensors_[name] = std::move(blob);
}

const TensorBlob& Archive::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw std::runtime_error("Archive: missing tensor " + name);
  return it->second;
}

void save_archive(const std::string& path, const Archive& archive) {
  nlohmann::json header;
  header["format_version"] = 1;
  header["meta"] = archive.meta;

  nlohmann::json tensor_list = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, blob] : archive.tensors()) {
    const std::uint64_t nbytes =
        static_cast<std::uint64_t>(blob.numel()) * element_size(blob.dtype);
    tensor_list.push_back({{"name", name},
                           {"dtype", dtype_name(blob.dtype)},
                           {"shape", blob.shape},
                           {"offset", offset}});
    offset += nbytes;
  }
  header["tensors"] = std::move(tensor_list);
  const std::string header_text = header.dump();

  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("Archive: cannot write " + tmp.string());
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t header_len = header_text.size();
    out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (const auto& [name, blob] : archive.tensors()) {
      if (blob.dtype == TensorBlob::Dtype::f32)
        out.write(reinterpret_cast<const char*>(blob.f32.data()),
                  static_cast<std::streamsize>(blob.f32.size() * sizeof(float)));
      else
        out.write(reinterpret_cast<const char*>(blob.f64.data()),
                  static_cast<std::streamsize>(blob.f64.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("Archive: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

Archive load_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("Archive: cannot open " + path);

  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("Archive: " + path + " is not a weights archive");

  std::uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  if (!in) throw std::runtime_error("Archive: truncated header in " + path);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error("Archive: truncated header in " + path);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("Archive: corrupt header in " + path + ": " + e.what());
  }
  if (header.at("format_version").get<int>() != 1)
    throw std::runtime_error("Archive: unsupported format version in " + path);

  Archive archive;
  archive.meta = header.value("meta", nlohmann::json::object());
  const std::streampos payload_start = in.tellg();
  for (const nlohmann::json& entry : header.at("tensors")) {
    const std::string name = entry.at("name").get<std::string>();
    const TensorBlob::Dtype dtype = dtype_from_name(entry.at("dtype").get<std::string>());
    const std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
    const std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
    const std::int64_t count = shape_numel(shape, name);

    in.seekg(payload_start + static_cast<std::streamoff>(offset));
    if (dtype == TensorBlob::Dtype::f32) {
      std::vector<float> data(static_cast<size_t>(count));
      in.read(reinterpret_cast<char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(float)));
      if (!in) throw std::runtime_error("Archive: truncated payload for " + name);
      archive.put_f32(name, shape, std::move(data));
    } else {
      std::vector<double> data(static_cast<size_t>(count));
      in.read(reinterpret_cast<char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
      if (!in) throw std::runtime_error("Archive: truncated payload for " + name);
      archive.put_f64(name, shape, std::move(data));
    }
  }
  return archive;
}

}  // namespace edgesr
