#pragma once

// Binary archive for trained weights and optimizer state. One file carries a
// JSON header describing every tensor plus free-form metadata, followed by the
// raw element bytes, so a save/load/save cycle is bit-identical. The same
// container stores feature-extractor weights and full training checkpoints.
//
// Layout: 8-byte magic, little-endian uint64 header length, UTF-8 JSON header,
// then the tensor payloads in name order at the offsets the header records.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "edgesr/nn/adam.hpp"
#include "edgesr/nn/layers.hpp"

namespace edgesr {

struct TensorBlob {
  enum class Dtype { f32, f64 };
  Dtype dtype = Dtype::f32;
  std::vector<int> shape;
  std::vector<float> f32;
  std::vector<double> f64;

  std::int64_t numel() const;
};

class Archive {
 public:
  nlohmann::json meta = nlohmann::json::object();

  void put_f32(const std::string& name, std::vector<int> shape, std::vector<float> data);
  void put_f64(const std::string& name, std::vector<int> shape, std::vector<double> data);
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  const TensorBlob& at(const std::string& name) const;
  const std::map<std::string, TensorBlob>& tensors() const { return tensors_; }

 private:
  std::map<std::string, TensorBlob> tensors_;
};

// Writes to a temporary sibling and renames into place so readers never see a
// partial file.
void save_archive(const std::string& path, const Archive& archive);
Archive load_archive(const std::string& path);

// Parameter and buffer transfer between an archive and a live network. Names
// become "<prefix><param name>"; loads are shape-checked.

namespace detail {

template <typename T>
void put_values(Archive& a, const std::string& name, std::vector<int> shape,
                const std::vector<T>& values) {
  if constexpr (std::is_same_v<T, float>) {
    a.put_f32(name, std::move(shape), values);
  } else {
    a.put_f64(name, std::move(shape), std::vector<double>(values.begin(), values.end()));
  }
}

template <typename T>
const std::vector<T>& blob_values(const TensorBlob& blob) {
  if constexpr (std::is_same_v<T, float>) {
    if (blob.dtype != TensorBlob::Dtype::f32)
      throw std::runtime_error("Archive: tensor stored at a different precision");
    return blob.f32;
  } else {
    if (blob.dtype != TensorBlob::Dtype::f64)
      throw std::runtime_error("Archive: tensor stored at a different precision");
    return blob.f64;
  }
}

}  // namespace detail

template <typename T>
void store_network(Archive& a, const std::string& prefix, const nn::ParamRefs<T>& refs) {
  for (const auto& [name, node] : refs.params)
    detail::put_values<T>(a, prefix + name, node->shape, node->v);
  for (const auto& [name, buffer] : refs.buffers)
    detail::put_values<T>(a, prefix + name, {static_cast<int>(buffer->size())}, *buffer);
}

template <typename T>
void load_network(const Archive& a, const std::string& prefix, const nn::ParamRefs<T>& refs) {
  for (const auto& [name, node] : refs.params) {
    const TensorBlob& blob = a.at(prefix + name);
    if (blob.shape != node->shape)
      throw std::runtime_error("Archive: shape mismatch for " + prefix + name);
    node->v = detail::blob_values<T>(blob);
  }
  for (const auto& [name, buffer] : refs.buffers) {
    const TensorBlob& blob = a.at(prefix + name);
    const std::vector<T>& values = detail::blob_values<T>(blob);
    if (values.size() != buffer->size())
      throw std::runtime_error("Archive: size mismatch for " + prefix + name);
    *buffer = values;
  }
}

// Optimizer state travels next to the parameters it tracks: per-slot first and
// second moments as tensors, scalars under meta[<prefix>].
template <typename T>
void store_adam(Archive& a, const std::string& prefix, const nn::Adam<T>& opt) {
  for (const auto& slot : opt.slots()) {
    const std::vector<int> shape = {static_cast<int>(slot.m.size())};
    detail::put_values<T>(a, prefix + slot.name + ".m", shape, slot.m);
    detail::put_values<T>(a, prefix + slot.name + ".v", shape, slot.v);
  }
  a.meta[prefix] = {{"lr", opt.lr()},
                    {"beta1", opt.beta1()},
                    {"beta2", opt.beta2()},
                    {"step_count", opt.step_count()}};
}

template <typename T>
void load_adam(const Archive& a, const std::string& prefix, nn::Adam<T>& opt) {
  for (auto& slot : opt.slots()) {
    const std::vector<T>& m = detail::blob_values<T>(a.at(prefix + slot.name + ".m"));
    const std::vector<T>& v = detail::blob_values<T>(a.at(prefix + slot.name + ".v"));
    if (m.size() != slot.m.size() || v.size() != slot.v.size())
      throw std::runtime_error("Archive: optimizer state size mismatch for " + slot.name);
    slot.m = m;
    slot.v = v;
  }
  if (!a.meta.contains(prefix))
    throw std::runtime_error("Archive: missing optimizer metadata " + prefix);
  const nlohmann::json& j = a.meta.at(prefix);
  opt.set_lr(j.at("lr").get<double>());
  opt.set_step_count(j.at("step_count").get<std::int64_t>());
}

}  // namespace edgesr
