#pragma once

// On-disk containers shared by every stage of the pipeline.
//
// Both binary formats use the same layout:
//
//   offset 0   4 bytes   magic ("NACT" or "NEMB")
//   offset 4   1 byte    version (0x01)
//   offset 5   4 bytes   header length L, unsigned little-endian
//   offset 9   L bytes   UTF-8 JSON header, compact, keys in fixed order
//   offset 9+L           payload: little-endian IEEE-754 f32, row-major
//
// NACT header keys: model_id, layer_id, dtype ("f32"), shape, image_ids[, meta]
// NEMB header keys: source_id, dtype ("f32"), dim, item_ids, normalized

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace neuroscope {

inline constexpr std::uint8_t kFormatVersion = 0x01;

/// Per-layer neuron activations over a probe set: [N, K] or [N, K, H, W].
struct ActivationTensor {
  std::string model_id;
  std::string layer_id;
  std::vector<std::string> image_ids;
  std::vector<std::size_t> shape;
  std::vector<float> values;
  /// Free-form exporter metadata (hook point, nonlinearity position).
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();

  std::size_t num_images() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t num_neurons() const { return shape.size() < 2 ? 0 : shape[1]; }
  bool is_spatial() const { return shape.size() == 4; }
  /// H*W for spatial tensors, 1 otherwise.
  std::size_t map_size() const { return is_spatial() ? shape[2] * shape[3] : 1; }

  /// Contiguous activation map of neuron k on image i.
  std::span<const float> map(std::size_t image, std::size_t neuron) const;

  /// Throws ValidationError naming the first broken invariant.
  void validate() const;

  /// Metadata equal and payload bit-identical.
  bool operator==(const ActivationTensor&) const;
};

/// Row-per-item embeddings from a reference encoder.
struct EmbeddingMatrix {
  std::string source_id;
  std::vector<std::string> item_ids;
  std::size_t dim = 0;
  std::vector<float> rows;
  bool normalized = false;

  std::size_t num_rows() const { return item_ids.size(); }
  std::span<const float> row(std::size_t r) const { return {rows.data() + r * dim, dim}; }

  void validate() const;

  /// Metadata equal and payload bit-identical.
  bool operator==(const EmbeddingMatrix&) const;
};

/// Probe image set with its class structure.
struct ProbeManifest {
  std::string dataset_id;
  std::vector<std::string> image_ids;
  std::map<std::string, std::string> class_of;
  /// Sorted unique class names.
  std::vector<std::string> class_list;

  /// Builds a manifest from (image id, class) pairs in probe order.
  static ProbeManifest from_images(std::string dataset_id,
                                   const std::vector<std::pair<std::string, std::string>>& images);

  /// Image ids of one class, in probe order.
  std::vector<std::string> images_of(std::string_view class_name) const;

  bool has_class(std::string_view class_name) const;

  void validate() const;
};

std::string encode_activation_tensor(const ActivationTensor& t);
ActivationTensor decode_activation_tensor(std::string_view bytes);
void write_activation_tensor(const ActivationTensor& t, const std::filesystem::path& path);
ActivationTensor read_activation_tensor(const std::filesystem::path& path);

std::string encode_embedding_matrix(const EmbeddingMatrix& m);
EmbeddingMatrix decode_embedding_matrix(std::string_view bytes);
void write_embedding_matrix(const EmbeddingMatrix& m, const std::filesystem::path& path);
EmbeddingMatrix read_embedding_matrix(const std::filesystem::path& path);

nlohmann::ordered_json manifest_to_json(const ProbeManifest& m);
ProbeManifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const ProbeManifest& m, const std::filesystem::path& path);
ProbeManifest read_manifest(const std::filesystem::path& path);

}  // namespace neuroscope
