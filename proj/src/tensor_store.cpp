#include "neuroscope/tensor_store.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <set>
#include <unordered_set>

#include "neuroscope/error.hpp"
#include "neuroscope/io_util.hpp"

namespace neuroscope {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::size_t kPreambleSize = 9;  // magic(4) + version(1) + header length(4)

void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
}

std::uint32_t get_u32_le(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return v;
}

void put_f32_payload(std::string& out, std::span<const float> values) {
  const std::size_t start = out.size();
  out.resize(start + values.size() * 4);
  char* dst = out.data() + start;
  for (float f : values) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i) {
      *dst++ = static_cast<char>((bits >> (8 * i)) & 0xFFu);
    }
  }
}

std::vector<float> get_f32_payload(std::string_view bytes, std::size_t count) {
  std::vector<float> values(count);
  for (std::size_t j = 0; j < count; ++j) {
    values[j] = std::bit_cast<float>(get_u32_le(bytes, 4 * j));
  }
  return values;
}

bool bit_equal(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
}

void check_unique(const std::vector<std::string>& ids, const char* what) {
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw ValidationError(std::string("duplicate ") + what + " '" + id + "'");
    }
  }
}

void check_finite(std::span<const float> values) {
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!std::isfinite(values[j])) {
      throw ValidationError("non-finite value at flat index " + std::to_string(j));
    }
  }
}

std::string frame(std::string_view magic, const ojson& header, std::span<const float> payload) {
  const std::string header_text = header.dump();
  std::string out;
  out.reserve(kPreambleSize + header_text.size() + payload.size() * 4);
  out.append(magic);
  out.push_back(static_cast<char>(kFormatVersion));
  put_u32_le(out, static_cast<std::uint32_t>(header_text.size()));
  out.append(header_text);
  put_f32_payload(out, payload);
  return out;
}

struct Frame {
  nlohmann::json header;
  std::string_view payload;
};

Frame unframe(std::string_view bytes, std::string_view magic) {
  if (bytes.size() < kPreambleSize) {
    throw FormatError("file too short for a container preamble (" + std::to_string(bytes.size()) +
                      " bytes)");
  }
  if (bytes.substr(0, 4) != magic) {
    throw FormatError("bad magic: expected '" + std::string(magic) + "'");
  }
  const auto version = static_cast<unsigned char>(bytes[4]);
  if (version != kFormatVersion) {
    throw FormatError("unsupported version " + std::to_string(version));
  }
  const std::uint32_t header_len = get_u32_le(bytes, 5);
  if (kPreambleSize + static_cast<std::size_t>(header_len) > bytes.size()) {
    throw CorruptionError("header length " + std::to_string(header_len) + " exceeds file size " +
                          std::to_string(bytes.size()));
  }
  Frame f;
  try {
    f.header = nlohmann::json::parse(bytes.substr(kPreambleSize, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed JSON header: ") + e.what());
  }
  if (!f.header.is_object()) {
    throw FormatError("JSON header is not an object");
  }
  if (f.header.value("dtype", std::string()) != "f32") {
    throw FormatError("unsupported dtype (only \"f32\")");
  }
  f.payload = bytes.substr(kPreambleSize + header_len);
  return f;
}

template <typename T>
T header_field(const nlohmann::json& header, const char* key) {
  if (!header.contains(key)) {
    throw FormatError(std::string("header missing field '") + key + "'");
  }
  try {
    return header.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(std::string("header field '") + key + "' has the wrong type");
  }
}

void check_payload_size(std::string_view payload, std::size_t expected_values) {
  const std::size_t expected = expected_values * 4;
  if (payload.size() != expected) {
    throw CorruptionError("payload length mismatch: expected " + std::to_string(expected) +
                          " bytes, found " + std::to_string(payload.size()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ActivationTensor

std::span<const float> ActivationTensor::map(std::size_t image, std::size_t neuron) const {
  const std::size_t hw = map_size();
  return {values.data() + (image * num_neurons() + neuron) * hw, hw};
}

void ActivationTensor::validate() const {
  if (shape.size() != 2 && shape.size() != 4) {
    throw ValidationError("activation shape must have rank 2 or 4, got rank " +
                          std::to_string(shape.size()));
  }
  std::size_t count = 1;
  for (auto d : shape) {
    count *= d;
  }
  if (count != values.size()) {
    throw ValidationError("shape implies " + std::to_string(count) + " values but " +
                          std::to_string(values.size()) + " are stored");
  }
  if (image_ids.size() != shape[0]) {
    throw ValidationError("image_ids has " + std::to_string(image_ids.size()) +
                          " entries but shape[0] is " + std::to_string(shape[0]));
  }
  check_unique(image_ids, "image id");
  check_finite(values);
}

bool ActivationTensor::operator==(const ActivationTensor& o) const {
  return model_id == o.model_id && layer_id == o.layer_id && image_ids == o.image_ids &&
         shape == o.shape && meta == o.meta && bit_equal(values, o.values);
}

std::string encode_activation_tensor(const ActivationTensor& t) {
  t.validate();
  ojson header;
  header["model_id"] = t.model_id;
  header["layer_id"] = t.layer_id;
  header["dtype"] = "f32";
  header["shape"] = t.shape;
  header["image_ids"] = t.image_ids;
  if (!t.meta.is_null() && !t.meta.empty()) {
    header["meta"] = t.meta;
  }
  return frame("NACT", header, t.values);
}

ActivationTensor decode_activation_tensor(std::string_view bytes) {
  const Frame f = unframe(bytes, "NACT");
  ActivationTensor t;
  t.model_id = header_field<std::string>(f.header, "model_id");
  t.layer_id = header_field<std::string>(f.header, "layer_id");
  const auto& raw_shape = f.header.value("shape", nlohmann::json::array());
  if (!raw_shape.is_array() ||
      !std::all_of(raw_shape.begin(), raw_shape.end(),
                   [](const nlohmann::json& d) { return d.is_number_unsigned(); })) {
    throw FormatError("header field 'shape' must be an array of non-negative integers");
  }
  t.shape = header_field<std::vector<std::size_t>>(f.header, "shape");
  t.image_ids = header_field<std::vector<std::string>>(f.header, "image_ids");
  if (f.header.contains("meta")) {
    t.meta = ojson::parse(f.header.at("meta").dump());
  }
  if (t.shape.size() != 2 && t.shape.size() != 4) {
    throw FormatError("activation shape must have rank 2 or 4");
  }
  std::size_t count = 1;
  for (auto d : t.shape) {
    count *= d;
  }
  check_payload_size(f.payload, count);
  t.values = get_f32_payload(f.payload, count);
  t.validate();
  return t;
}

void write_activation_tensor(const ActivationTensor& t, const std::filesystem::path& path) {
  write_file_atomic(path, encode_activation_tensor(t));
}

ActivationTensor read_activation_tensor(const std::filesystem::path& path) {
  return decode_activation_tensor(read_file(path));
}

// ---------------------------------------------------------------------------
// EmbeddingMatrix

void EmbeddingMatrix::validate() const {
  if (dim == 0) {
    throw ValidationError("embedding dim must be positive");
  }
  if (rows.size() != item_ids.size() * dim) {
    throw ValidationError("embedding payload holds " + std::to_string(rows.size()) +
                          " values, expected " + std::to_string(item_ids.size() * dim));
  }
  check_unique(item_ids, "item id");
  check_finite(rows);
  if (normalized) {
    for (std::size_t r = 0; r < num_rows(); ++r) {
      double sq = 0.0;
      for (float v : row(r)) {
        sq += static_cast<double>(v) * v;
      }
      const double norm = std::sqrt(sq);
      if (std::abs(norm - 1.0) > 1e-4) {
        throw ValidationError("row " + std::to_string(r) + " ('" + item_ids[r] + "') has norm " +
                              std::to_string(norm) + " but the matrix is flagged normalized");
      }
    }
  }
}

bool EmbeddingMatrix::operator==(const EmbeddingMatrix& o) const {
  return source_id == o.source_id && item_ids == o.item_ids && dim == o.dim &&
         normalized == o.normalized && bit_equal(rows, o.rows);
}

std::string encode_embedding_matrix(const EmbeddingMatrix& m) {
  m.validate();
  ojson header;
  header["source_id"] = m.source_id;
  header["dtype"] = "f32";
  header["dim"] = m.dim;
  header["item_ids"] = m.item_ids;
  header["normalized"] = m.normalized;
  return frame("NEMB", header, m.rows);
}

EmbeddingMatrix decode_embedding_matrix(std::string_view bytes) {
  const Frame f = unframe(bytes, "NEMB");
  EmbeddingMatrix m;
  m.source_id = header_field<std::string>(f.header, "source_id");
  m.dim = header_field<std::size_t>(f.header, "dim");
  m.item_ids = header_field<std::vector<std::string>>(f.header, "item_ids");
  m.normalized = header_field<bool>(f.header, "normalized");
  if (m.dim == 0) {
    throw FormatError("embedding dim must be positive");
  }
  check_payload_size(f.payload, m.item_ids.size() * m.dim);
  m.rows = get_f32_payload(f.payload, m.item_ids.size() * m.dim);
  m.validate();
  return m;
}

void write_embedding_matrix(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  write_file_atomic(path, encode_embedding_matrix(m));
}

EmbeddingMatrix read_embedding_matrix(const std::filesystem::path& path) {
  return decode_embedding_matrix(read_file(path));
}

// ---------------------------------------------------------------------------
// ProbeManifest

ProbeManifest ProbeManifest::from_images(
    std::string dataset_id, const std::vector<std::pair<std::string, std::string>>& images) {
  ProbeManifest m;
  m.dataset_id = std::move(dataset_id);
  std::set<std::string> classes;
  for (const auto& [id, cls] : images) {
    if (!m.class_of.emplace(id, cls).second) {
      throw ValidationError("duplicate image id '" + id + "' in manifest");
    }
    m.image_ids.push_back(id);
    classes.insert(cls);
  }
  m.class_list.assign(classes.begin(), classes.end());
  m.validate();
  return m;
}

std::vector<std::string> ProbeManifest::images_of(std::string_view class_name) const {
  std::vector<std::string> out;
  for (const auto& id : image_ids) {
    if (class_of.at(id) == class_name) {
      out.push_back(id);
    }
  }
  return out;
}

bool ProbeManifest::has_class(std::string_view class_name) const {
  return std::binary_search(class_list.begin(), class_list.end(), class_name);
}

void ProbeManifest::validate() const {
  check_unique(image_ids, "image id");
  if (class_of.size() != image_ids.size()) {
    throw ValidationError("class_of covers " + std::to_string(class_of.size()) +
                          " images but the manifest lists " + std::to_string(image_ids.size()));
  }
  std::set<std::string> classes;
  for (const auto& id : image_ids) {
    auto it = class_of.find(id);
    if (it == class_of.end()) {
      throw ValidationError("image '" + id + "' has no class");
    }
    if (it->second.empty()) {
      throw ValidationError("image '" + id + "' has an empty class name");
    }
    classes.insert(it->second);
  }
  if (!std::equal(classes.begin(), classes.end(), class_list.begin(), class_list.end())) {
    throw ValidationError("class_list is not the sorted set of image classes");
  }
}

nlohmann::ordered_json manifest_to_json(const ProbeManifest& m) {
  ojson j;
  j["dataset_id"] = m.dataset_id;
  j["images"] = ojson::array();
  for (const auto& id : m.image_ids) {
    j["images"].push_back({{"id", id}, {"class", m.class_of.at(id)}});
  }
  return j;
}

ProbeManifest manifest_from_json(const nlohmann::json& j) {
  try {
    std::vector<std::pair<std::string, std::string>> images;
    for (const auto& entry : j.at("images")) {
      images.emplace_back(entry.at("id").get<std::string>(), entry.at("class").get<std::string>());
    }
    return ProbeManifest::from_images(j.at("dataset_id").get<std::string>(), images);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed probe manifest: ") + e.what());
  }
}

void write_manifest(const ProbeManifest& m, const std::filesystem::path& path) {
  write_file_atomic(path, manifest_to_json(m).dump(2) + "\n");
}

ProbeManifest read_manifest(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace neuroscope
