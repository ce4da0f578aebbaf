#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "neuroscope/tensor_store.hpp"

namespace test {

/// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("neuroscope-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<std::string> ids(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

inline neuroscope::EmbeddingMatrix random_unit_rows(std::mt19937_64& rng, const std::string& prefix,
                                                    std::size_t rows, std::size_t dim) {
  std::normal_distribution<double> normal;
  neuroscope::EmbeddingMatrix m;
  m.source_id = "test-" + prefix;
  m.item_ids = ids(prefix, rows);
  m.dim = dim;
  m.normalized = true;
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<double> v(dim);
    double sq = 0.0;
    for (auto& x : v) {
      x = normal(rng);
      sq += x * x;
    }
    for (double x : v) m.rows.push_back(static_cast<float>(x / std::sqrt(sq)));
  }
  return m;
}

inline neuroscope::ActivationTensor random_tensor(std::mt19937_64& rng, std::vector<std::size_t> shape,
                                                  const std::vector<std::string>& image_ids) {
  std::normal_distribution<float> normal;
  neuroscope::ActivationTensor t;
  t.model_id = "test-model";
  t.layer_id = "layer";
  t.image_ids = image_ids;
  t.shape = std::move(shape);
  std::size_t count = 1;
  for (auto s : t.shape) count *= s;
  t.values.resize(count);
  for (auto& v : t.values) v = normal(rng);
  return t;
}

}  // namespace test
