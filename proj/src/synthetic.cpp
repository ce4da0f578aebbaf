#include "neuroscope/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "neuroscope/error.hpp"
#include "neuroscope/io_util.hpp"
#include "neuroscope/rng.hpp"

namespace neuroscope {

namespace {

std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, i);
  return buf;
}

std::vector<double> unit_gaussian(CounterRng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double sq = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    sq += x * x;
  }
  const double norm = std::sqrt(sq);
  for (auto& x : v) x /= norm;
  return v;
}

void append_unit_row(std::vector<float>& rows, const std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  for (double x : v) rows.push_back(static_cast<float>(x / norm));
}

template <typename T>
void shuffle(std::vector<T>& v, CounterRng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.uniform(i)]);
  }
}

}  // namespace

SyntheticBundle make_synthetic_bundle(const SyntheticSpec& spec) {
  if (spec.num_classes == 0 || spec.num_classes > spec.num_concepts) {
    throw InputError("synthetic bundle needs 0 < num_classes <= num_concepts");
  }
  if (spec.num_images < spec.num_classes) {
    throw InputError("synthetic bundle needs at least one image per class");
  }
  if (spec.num_planted > spec.num_classes || spec.num_planted > spec.num_neurons) {
    throw InputError("planted pairs exceed classes or neurons");
  }
  if (spec.num_in_vocab > spec.num_classes) {
    throw InputError("num_in_vocab exceeds num_classes");
  }
  CounterRng rng(spec.seed);
  SyntheticBundle b;

  std::vector<std::string> classes;
  for (std::size_t c = 0; c < spec.num_classes; ++c) classes.push_back(numbered("class", c, 3));
  for (std::size_t w = 0; w < spec.num_concepts - spec.num_classes; ++w) {
    b.common_words.push_back(numbered("word", w, 3));
  }
  std::vector<std::string> concepts = classes;
  concepts.insert(concepts.end(), b.common_words.begin(), b.common_words.end());
  shuffle(concepts, rng);

  // Text embeddings.
  std::map<std::string, std::vector<double>> text;
  b.concept_embeddings.source_id = "synthetic-text";
  b.concept_embeddings.dim = spec.dim;
  b.concept_embeddings.normalized = true;
  for (const auto& c : concepts) {
    auto v = unit_gaussian(rng, spec.dim);
    append_unit_row(b.concept_embeddings.rows, v);
    b.concept_embeddings.item_ids.push_back(c);
    text.emplace(c, std::move(v));
  }

  // Image embeddings lean toward their class concept.
  std::vector<std::pair<std::string, std::string>> images;
  b.image_embeddings.source_id = "synthetic-image";
  b.image_embeddings.dim = spec.dim;
  b.image_embeddings.normalized = true;
  const double noise_weight = std::sqrt(1.0 - spec.class_alignment * spec.class_alignment);
  for (std::size_t i = 0; i < spec.num_images; ++i) {
    const auto id = numbered("img", i, 4);
    const auto& cls = classes[i % spec.num_classes];
    images.emplace_back(id, cls);
    const auto noise = unit_gaussian(rng, spec.dim);
    const auto& dir = text.at(cls);
    std::vector<double> v(spec.dim);
    for (std::size_t d = 0; d < spec.dim; ++d) {
      v[d] = spec.class_alignment * dir[d] + noise_weight * noise[d];
    }
    append_unit_row(b.image_embeddings.rows, v);
    b.image_embeddings.item_ids.push_back(id);
  }
  b.manifest = ProbeManifest::from_images("synthetic", images);

  std::vector<std::string> sorted_classes = classes;
  std::sort(sorted_classes.begin(), sorted_classes.end());
  b.training_vocab.assign(sorted_classes.begin(),
                          sorted_classes.begin() + static_cast<std::ptrdiff_t>(spec.num_in_vocab));
  for (std::size_t w = 0; w < b.common_words.size() / 2; ++w) {
    b.training_vocab.push_back(b.common_words[w]);
  }

  // Planted neurons at random units, each tied to a distinct class concept.
  std::vector<std::size_t> units(spec.num_neurons);
  std::iota(units.begin(), units.end(), 0);
  shuffle(units, rng);
  std::map<std::size_t, std::string> planted_of;
  if (!spec.noise_only) {
    std::vector<std::string> targets = classes;
    shuffle(targets, rng);
    for (std::size_t j = 0; j < spec.num_planted; ++j) {
      planted_of.emplace(units[j], targets[j]);
    }
  }
  for (const auto& [unit, cls] : planted_of) b.planted.emplace_back(unit, cls);

  // Standardized concept columns of P for the planted signal.
  auto standardized_column = [&](const std::string& concept_name) {
    const auto& dir = text.at(concept_name);
    std::vector<double> col(spec.num_images);
    for (std::size_t i = 0; i < spec.num_images; ++i) {
      const auto row = b.image_embeddings.row(i);
      double dot = 0.0;
      for (std::size_t d = 0; d < spec.dim; ++d) dot += row[d] * dir[d];
      col[i] = dot;
    }
    const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
    double ss = 0.0;
    for (double x : col) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(col.size()));
    for (auto& x : col) x = (x - mean) / sd;
    return col;
  };

  auto& t = b.activations;
  t.model_id = spec.noise_only ? "synthetic-noise" : "synthetic-planted";
  t.layer_id = "layer4";
  t.image_ids = b.manifest.image_ids;
  const std::size_t hw = spec.map_height * spec.map_width;
  t.shape = {spec.num_images, spec.num_neurons, spec.map_height, spec.map_width};
  t.values.assign(spec.num_images * spec.num_neurons * hw, 0.0f);
  t.meta = nlohmann::ordered_json{{"generator", "neuroscope-synthetic"},
                                  {"seed", spec.seed},
                                  {"snr", spec.snr},
                                  {"noise_only", spec.noise_only}};
  // Per-cell noise scaled so the spatial mean carries std 1/snr.
  const double cell_sd = std::sqrt(static_cast<double>(hw)) / spec.snr;
  for (std::size_t k = 0; k < spec.num_neurons; ++k) {
    const auto planted = planted_of.find(k);
    const std::vector<double> signal = planted != planted_of.end()
                                           ? standardized_column(planted->second)
                                           : std::vector<double>{};
    for (std::size_t i = 0; i < spec.num_images; ++i) {
      for (std::size_t s = 0; s < hw; ++s) {
        double v;
        if (!signal.empty()) {
          v = 1.0 + signal[i] + cell_sd * rng.normal();
        } else {
          v = 1.0 + std::sqrt(static_cast<double>(hw)) * rng.normal();
        }
        t.values[(i * spec.num_neurons + k) * hw + s] = static_cast<float>(v);
      }
    }
  }
  return b;
}

void write_synthetic_bundle(const SyntheticBundle& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_activation_tensor(b.activations, dir / "activations.nact");
  write_embedding_matrix(b.image_embeddings, dir / "images.nemb");
  write_embedding_matrix(b.concept_embeddings, dir / "concepts.nemb");
  write_manifest(b.manifest, dir / "manifest.json");

  auto write_list = [&](const std::vector<std::string>& words, const char* name) {
    std::string text;
    for (const auto& w : words) text += w + "\n";
    write_file_atomic(dir / name, text);
  };
  write_list(b.training_vocab, "vocab.txt");
  write_list(b.common_words, "common_words.txt");
  write_list(b.manifest.class_list, "classes.txt");

  nlohmann::ordered_json planted = nlohmann::ordered_json::array();
  for (const auto& [unit, cls] : b.planted) {
    planted.push_back({{"layer", b.activations.layer_id}, {"unit", unit}, {"concept", cls}});
  }
  write_file_atomic(dir / "planted.json", planted.dump(2) + "\n");

  nlohmann::ordered_json config;
  config["activations"] = {"activations.nact"};
  config["image_embeddings"] = "images.nemb";
  config["concept_embeddings"] = "concepts.nemb";
  config["manifest"] = "manifest.json";
  config["concept_sources"] = {{{"path", "vocab.txt"}, {"tag", "training-vocab"}},
                               {{"path", "common_words.txt"}, {"tag", "common-words"}},
                               {{"path", "classes.txt"}, {"tag", "dataset-classes"}}};
  config["vocab"] = "vocab.txt";
  config["n"] = 4;
  config["trials_per_class"] = 5;
  config["seeds"] = {0, 1, 2, 3, 4};
  config["similarity"] = "cosine";
  config["summary"] = "mean";
  config["out"] = "out";
  write_file_atomic(dir / "config.json", config.dump(2) + "\n");
}

}  // namespace neuroscope
