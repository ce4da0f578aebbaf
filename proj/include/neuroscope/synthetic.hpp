#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "neuroscope/concepts.hpp"
#include "neuroscope/tensor_store.hpp"

namespace neuroscope {

/// Parameters of a synthetic probe bundle with planted concept neurons.
///
/// Images fall into `num_classes` classes (image i has class i mod C). Each
/// class name is a concept; the remaining concepts are generic words. Image
/// embeddings lean toward their class concept's text embedding, so column
/// m of P peaks on the images of class m. A planted neuron's summarized
/// activation is the standardized P column of its concept plus Gaussian
/// noise with std 1/snr; the other neurons are pure noise.
struct SyntheticSpec {
  std::size_t num_images = 200;
  std::size_t num_neurons = 64;
  std::size_t num_concepts = 120;
  std::size_t num_classes = 40;
  std::size_t num_planted = 40;
  std::size_t num_in_vocab = 20;  // classes listed in the training vocabulary
  std::size_t dim = 64;
  std::size_t map_height = 2;
  std::size_t map_width = 2;
  double snr = 10.0;
  /// Weight of the class direction in each image embedding (rest is noise).
  double class_alignment = 0.8;
  /// When set, every neuron is pure noise (no planted pairs).
  bool noise_only = false;
  std::uint64_t seed = 7;
};

struct SyntheticBundle {
  ActivationTensor activations;
  EmbeddingMatrix image_embeddings;
  EmbeddingMatrix concept_embeddings;
  ProbeManifest manifest;
  std::vector<std::string> training_vocab;
  std::vector<std::string> common_words;
  /// (neuron unit, planted concept).
  std::vector<std::pair<std::size_t, std::string>> planted;
};

SyntheticBundle make_synthetic_bundle(const SyntheticSpec& spec);

/// Writes activations.nact, images.nemb, concepts.nemb, manifest.json,
/// vocab.txt, common_words.txt, classes.txt, planted.json and a config.json
/// that the CLI accepts as-is.
void write_synthetic_bundle(const SyntheticBundle& bundle, const std::filesystem::path& dir);

}  // namespace neuroscope
