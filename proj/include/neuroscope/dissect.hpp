#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "neuroscope/tensor_store.hpp"

namespace neuroscope {

/// Reserved label for neurons whose summarized activations are constant.
inline constexpr std::string_view kDeadConcept = "<dead>";

enum class SummaryKind { kSpatialMean, kSpatialMax, kIdentity };
enum class SimilarityKind { kCosine, kRankWpmi };

std::string_view to_string(SummaryKind kind);
std::string_view to_string(SimilarityKind kind);
/// Accepts "mean"/"spatial-mean", "max"/"spatial-max", "identity".
SummaryKind parse_summary_kind(std::string_view text);
/// Accepts "cosine", "rank-wpmi".
SimilarityKind parse_similarity_kind(std::string_view text);

struct NeuronRef {
  std::string layer_id;
  std::size_t unit = 0;

  auto operator<=>(const NeuronRef&) const = default;
};

/// Image-by-concept dot products of unit-normalized embeddings.
struct ConceptActivationMatrix {
  std::vector<std::string> image_ids;
  std::vector<std::string> concepts;
  std::vector<float> values;  // row-major, rows() x cols()

  std::size_t rows() const { return image_ids.size(); }
  std::size_t cols() const { return concepts.size(); }
  float at(std::size_t image, std::size_t concept_index) const {
    return values[image * cols() + concept_index];
  }
};

struct NeuronActivationVector {
  NeuronRef neuron;
  std::vector<double> values;
  SummaryKind summary = SummaryKind::kSpatialMean;
};

struct NeuronLabel {
  NeuronRef neuron;
  std::string concept_name;
  double score = 0.0;
  SimilarityKind similarity = SimilarityKind::kCosine;
  SummaryKind summary = SummaryKind::kSpatialMean;
  std::vector<std::string> flags;

  bool is_dead() const { return concept_name == kDeadConcept; }
  bool operator==(const NeuronLabel&) const = default;
};

/// Parameters of the rank-weighted PMI similarity.
struct RankWpmiParams {
  std::size_t top_images = 100;  // B, clipped to N
  double lambda = 1.0;
};

/// P[i][j] = <image_i, concept_j>. Both inputs must be flagged normalized
/// and share a dimension.
ConceptActivationMatrix concept_activation_matrix(const EmbeddingMatrix& images,
                                                  const EmbeddingMatrix& concepts);

/// Reduces neuron k's activation map on every probe image to one scalar.
/// Spatial mean/max on a rank-2 tensor pass the scalar through; identity on
/// a spatial tensor is rejected.
NeuronActivationVector summarize_activations(const ActivationTensor& t, std::size_t neuron,
                                             SummaryKind kind);

/// Scalar g(A_k(x)) for a single map.
double summarize_map(std::span<const float> map, SummaryKind kind);

/// Similarity between concept column m of P and an activation vector.
///
/// cosine: Pearson-style cosine of the mean-centered vectors. A constant
/// activation vector raises ComputationError; a constant concept column
/// carries no information and scores 0.
///
/// rank-wpmi: sum over the B top-activating images of w_i * log softmax(P_i)[m]
/// minus lambda * log(mean_i softmax(P_i)[m]), with w = softmax of q over the
/// top-B images. Approximates Soft-WPMI, which is defined elsewhere.
double similarity(std::size_t concept_index, std::span<const double> activations,
                  const ConceptActivationMatrix& p, SimilarityKind kind,
                  const RankWpmiParams& wpmi = {});

/// Labels every neuron in `t` with the concept maximizing similarity.
/// Ties go to the lowest concept index. Neurons with constant summarized
/// activations get kDeadConcept, the lowest finite float score, and the
/// "dead" flag. The tensor's image order must equal P's.
std::vector<NeuronLabel> label_neurons(const ActivationTensor& t, const ConceptActivationMatrix& p,
                                       SimilarityKind kind = SimilarityKind::kCosine,
                                       SummaryKind summary = SummaryKind::kSpatialMean,
                                       const RankWpmiParams& wpmi = {});

nlohmann::ordered_json label_to_json(const NeuronLabel& label);
NeuronLabel label_from_json(const nlohmann::json& j);

/// JSON Lines, one record per neuron.
std::string labels_to_jsonl(const std::vector<NeuronLabel>& labels);
std::vector<NeuronLabel> labels_from_jsonl(std::string_view text);
void write_labels(const std::vector<NeuronLabel>& labels, const std::filesystem::path& path);
std::vector<NeuronLabel> read_labels(const std::filesystem::path& path);

}  // namespace neuroscope
