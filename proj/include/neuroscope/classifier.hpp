#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neuroscope/dissect.hpp"
#include "neuroscope/tensor_store.hpp"
#include "neuroscope/trials.hpp"

namespace neuroscope {

struct ScoredNeuron {
  NeuronRef neuron;
  double score = 0.0;

  bool operator==(const ScoredNeuron&) const = default;
};

/// Neurons grouped by their assigned concept, best first.
struct ConceptNeuronIndex {
  /// Per concept, sorted by score descending (ties: lower layer id, then unit).
  std::map<std::string, std::vector<ScoredNeuron>> by_concept;
  /// Head of each by_concept list.
  std::map<std::string, NeuronRef> best;

  bool has(std::string_view concept_name) const {
    return best.find(std::string(concept_name)) != best.end();
  }
};

/// Groups labels by concept; dead neurons are left out.
ConceptNeuronIndex build_index(const std::vector<NeuronLabel>& labels);

/// Manifest classes whose normalized name has a labeled neuron.
std::set<std::string> detected_classes(const ConceptNeuronIndex& index, const ProbeManifest& manifest);

/// g(A_k(x)) for one neuron and one probe image.
double neuron_activation(const ActivationTensor& t, std::size_t neuron, std::string_view image_id,
                         SummaryKind summary = SummaryKind::kSpatialMean);

struct ClassifyOptions {
  SummaryKind summary = SummaryKind::kSpatialMean;
  /// Number of top-scoring neurons averaged per concept. 1 uses only the
  /// best-aligned neuron.
  std::size_t ensemble = 1;
};

/// Picks the trial image on which the target concept's best neuron fires
/// hardest. Ties go to the earliest image in presentation order. Throws
/// ConceptNotDetected when the target has no labeled neuron. `layers` must
/// contain the tensor of every neuron used.
TrialPrediction classify_trial(const ConceptNeuronIndex& index,
                               std::span<const ActivationTensor> layers, const Trial& trial,
                               const ProbeManifest& manifest, const ClassifyOptions& options = {});

inline TrialPrediction classify_trial(const ConceptNeuronIndex& index, const ActivationTensor& t,
                                      const Trial& trial, const ProbeManifest& manifest,
                                      const ClassifyOptions& options = {}) {
  return classify_trial(index, std::span<const ActivationTensor>(&t, 1), trial, manifest, options);
}

}  // namespace neuroscope
