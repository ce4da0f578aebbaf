#include "neuroscope/classifier.hpp"

#include <algorithm>

#include "neuroscope/concepts.hpp"
#include "neuroscope/error.hpp"

namespace neuroscope {

namespace {

std::size_t image_index(const ActivationTensor& t, std::string_view image_id) {
  const auto it = std::find(t.image_ids.begin(), t.image_ids.end(), image_id);
  if (it == t.image_ids.end()) {
    throw InputError("image '" + std::string(image_id) + "' is not in layer '" + t.layer_id + "'");
  }
  return static_cast<std::size_t>(it - t.image_ids.begin());
}

const ActivationTensor& layer_of(std::span<const ActivationTensor> layers, const NeuronRef& n) {
  for (const auto& t : layers) {
    if (t.layer_id == n.layer_id) {
      return t;
    }
  }
  throw InputError("no activations loaded for layer '" + n.layer_id + "'");
}

}  // namespace

ConceptNeuronIndex build_index(const std::vector<NeuronLabel>& labels) {
  ConceptNeuronIndex index;
  for (const auto& l : labels) {
    if (l.is_dead()) {
      continue;
    }
    index.by_concept[l.concept_name].push_back(ScoredNeuron{l.neuron, l.score});
  }
  for (auto& [concept_name, list] : index.by_concept) {
    std::sort(list.begin(), list.end(), [](const ScoredNeuron& a, const ScoredNeuron& b) {
      if (a.score != b.score) {
        return a.score > b.score;
      }
      return a.neuron < b.neuron;
    });
    index.best.emplace(concept_name, list.front().neuron);
  }
  return index;
}

std::set<std::string> detected_classes(const ConceptNeuronIndex& index,
                                       const ProbeManifest& manifest) {
  std::set<std::string> out;
  for (const auto& cls : manifest.class_list) {
    if (index.has(normalize_concept(cls))) {
      out.insert(cls);
    }
  }
  return out;
}

double neuron_activation(const ActivationTensor& t, std::size_t neuron, std::string_view image_id,
                         SummaryKind summary) {
  if (neuron >= t.num_neurons()) {
    throw InputError("neuron index " + std::to_string(neuron) + " out of range for layer '" +
                     t.layer_id + "'");
  }
  if (summary == SummaryKind::kIdentity && t.is_spatial()) {
    throw InputError("identity summary is only valid for non-spatial activations");
  }
  return summarize_map(t.map(image_index(t, image_id), neuron), summary);
}

TrialPrediction classify_trial(const ConceptNeuronIndex& index,
                               std::span<const ActivationTensor> layers, const Trial& trial,
                               const ProbeManifest& manifest, const ClassifyOptions& options) {
  const auto key = normalize_concept(trial.target_class);
  const auto it = index.by_concept.find(key);
  if (it == index.by_concept.end() || it->second.empty()) {
    throw ConceptNotDetected(trial.target_class);
  }
  const std::size_t used = std::max<std::size_t>(1, std::min(options.ensemble, it->second.size()));

  TrialPrediction pred;
  pred.trial_id = trial.trial_id;
  pred.seed = trial.seed;
  pred.target_class = trial.target_class;
  pred.neuron = it->second.front().neuron;

  const auto images = trial.images();
  std::size_t best = 0;
  double best_value = 0.0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    double value = 0.0;
    for (std::size_t e = 0; e < used; ++e) {
      const auto& ref = it->second[e].neuron;
      value += neuron_activation(layer_of(layers, ref), ref.unit, images[i], options.summary);
    }
    value /= static_cast<double>(used);
    pred.activations.emplace_back(images[i], value);
    if (i == 0 || value > best_value) {
      best = i;
      best_value = value;
    }
  }
  pred.chosen = images[best];
  const auto cls = manifest.class_of.find(pred.chosen);
  if (cls == manifest.class_of.end()) {
    throw InputError("trial image '" + pred.chosen + "' is not in the probe manifest");
  }
  pred.correct = cls->second == trial.target_class;
  return pred;
}

}  // namespace neuroscope
