#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "neuroscope/concepts.hpp"
#include "neuroscope/dissect.hpp"
#include "neuroscope/tensor_store.hpp"

namespace neuroscope {

/// One forced-choice item: a target image and n-1 foils from distinct
/// other classes. The target is shown at `target_position`.
struct Trial {
  std::string trial_id;
  std::string target_class;
  std::string target_image;
  std::vector<std::string> foil_images;
  std::size_t target_position = 0;
  std::uint64_t seed = 0;

  std::size_t n() const { return foil_images.size() + 1; }
  /// Images in presentation order.
  std::vector<std::string> images() const;

  bool operator==(const Trial&) const = default;
};

struct TrialSet {
  std::vector<Trial> trials;

  bool operator==(const TrialSet&) const = default;
};

/// Outcome of classifying one trial.
struct TrialPrediction {
  std::string trial_id;
  std::uint64_t seed = 0;
  std::string target_class;
  NeuronRef neuron;
  /// (image id, activation) in presentation order.
  std::vector<std::pair<std::string, double>> activations;
  std::string chosen;
  bool correct = false;

  bool operator==(const TrialPrediction&) const = default;
};

/// Generates `trials_per_class` trials for every class in `classes` (in
/// sorted order) with one CounterRng stream per seed. Per trial, in draw
/// order: target image, n-1 foil classes by partial Fisher-Yates over the
/// other classes, one image per foil class, then the target position.
TrialSet generate_trials(const ProbeManifest& manifest, const std::set<std::string>& classes,
                         std::size_t n, std::size_t trials_per_class, std::uint64_t seed);

std::string trials_to_jsonl(const TrialSet& set);
TrialSet trials_from_jsonl(std::string_view text);
void write_trials(const TrialSet& set, const std::filesystem::path& path);
TrialSet read_trials(const std::filesystem::path& path);

std::string predictions_to_jsonl(const std::vector<TrialPrediction>& predictions);
std::vector<TrialPrediction> predictions_from_jsonl(std::string_view text);

enum class Bucket { kInVocab, kOutOfVocab, kAll };
std::string_view to_string(Bucket bucket);
Bucket parse_bucket(std::string_view text);

/// Accuracy of one bucket across seeds. Standard deviation is the sample
/// std (ddof = 1); it is absent with fewer than two seeds, and the mean is
/// absent when the bucket holds no trials.
struct AccuracyReport {
  Bucket bucket = Bucket::kAll;
  std::size_t n = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> per_seed_accuracy;
  std::optional<double> mean;
  std::optional<double> std;
  std::size_t num_classes = 0;
  std::size_t num_trials = 0;

  bool operator==(const AccuracyReport&) const = default;
};

/// Buckets predictions by the target class's partition membership and
/// reports per-seed accuracy for in-vocab, out-of-vocab and the pooled
/// "all" bucket (pooled over trials, not averaged over buckets).
std::vector<AccuracyReport> score(const std::vector<TrialPrediction>& predictions,
                                  const VocabPartition& partition,
                                  const std::vector<std::uint64_t>& seeds);

/// Mean and sample standard deviation; std is empty for fewer than two values.
std::pair<double, std::optional<double>> mean_and_sample_std(const std::vector<double>& values);

nlohmann::ordered_json report_to_json(const AccuracyReport& r);
AccuracyReport report_from_json(const nlohmann::json& j);
/// CSV with header bucket,n,mean,std,num_trials,seeds (seeds ';'-joined).
std::string reports_to_csv(const std::vector<AccuracyReport>& reports);

}  // namespace neuroscope
