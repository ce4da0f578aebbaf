#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "neuroscope/concepts.hpp"
#include "neuroscope/dissect.hpp"
#include "neuroscope/repr_analysis.hpp"

namespace neuroscope::cli {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitComputation = 1;
inline constexpr int kExitInput = 2;

/// Effective configuration of one run: config file values with flag
/// overrides applied. Paths from a config file are relative to that file.
struct RunConfig {
  std::vector<std::filesystem::path> activations;
  std::optional<std::filesystem::path> image_embeddings;
  std::optional<std::filesystem::path> concept_embeddings;
  std::optional<std::filesystem::path> manifest;
  std::vector<ConceptSource> concept_sources;
  std::optional<std::filesystem::path> vocab;
  std::optional<std::filesystem::path> aoa;
  std::optional<std::filesystem::path> taxonomy;
  std::optional<std::filesystem::path> aliases;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> detected;
  std::optional<std::filesystem::path> trials;

  std::size_t n = 4;
  std::size_t trials_per_class = 5;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  SimilarityKind similarity = SimilarityKind::kCosine;
  SummaryKind summary = SummaryKind::kSpatialMean;
  std::size_t ensemble = 1;
  std::filesystem::path out = "out";

  std::vector<std::filesystem::path> cka_a;
  std::vector<std::filesystem::path> cka_b;
  SpatialReduction reduction = SpatialReduction::kSpatialMean;
  std::string probe_id = "probe";

  /// Canonical JSON of every field, used for the report fingerprint.
  nlohmann::ordered_json to_json() const;
  /// "fnv1a64:<hex>" of to_json().dump().
  std::string hash() const;
};

/// Reads a declarative JSON config; relative paths resolve against its directory.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// Each command validates its inputs before computing and writes its outputs
/// atomically under config.out. They throw neuroscope::Error subclasses.
void cmd_dissect(const RunConfig& config);
void cmd_classify(const RunConfig& config);
void cmd_cka(const RunConfig& config);
void cmd_stats(const RunConfig& config);
void cmd_export_fixtures(const std::filesystem::path& out_dir);

/// Full command-line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace neuroscope::cli
