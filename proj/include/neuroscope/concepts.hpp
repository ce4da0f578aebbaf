#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "neuroscope/tensor_store.hpp"

namespace neuroscope {

enum class SourceTag { kTrainingVocab, kCommonWords, kDatasetClasses };

std::string_view to_string(SourceTag tag);
SourceTag parse_source_tag(std::string_view text);

/// Lowercased, trimmed form used for every concept/class comparison.
std::string normalize_concept(std::string_view raw);

/// Ordered, deduplicated labeling vocabulary.
struct ConceptSet {
  std::vector<std::string> concepts;
  std::map<std::string, std::set<SourceTag>> source_tags;

  bool contains(std::string_view concept_name) const;
  std::size_t size() const { return concepts.size(); }

  bool operator==(const ConceptSet&) const = default;
};

struct ConceptSource {
  std::filesystem::path path;
  SourceTag tag;
};

/// Merges concept files (one concept per line, `#` comments ignored) in the
/// order given. Later duplicates only add their tag to the first occurrence.
ConceptSet build_concept_set(const std::vector<ConceptSource>& sources);

/// Same merge over in-memory lists; the file variant delegates here.
ConceptSet build_concept_set(const std::vector<std::pair<std::vector<std::string>, SourceTag>>& lists);

/// Writes one concept per line.
void write_concept_file(const ConceptSet& set, const std::filesystem::path& path);

/// class name -> canonical vocabulary word.
using AliasMap = std::map<std::string, std::string>;

AliasMap read_alias_map(const std::filesystem::path& path);

/// Disjoint split of a manifest's classes.
struct VocabPartition {
  std::set<std::string> in_vocab;
  std::set<std::string> out_of_vocab;
  std::set<std::string> undetected;

  std::size_t num_classes() const {
    return in_vocab.size() + out_of_vocab.size() + undetected.size();
  }

  bool operator==(const VocabPartition&) const = default;
};

/// Splits the manifest classes into detected-and-in-vocabulary,
/// detected-but-out-of-vocabulary, and undetected. A class counts as in
/// vocabulary when its normalized name, or its alias, is in `training_vocab`.
VocabPartition partition_classes(const ProbeManifest& manifest, const ConceptSet& training_vocab,
                                 const std::set<std::string>& detected,
                                 const AliasMap& aliases = {});

/// Fraction of classes that were detected.
double class_coverage(const VocabPartition& partition);

}  // namespace neuroscope
