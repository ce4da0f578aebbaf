#include "neuroscope/concepts.hpp"

#include <algorithm>

#include "neuroscope/error.hpp"
#include "neuroscope/io_util.hpp"

namespace neuroscope {

std::string_view to_string(SourceTag tag) {
  switch (tag) {
    case SourceTag::kTrainingVocab:
      return "training-vocab";
    case SourceTag::kCommonWords:
      return "common-words";
    case SourceTag::kDatasetClasses:
      return "dataset-classes";
  }
  return "unknown";
}

SourceTag parse_source_tag(std::string_view text) {
  if (text == "training-vocab") return SourceTag::kTrainingVocab;
  if (text == "common-words") return SourceTag::kCommonWords;
  if (text == "dataset-classes") return SourceTag::kDatasetClasses;
  throw InputError("unknown concept source tag '" + std::string(text) +
                   "' (expected training-vocab, common-words or dataset-classes)");
}

std::string normalize_concept(std::string_view raw) { return to_lower_ascii(trim(raw)); }

bool ConceptSet::contains(std::string_view concept_name) const {
  return source_tags.find(std::string(concept_name)) != source_tags.end();
}

ConceptSet build_concept_set(
    const std::vector<std::pair<std::vector<std::string>, SourceTag>>& lists) {
  ConceptSet set;
  for (const auto& [words, tag] : lists) {
    for (const auto& raw : words) {
      auto word = normalize_concept(raw);
      if (word.empty()) {
        continue;
      }
      auto [it, inserted] = set.source_tags.try_emplace(word);
      it->second.insert(tag);
      if (inserted) {
        set.concepts.push_back(std::move(word));
      }
    }
  }
  if (set.concepts.empty()) {
    throw InputError("concept set is empty after merging all sources");
  }
  return set;
}

ConceptSet build_concept_set(const std::vector<ConceptSource>& sources) {
  std::vector<std::pair<std::vector<std::string>, SourceTag>> lists;
  lists.reserve(sources.size());
  for (const auto& src : sources) {
    std::vector<std::string> words;
    for (auto& line : read_lines(src.path)) {
      const auto t = trim(line);
      if (t.empty() || t.front() == '#') {
        continue;
      }
      words.push_back(t);
    }
    lists.emplace_back(std::move(words), src.tag);
  }
  return build_concept_set(lists);
}

void write_concept_file(const ConceptSet& set, const std::filesystem::path& path) {
  std::string text;
  for (const auto& c : set.concepts) {
    text += c;
    text += '\n';
  }
  write_file_atomic(path, text);
}

AliasMap read_alias_map(const std::filesystem::path& path) {
  AliasMap aliases;
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    for (const auto& [cls, word] : j.items()) {
      aliases.emplace(normalize_concept(cls), normalize_concept(word.get<std::string>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("alias map '" + path.string() + "': " + e.what());
  }
  return aliases;
}

VocabPartition partition_classes(const ProbeManifest& manifest, const ConceptSet& training_vocab,
                                 const std::set<std::string>& detected, const AliasMap& aliases) {
  for (const auto& cls : detected) {
    if (!manifest.has_class(cls)) {
      throw InputError("detected class '" + cls + "' is not in the probe manifest");
    }
  }
  VocabPartition p;
  for (const auto& cls : manifest.class_list) {
    if (!detected.contains(cls)) {
      p.undetected.insert(cls);
      continue;
    }
    const auto key = normalize_concept(cls);
    bool in_vocab = training_vocab.contains(key);
    if (!in_vocab) {
      if (auto it = aliases.find(key); it != aliases.end()) {
        in_vocab = training_vocab.contains(it->second);
      }
    }
    (in_vocab ? p.in_vocab : p.out_of_vocab).insert(cls);
  }
  return p;
}

double class_coverage(const VocabPartition& partition) {
  const auto total = partition.num_classes();
  if (total == 0) {
    throw InputError("class coverage is undefined for an empty class list");
  }
  return static_cast<double>(partition.in_vocab.size() + partition.out_of_vocab.size()) /
         static_cast<double>(total);
}

}  // namespace neuroscope
