#include "neuroscope/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "neuroscope/appendix_fixtures.hpp"
#include "neuroscope/classifier.hpp"
#include "neuroscope/cogstats.hpp"
#include "neuroscope/error.hpp"
#include "neuroscope/io_util.hpp"
#include "neuroscope/rng.hpp"
#include "neuroscope/synthetic.hpp"
#include "neuroscope/tensor_store.hpp"
#include "neuroscope/trials.hpp"

namespace neuroscope::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

ojson opt_path(const std::optional<fs::path>& p) { return p ? ojson(p->string()) : ojson(nullptr); }

std::vector<std::string> path_strings(const std::vector<fs::path>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) out.push_back(p.string());
  return out;
}

void require_file(const std::optional<fs::path>& p, const char* what) {
  if (!p) {
    throw InputError(std::string("missing required input: ") + what);
  }
  if (!fs::is_regular_file(*p)) {
    throw InputError(std::string(what) + " not found: '" + p->string() + "'");
  }
}

void require_files(const std::vector<fs::path>& paths, const char* what) {
  if (paths.empty()) {
    throw InputError(std::string("missing required input: ") + what);
  }
  for (const auto& p : paths) {
    require_file(p, what);
  }
}

void check_optional(const std::optional<fs::path>& p, const char* what) {
  if (p) {
    require_file(p, what);
  }
}

/// Re-raises a module error with the file it came from.
template <typename F>
auto with_file(const fs::path& path, F&& load) {
  try {
    return load(path);
  } catch (const FormatError& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  } catch (const CorruptionError& e) {
    throw CorruptionError("'" + path.string() + "': " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError("'" + path.string() + "': " + e.what());
  }
}

std::vector<ActivationTensor> load_layers(const RunConfig& c) {
  std::vector<ActivationTensor> layers;
  std::set<std::string> seen;
  for (const auto& p : c.activations) {
    layers.push_back(with_file(p, [](const fs::path& q) { return read_activation_tensor(q); }));
    if (!seen.insert(layers.back().layer_id).second) {
      throw InputError("layer '" + layers.back().layer_id + "' appears in more than one activation file");
    }
  }
  return layers;
}

ConceptSet load_vocab(const fs::path& path) {
  return build_concept_set(std::vector<ConceptSource>{{path, SourceTag::kTrainingVocab}});
}

std::set<std::string> read_class_list(const fs::path& path) {
  std::set<std::string> out;
  for (const auto& line : read_lines(path)) {
    const auto t = trim(line);
    if (!t.empty() && t.front() != '#') out.insert(t);
  }
  return out;
}

void write_json(const fs::path& path, const ojson& j) { write_file_atomic(path, j.dump(2) + "\n"); }

ojson venn_json(const VocabPartition& p) {
  ojson j;
  j["in_vocab"] = p.in_vocab.size();
  j["out_of_vocab"] = p.out_of_vocab.size();
  j["undetected"] = p.undetected.size();
  j["in_vocab_classes"] = p.in_vocab;
  j["out_of_vocab_classes"] = p.out_of_vocab;
  j["undetected_classes"] = p.undetected;
  return j;
}

std::vector<NeuronLabel> dissect_layers(const RunConfig& c, const std::vector<ActivationTensor>& layers) {
  const auto images = with_file(*c.image_embeddings, [](const fs::path& q) { return read_embedding_matrix(q); });
  const auto concepts = with_file(*c.concept_embeddings, [](const fs::path& q) { return read_embedding_matrix(q); });
  if (!c.concept_sources.empty()) {
    const auto set = build_concept_set(c.concept_sources);
    std::set<std::string> expected(set.concepts.begin(), set.concepts.end());
    for (const auto& id : concepts.item_ids) {
      if (!expected.contains(id)) {
        throw InputError("concept '" + id + "' in '" + c.concept_embeddings->string() +
                         "' is not in the configured concept sources");
      }
    }
    if (expected.size() != concepts.item_ids.size()) {
      throw InputError("concept embeddings cover " + std::to_string(concepts.item_ids.size()) +
                       " concepts but the concept sources define " + std::to_string(expected.size()));
    }
  }
  const auto p = concept_activation_matrix(images, concepts);
  std::vector<NeuronLabel> labels;
  for (const auto& t : layers) {
    auto layer_labels = label_neurons(t, p, c.similarity, c.summary);
    labels.insert(labels.end(), layer_labels.begin(), layer_labels.end());
  }
  return labels;
}

void validate_dissect(const RunConfig& c) {
  require_files(c.activations, "activation file");
  require_file(c.image_embeddings, "image embedding file");
  require_file(c.concept_embeddings, "concept embedding file");
  for (const auto& s : c.concept_sources) require_file(s.path, "concept source");
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig

ojson RunConfig::to_json() const {
  ojson j;
  j["activations"] = path_strings(activations);
  j["image_embeddings"] = opt_path(image_embeddings);
  j["concept_embeddings"] = opt_path(concept_embeddings);
  j["manifest"] = opt_path(manifest);
  j["concept_sources"] = ojson::array();
  for (const auto& s : concept_sources) {
    j["concept_sources"].push_back({{"path", s.path.string()}, {"tag", to_string(s.tag)}});
  }
  j["vocab"] = opt_path(vocab);
  j["aoa"] = opt_path(aoa);
  j["taxonomy"] = opt_path(taxonomy);
  j["aliases"] = opt_path(aliases);
  j["labels"] = opt_path(labels);
  j["detected"] = opt_path(detected);
  j["trials"] = opt_path(trials);
  j["n"] = n;
  j["trials_per_class"] = trials_per_class;
  j["seeds"] = seeds;
  j["similarity"] = to_string(similarity);
  j["summary"] = to_string(summary);
  j["ensemble"] = ensemble;
  j["out"] = out.string();
  j["cka"] = {{"a", path_strings(cka_a)},
              {"b", path_strings(cka_b)},
              {"reduction", to_string(reduction)},
              {"probe_id", probe_id}};
  return j;
}

std::string RunConfig::hash() const { return "fnv1a64:" + hex64(fnv1a64(to_json().dump())); }

RunConfig config_from_json(const nlohmann::json& j, const fs::path& base) {
  RunConfig c;
  try {
    auto path_of = [&](const char* key) -> std::optional<fs::path> {
      if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
      return resolve(base, j.at(key).get<std::string>());
    };
    auto paths_of = [&](const nlohmann::json& v) {
      std::vector<fs::path> out;
      if (v.is_string()) {
        out.push_back(resolve(base, v.get<std::string>()));
      } else {
        for (const auto& p : v) out.push_back(resolve(base, p.get<std::string>()));
      }
      return out;
    };
    if (j.contains("activations")) c.activations = paths_of(j.at("activations"));
    c.image_embeddings = path_of("image_embeddings");
    c.concept_embeddings = path_of("concept_embeddings");
    c.manifest = path_of("manifest");
    if (j.contains("concept_sources")) {
      for (const auto& s : j.at("concept_sources")) {
        c.concept_sources.push_back(
            {resolve(base, s.at("path").get<std::string>()), parse_source_tag(s.at("tag").get<std::string>())});
      }
    }
    c.vocab = path_of("vocab");
    c.aoa = path_of("aoa");
    c.taxonomy = path_of("taxonomy");
    c.aliases = path_of("aliases");
    c.labels = path_of("labels");
    c.detected = path_of("detected");
    c.trials = path_of("trials");
    c.n = j.value("n", c.n);
    c.trials_per_class = j.value("trials_per_class", c.trials_per_class);
    c.seeds = j.value("seeds", c.seeds);
    if (j.contains("similarity")) c.similarity = parse_similarity_kind(j.at("similarity").get<std::string>());
    if (j.contains("summary")) c.summary = parse_summary_kind(j.at("summary").get<std::string>());
    c.ensemble = j.value("ensemble", c.ensemble);
    if (j.contains("out")) c.out = resolve(base, j.at("out").get<std::string>());
    if (j.contains("cka")) {
      const auto& k = j.at("cka");
      if (k.contains("a")) c.cka_a = paths_of(k.at("a"));
      if (k.contains("b")) c.cka_b = paths_of(k.at("b"));
      if (k.contains("reduction")) c.reduction = parse_spatial_reduction(k.at("reduction").get<std::string>());
      c.probe_id = k.value("probe_id", c.probe_id);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    throw InputError("config file not found: '" + path.string() + "'");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("config '" + path.string() + "': " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

// ---------------------------------------------------------------------------
// Commands

void cmd_dissect(const RunConfig& c) {
  validate_dissect(c);
  const auto layers = load_layers(c);
  const auto labels = dissect_layers(c, layers);

  fs::create_directories(c.out);
  write_labels(labels, c.out / "labels.jsonl");

  std::map<std::string, std::size_t> per_concept;
  std::size_t dead = 0;
  ojson layer_summary = ojson::array();
  for (const auto& t : layers) {
    std::size_t layer_dead = 0;
    for (const auto& l : labels) {
      if (l.neuron.layer_id == t.layer_id && l.is_dead()) ++layer_dead;
    }
    layer_summary.push_back({{"layer", t.layer_id}, {"neurons", t.num_neurons()}, {"dead", layer_dead}});
  }
  for (const auto& l : labels) {
    if (l.is_dead()) {
      ++dead;
    } else {
      ++per_concept[l.concept_name];
    }
  }
  ojson summary;
  summary["config_hash"] = c.hash();
  summary["similarity_kind"] = to_string(c.similarity);
  summary["summary_kind"] = to_string(c.summary);
  summary["neurons"] = labels.size();
  summary["dead"] = dead;
  summary["layers"] = layer_summary;
  summary["per_concept"] = per_concept;
  write_json(c.out / "dissect_summary.json", summary);
}

void cmd_classify(const RunConfig& c) {
  require_files(c.activations, "activation file");
  require_file(c.manifest, "probe manifest");
  require_file(c.vocab, "training vocabulary");
  check_optional(c.aliases, "alias map");
  check_optional(c.trials, "trial set");
  const bool have_labels = c.labels && fs::is_regular_file(*c.labels);
  if (!have_labels) {
    validate_dissect(c);
  }
  if (c.n < 2) throw InputError("n must be at least 2");
  if (c.seeds.empty()) throw InputError("at least one seed is required");
  if (c.ensemble < 1) throw InputError("ensemble size must be at least 1");

  const auto layers = load_layers(c);
  const auto manifest = with_file(*c.manifest, [](const fs::path& q) { return read_manifest(q); });
  const auto vocab = load_vocab(*c.vocab);
  const auto aliases = c.aliases ? read_alias_map(*c.aliases) : AliasMap{};
  for (const auto& t : layers) {
    for (const auto& id : t.image_ids) {
      if (!manifest.class_of.contains(id)) {
        throw InputError("image '" + id + "' of layer '" + t.layer_id + "' is not in the probe manifest");
      }
    }
  }

  std::vector<NeuronLabel> labels;
  fs::create_directories(c.out);
  if (have_labels) {
    labels = with_file(*c.labels, [](const fs::path& q) { return read_labels(q); });
  } else {
    labels = dissect_layers(c, layers);
    write_labels(labels, c.out / "labels.jsonl");
  }

  const auto index = build_index(labels);
  const auto detected = detected_classes(index, manifest);
  const auto partition = partition_classes(manifest, vocab, detected, aliases);

  TrialSet all_trials;
  std::optional<TrialSet> pinned;
  if (c.trials) {
    pinned = with_file(*c.trials, [](const fs::path& q) { return read_trials(q); });
  }
  // Pinned trials may target classes this model never detected; those are
  // reported, not classified.
  std::set<std::string> skipped_classes;
  std::size_t skipped_trials = 0;
  for (std::uint64_t seed : c.seeds) {
    if (pinned) {
      for (const auto& t : pinned->trials) {
        if (t.seed != seed) continue;
        if (!detected.contains(t.target_class)) {
          skipped_classes.insert(t.target_class);
          ++skipped_trials;
          continue;
        }
        all_trials.trials.push_back(t);
      }
    } else {
      if (c.n > detected.size()) {
        throw InputError("n=" + std::to_string(c.n) + " exceeds the " + std::to_string(detected.size()) +
                         " detected classes; the maximum feasible n is " + std::to_string(detected.size()));
      }
      auto set = generate_trials(manifest, detected, c.n, c.trials_per_class, seed);
      all_trials.trials.insert(all_trials.trials.end(), set.trials.begin(), set.trials.end());
    }
  }

  ClassifyOptions options{c.summary, c.ensemble};
  std::vector<TrialPrediction> predictions(all_trials.trials.size());
  parallel_for(predictions.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      predictions[i] = classify_trial(index, layers, all_trials.trials[i], manifest, options);
    }
  });
  const auto reports = score(predictions, partition, c.seeds);

  write_trials(all_trials, c.out / "trials.jsonl");
  write_file_atomic(c.out / "predictions.jsonl", predictions_to_jsonl(predictions));

  ojson report;
  report["config_hash"] = c.hash();
  report["n"] = c.n;
  report["trials_per_class"] = c.trials_per_class;
  report["seeds"] = c.seeds;
  report["rng"] = CounterRng::kName;
  report["similarity_kind"] = to_string(c.similarity);
  report["summary_kind"] = to_string(c.summary);
  report["ensemble"] = c.ensemble;
  report["std_ddof"] = 1;
  report["coverage"] = class_coverage(partition);
  report["venn"] = venn_json(partition);
  report["trials_source"] = pinned ? "pinned" : "generated";
  report["skipped_undetected"] = {{"trials", skipped_trials}, {"classes", skipped_classes}};
  report["reports"] = ojson::array();
  for (const auto& r : reports) report["reports"].push_back(report_to_json(r));
  write_json(c.out / "report.json", report);
  write_file_atomic(c.out / "report.csv", reports_to_csv(reports));
  write_json(c.out / "venn.json", venn_json(partition));
}

void cmd_cka(const RunConfig& c) {
  require_files(c.cka_a, "CKA model A activation file");
  require_files(c.cka_b, "CKA model B activation file");
  auto load = [&](const std::vector<fs::path>& paths) {
    std::vector<FeatureMatrix> out;
    for (const auto& p : paths) {
      const auto t = with_file(p, [](const fs::path& q) { return read_activation_tensor(q); });
      out.push_back(to_feature_matrix(t, c.reduction));
    }
    return out;
  };
  const auto a = load(c.cka_a);
  const auto b = load(c.cka_b);
  const auto m = cka_matrix(a, b);

  fs::create_directories(c.out);
  write_file_atomic(c.out / "cka.csv", cka_to_csv(m));
  write_file_atomic(c.out / "cka_long.csv", cka_to_long_csv(m));
  ojson meta;
  meta["config_hash"] = c.hash();
  meta["probe_id"] = c.probe_id;
  meta["reduction"] = to_string(c.reduction);
  meta["n"] = a.empty() ? 0 : a.front().x.rows();
  meta["model_a"] = a.empty() ? "" : a.front().model_id;
  meta["model_b"] = b.empty() ? "" : b.front().model_id;
  meta["rows"] = m.rows;
  meta["cols"] = m.cols;
  write_json(c.out / "cka.json", meta);
}

void cmd_stats(const RunConfig& c) {
  require_file(c.manifest, "probe manifest");
  require_file(c.vocab, "training vocabulary");
  require_file(c.aoa, "AoA table");
  check_optional(c.aliases, "alias map");
  check_optional(c.taxonomy, "taxonomy");
  if (!c.labels && !c.detected) {
    throw InputError("stats needs either labels or a detected-class list");
  }
  check_optional(c.labels, "label file");
  check_optional(c.detected, "detected-class list");

  const auto manifest = with_file(*c.manifest, [](const fs::path& q) { return read_manifest(q); });
  const auto vocab = load_vocab(*c.vocab);
  const auto aliases = c.aliases ? read_alias_map(*c.aliases) : AliasMap{};
  const auto table = with_file(*c.aoa, [](const fs::path& q) { return read_aoa_csv(q); });
  std::vector<NeuronLabel> labels;
  std::set<std::string> detected;
  if (c.labels) {
    labels = with_file(*c.labels, [](const fs::path& q) { return read_labels(q); });
    detected = detected_classes(build_index(labels), manifest);
  } else {
    detected = read_class_list(*c.detected);
  }
  const auto partition = partition_classes(manifest, vocab, detected, aliases);

  const auto join_in = join_aoa(partition.in_vocab, table);
  const auto join_out = join_aoa(partition.out_of_vocab, table);
  std::vector<double> in_values;
  std::vector<double> out_values;
  for (const auto& [cls, v] : join_in.matched) in_values.push_back(v);
  for (const auto& [cls, v] : join_out.matched) out_values.push_back(v);

  ojson stats;
  stats["config_hash"] = c.hash();
  stats["num_classes"] = manifest.class_list.size();
  stats["coverage"] = class_coverage(partition);
  stats["venn"] = venn_json(partition);
  ojson aoa;
  aoa["matched_in"] = in_values.size();
  aoa["matched_out"] = out_values.size();
  std::set<std::string> missing = join_in.missing;
  missing.insert(join_out.missing.begin(), join_out.missing.end());
  aoa["missing"] = missing;
  if (in_values.size() >= 2 && out_values.size() >= 2) {
    aoa["ttests"] = ojson::array();
    for (auto variant : {TTestVariant::kPooled, TTestVariant::kWelch}) {
      aoa["ttests"].push_back(ttest_report(two_sample_ttest(out_values, in_values, variant)));
    }
  } else {
    aoa["ttests"] = nullptr;
    aoa["ttest_skipped"] = "fewer than two matched classes in a bucket";
  }
  stats["aoa"] = aoa;

  fs::create_directories(c.out);
  std::ostringstream long_csv;
  long_csv.precision(17);
  long_csv << "class,bucket,aoa\n";
  for (const auto& [cls, v] : join_in.matched) long_csv << cls << ",in-vocab," << v << '\n';
  for (const auto& [cls, v] : join_out.matched) long_csv << cls << ",out-of-vocab," << v << '\n';
  write_file_atomic(c.out / "aoa_long.csv", long_csv.str());

  std::ostringstream cov;
  cov.precision(17);
  cov << "metric,value\n"
      << "coverage," << class_coverage(partition) << '\n'
      << "in_vocab," << partition.in_vocab.size() << '\n'
      << "out_of_vocab," << partition.out_of_vocab.size() << '\n'
      << "undetected," << partition.undetected.size() << '\n';
  write_file_atomic(c.out / "coverage.csv", cov.str());

  if (c.taxonomy && !labels.empty()) {
    std::map<std::string, std::vector<NeuronLabel>> per_layer;
    for (const auto& l : labels) per_layer[l.neuron.layer_id].push_back(l);
    write_file_atomic(c.out / "census.csv", census_to_csv(concept_census(per_layer, read_taxonomy(*c.taxonomy))));
  }
  write_json(c.out / "stats.json", stats);
}

void cmd_export_fixtures(const fs::path& out_dir) {
  write_appendix_fixtures(out_dir / "appendix");
  write_synthetic_bundle(make_synthetic_bundle(SyntheticSpec{}), out_dir / "planted");
  SyntheticSpec noise;
  noise.noise_only = true;
  write_synthetic_bundle(make_synthetic_bundle(noise), out_dir / "noise");
}

// ---------------------------------------------------------------------------
// Entry point

namespace {

struct Overrides {
  std::string config;
  std::vector<std::string> activations;
  std::string image_embeddings;
  std::string concept_embeddings;
  std::string manifest;
  std::string vocab;
  std::string aoa;
  std::string taxonomy;
  std::string aliases;
  std::string labels;
  std::string detected;
  std::string trials;
  std::optional<std::size_t> n;
  std::optional<std::size_t> trials_per_class;
  std::optional<std::size_t> ensemble;
  std::string seeds;
  std::string similarity;
  std::string summary;
  std::string out;
  std::vector<std::string> cka_a;
  std::vector<std::string> cka_b;
  std::string reduction;
  std::string probe_id;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--out", o.out, "output directory");
}

void add_pipeline(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--activations", o.activations, ".nact activation files (one per layer)");
  cmd->add_option("--image-emb", o.image_embeddings, ".nemb probe image embeddings");
  cmd->add_option("--concept-emb", o.concept_embeddings, ".nemb concept embeddings");
  cmd->add_option("--similarity", o.similarity, "cosine | rank-wpmi")
      ->check(CLI::IsMember({"cosine", "rank-wpmi"}));
  cmd->add_option("--summary", o.summary, "mean | max")->check(CLI::IsMember({"mean", "max", "identity"}));
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto t = trim(item);
    if (t.empty()) continue;
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(t, &used));
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::exception&) {
      throw InputError("invalid seed '" + t + "'");
    }
  }
  if (seeds.empty()) throw InputError("--seeds must list at least one seed");
  return seeds;
}

RunConfig effective_config(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  auto set_path = [](std::optional<fs::path>& dst, const std::string& v) {
    if (!v.empty()) dst = fs::path(v);
  };
  if (!o.activations.empty()) {
    c.activations.assign(o.activations.begin(), o.activations.end());
  }
  set_path(c.image_embeddings, o.image_embeddings);
  set_path(c.concept_embeddings, o.concept_embeddings);
  set_path(c.manifest, o.manifest);
  set_path(c.vocab, o.vocab);
  set_path(c.aoa, o.aoa);
  set_path(c.taxonomy, o.taxonomy);
  set_path(c.aliases, o.aliases);
  set_path(c.labels, o.labels);
  set_path(c.detected, o.detected);
  set_path(c.trials, o.trials);
  if (o.n) c.n = *o.n;
  if (o.trials_per_class) c.trials_per_class = *o.trials_per_class;
  if (o.ensemble) c.ensemble = *o.ensemble;
  if (!o.seeds.empty()) c.seeds = parse_seeds(o.seeds);
  if (!o.similarity.empty()) c.similarity = parse_similarity_kind(o.similarity);
  if (!o.summary.empty()) c.summary = parse_summary_kind(o.summary);
  if (!o.out.empty()) c.out = o.out;
  if (!o.cka_a.empty()) c.cka_a.assign(o.cka_a.begin(), o.cka_a.end());
  if (!o.cka_b.empty()) c.cka_b.assign(o.cka_b.begin(), o.cka_b.end());
  if (!o.reduction.empty()) c.reduction = parse_spatial_reduction(o.reduction);
  if (!o.probe_id.empty()) c.probe_id = o.probe_id;
  return c;
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const ComputationError*>(&e) || dynamic_cast<const ConceptNotDetected*>(&e)) {
    return kExitComputation;
  }
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
      dynamic_cast<const CorruptionError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
      dynamic_cast<const InputError*>(&e)) {
    return kExitInput;
  }
  return kExitComputation;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"neuroscope: concept-neuron discovery, neuron-based n-way classification and "
               "representation statistics"};
  app.require_subcommand(1);
  Overrides o;
  std::string fixtures_out = "fixtures";

  auto* dissect = app.add_subcommand("dissect", "label every neuron with its best-matching concept");
  add_common(dissect, o);
  add_pipeline(dissect, o);

  auto* classify = app.add_subcommand("classify", "run neuron-based n-way trials and score them");
  add_common(classify, o);
  add_pipeline(classify, o);
  classify->add_option("--manifest", o.manifest, "probe manifest JSON");
  classify->add_option("--vocab", o.vocab, "training vocabulary (one word per line)");
  classify->add_option("--aliases", o.aliases, "class alias map JSON");
  classify->add_option("--labels", o.labels, "labels.jsonl from a previous dissect run");
  classify->add_option("--trials", o.trials, "pinned trials.jsonl");
  classify->add_option("--n", o.n, "images per trial");
  classify->add_option("--trials-per-class", o.trials_per_class, "trials per class and seed");
  classify->add_option("--seeds", o.seeds, "comma-separated seeds");
  classify->add_option("--ensemble", o.ensemble, "neurons averaged per concept (default 1)");

  auto* cka = app.add_subcommand("cka", "layer-by-layer linear CKA between two models");
  add_common(cka, o);
  cka->add_option("--a", o.cka_a, ".nact layers of model A");
  cka->add_option("--b", o.cka_b, ".nact layers of model B");
  cka->add_option("--reduction", o.reduction, "mean | flatten")->check(CLI::IsMember({"mean", "flatten"}));
  cka->add_option("--probe-id", o.probe_id, "probe set name recorded in metadata");

  auto* stats = app.add_subcommand("stats", "class coverage and AoA comparison");
  add_common(stats, o);
  stats->add_option("--manifest", o.manifest, "probe manifest JSON");
  stats->add_option("--vocab", o.vocab, "training vocabulary");
  stats->add_option("--aliases", o.aliases, "class alias map JSON");
  stats->add_option("--labels", o.labels, "labels.jsonl");
  stats->add_option("--detected", o.detected, "detected classes, one per line");
  stats->add_option("--aoa", o.aoa, "AoA CSV (word,aoa[,alias_of])");
  stats->add_option("--taxonomy", o.taxonomy, "concept category taxonomy JSON");

  auto* fixtures = app.add_subcommand("export-fixtures", "write bundled and synthetic fixtures");
  fixtures->add_option("--out", fixtures_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (fixtures->parsed()) {
      cmd_export_fixtures(fixtures_out);
      return kExitOk;
    }
    const RunConfig config = effective_config(o);
    if (dissect->parsed()) cmd_dissect(config);
    if (classify->parsed()) cmd_classify(config);
    if (cka->parsed()) cmd_cka(config);
    if (stats->parsed()) cmd_stats(config);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitComputation;
  }
  return kExitOk;
}

}  // namespace neuroscope::cli
