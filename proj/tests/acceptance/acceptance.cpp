// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion, exit 1 if any fails
//   acceptance 3          run criterion 3 only

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include "neuroscope/classifier.hpp"
#include "neuroscope/cli.hpp"
#include "neuroscope/error.hpp"
#include "neuroscope/io_util.hpp"
#include "neuroscope/repr_analysis.hpp"
#include "neuroscope/synthetic.hpp"
#include "neuroscope/tensor_store.hpp"
#include "neuroscope/trials.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace neuroscope;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[fail: " << what << "] ";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_file(p)); }

// 1. AoA statistics from the bundled appendix tables.
void aoa_reproduction(Outcome& o) {
  test::TempDir dir;
  cli::cmd_export_fixtures(dir.path());
  const auto start = std::chrono::steady_clock::now();
  auto config = cli::load_config(dir / "appendix" / "config.json");
  cli::cmd_stats(config);
  const double elapsed = seconds_since(start);
  const auto stats = read_json(config.out / "stats.json");
  const auto& tests = stats["aoa"]["ttests"];
  const double mean_in = tests[0]["mean_in"];
  const double mean_out = tests[0]["mean_out"];
  const double t_pooled = tests[0]["t"];
  const double t_welch = tests[1]["t"];
  o.detail << "mean_in=" << mean_in << " mean_out=" << mean_out << " t_pooled=" << t_pooled
           << " (df " << tests[0]["df"].get<double>() << ") t_welch=" << t_welch << " (df "
           << tests[1]["df"].get<double>() << ") runtime=" << elapsed << "s ";
  o.check(std::abs(mean_in - 4.99) <= 0.05, "in-vocab mean 4.99+-0.05");
  o.check(std::abs(mean_out - 6.82) <= 0.05, "out-of-vocab mean 6.82+-0.05");
  o.check(std::abs(std::abs(t_pooled) - 4.64) <= 0.5 || std::abs(std::abs(t_welch) - 4.64) <= 0.5,
          "|t| within 0.5 of 4.64");
  o.check(elapsed < 1.0, "runtime < 1 s");
}

struct PipelineResult {
  double accuracy = 0.0;
  double coverage = 0.0;
  std::size_t trials = 0;
  std::vector<NeuronLabel> labels;
  SyntheticBundle bundle;
  cli::RunConfig config;
};

PipelineResult run_pipeline(const SyntheticSpec& spec, const fs::path& dir) {
  PipelineResult r;
  r.bundle = make_synthetic_bundle(spec);
  write_synthetic_bundle(r.bundle, dir);
  r.config = cli::load_config(dir / "config.json");
  cli::cmd_classify(r.config);
  const auto report = read_json(r.config.out / "report.json");
  r.accuracy = report["reports"][2]["mean"];
  r.trials = report["reports"][2]["num_trials"];
  r.coverage = report["coverage"];
  r.labels = read_labels(r.config.out / "labels.jsonl");
  return r;
}

// 2. Planted neuron/concept pairs are recovered and classify well.
void planted_recovery(Outcome& o) {
  test::TempDir dir;
  const auto start = std::chrono::steady_clock::now();
  const auto r = run_pipeline(SyntheticSpec{}, dir.path());
  const double elapsed = seconds_since(start);
  std::size_t recovered = 0;
  for (const auto& [unit, concept_name] : r.bundle.planted) {
    recovered += r.labels.at(unit).concept_name == concept_name;
  }
  o.detail << "recovered=" << recovered << "/" << r.bundle.planted.size() << " accuracy(n=4, 5 seeds)="
           << r.accuracy << " runtime=" << elapsed << "s ";
  o.check(r.bundle.planted.size() == 40, "40 planted pairs");
  o.check(recovered >= 39, ">= 39/40 labels recovered");
  o.check(r.accuracy >= 0.95, "accuracy >= 0.95");
  o.check(elapsed < 10.0, "runtime < 10 s");
}

// 3. Pure-noise activations through the same pipeline.
void chance_floor(Outcome& o) {
  test::TempDir dir;
  const auto planted = run_pipeline(SyntheticSpec{}, dir / "planted");
  const auto start = std::chrono::steady_clock::now();
  SyntheticSpec spec;
  spec.noise_only = true;
  const auto noise = run_pipeline(spec, dir / "noise");
  const double elapsed = seconds_since(start);
  const double se = std::sqrt(0.25 * 0.75 / static_cast<double>(noise.trials));

  // Diagnostic: the same labels scored on activations drawn independently of
  // the labeling pass.
  auto fresh = noise.bundle.activations;
  std::mt19937_64 rng(2024);
  std::normal_distribution<float> normal(1.0f, 2.0f);
  for (auto& v : fresh.values) v = normal(rng);
  const auto index = build_index(noise.labels);
  const auto detected = detected_classes(index, noise.bundle.manifest);
  std::size_t correct = 0, total = 0;
  for (std::uint64_t seed : noise.config.seeds) {
    for (const auto& t : generate_trials(noise.bundle.manifest, detected, 4, 5, seed).trials) {
      correct += classify_trial(index, fresh, t, noise.bundle.manifest).correct;
      ++total;
    }
  }
  const double independent = static_cast<double>(correct) / static_cast<double>(total);

  o.detail << "noise accuracy=" << noise.accuracy << " (chance 0.25, 3SE=" << 3 * se << ", trials="
           << noise.trials << ") coverage noise/planted=" << noise.coverage << "/" << planted.coverage
           << " ratio=" << noise.coverage / planted.coverage << " independent-draw accuracy=" << independent
           << " runtime=" << elapsed << "s ";
  o.check(std::abs(noise.accuracy - 0.25) <= 3 * se, "accuracy within 3 SE of 0.25");
  o.check(noise.coverage < 0.15 * planted.coverage, "coverage < 15% of planted");
  o.check(elapsed < 10.0, "runtime < 10 s");
}

// 4. Labels and trial choices equal exhaustive loop oracles.
void brute_force_oracles(Outcome& o) {
  std::mt19937_64 rng(4444);
  std::size_t label_checks = 0, trial_checks = 0, mismatches = 0;
  for (int instance = 0; instance < 100; ++instance) {
    const std::size_t n = 4 + rng() % 5;  // 4..8
    const std::size_t k = 1 + rng() % 6;
    const std::size_t m = 2 + rng() % 6;  // 2..7
    const std::size_t dim = 3 + rng() % 6;
    const auto images = test::random_unit_rows(rng, "img", n, dim);
    const auto concepts = test::random_unit_rows(rng, "c", m, dim);
    const auto p = concept_activation_matrix(images, concepts);
    std::vector<std::vector<double>> prow(n, std::vector<double>(m));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) prow[i][j] = p.at(i, j);
    }
    auto t = test::random_tensor(rng, {n, k, 2, 2}, images.item_ids);
    if (instance % 5 == 0) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t s = 0; s < 4; ++s) t.values[(i * k) * 4 + s] = 0.5f;
      }
    }
    // Images cycle over the concepts as classes so trials can target them.
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(images.item_ids[i], concepts.item_ids[i % m]);
    const auto manifest = ProbeManifest::from_images("oracle", pairs);

    for (bool wpmi : {false, true}) {
      for (bool use_max : {false, true}) {
        const auto summary = use_max ? SummaryKind::kSpatialMax : SummaryKind::kSpatialMean;
        const auto got = label_neurons(t, p, wpmi ? SimilarityKind::kRankWpmi : SimilarityKind::kCosine, summary);
        const auto want = oracle::label(t, prow, p.concepts, wpmi, use_max);
        for (std::size_t u = 0; u < k; ++u) {
          ++label_checks;
          const bool same = got[u].is_dead() == want[u].dead && got[u].concept_name == want[u].concept_name &&
                            (want[u].dead || std::abs(got[u].score - want[u].score) <= 1e-9);
          mismatches += !same;
        }
        const auto index = build_index(got);
        const auto detected = detected_classes(index, manifest);
        if (detected.size() < 2) continue;
        const auto trials = generate_trials(manifest, detected, 2 + rng() % (detected.size() - 1), 2, rng());
        for (const auto& trial : trials.trials) {
          ++trial_checks;
          const auto pred = classify_trial(index, t, trial, manifest, {summary, 1});
          const auto images_shown = trial.images();
          // Oracle: the best neuron is the highest-scoring unit with this label, lowest unit on ties.
          std::size_t best_unit = k;
          for (std::size_t u = 0; u < k; ++u) {
            if (want[u].dead || want[u].concept_name != trial.target_class) continue;
            if (best_unit == k || want[u].score > want[best_unit].score) best_unit = u;
          }
          const bool same = best_unit < k && pred.neuron.unit == best_unit &&
                            pred.chosen == images_shown[oracle::classify(t, best_unit, images_shown, use_max)];
          mismatches += !same;
        }
      }
    }
  }
  o.detail << "instances=100 label_checks=" << label_checks << " trial_checks=" << trial_checks
           << " mismatches=" << mismatches << " ";
  o.check(mismatches == 0, "zero mismatches");
  o.check(trial_checks > 0, "trials exercised");
}

// 5. CKA identities, invariances, oracle agreement and range.
void cka_suite(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(5555);
  std::normal_distribution<double> normal;
  auto random = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd x(r, c);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    return x;
  };
  double self_err = 0, inv_err = 0, oracle_err = 0, range_excess = 0, min_value = 1;
  for (int i = 0; i < 50; ++i) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng() % 60);
    const auto x = random(n, 1 + static_cast<Eigen::Index>(rng() % 12));
    const auto y = random(n, 1 + static_cast<Eigen::Index>(rng() % 12));
    self_err = std::max(self_err, std::abs(linear_cka(x, x) - 1.0));
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(random(x.cols(), x.cols())).householderQ();
    const double base = linear_cka(x, y);
    inv_err = std::max(inv_err, std::abs(linear_cka(x * q, y) - base));
    inv_err = std::max(inv_err, std::abs(linear_cka(3.7 * x, y) - base));
    inv_err = std::max(inv_err, std::abs(linear_cka(x * q, x) - 1.0));
    oracle_err = std::max(oracle_err, std::abs(base - oracle::cka_hsic(x, y)));
  }
  for (int i = 0; i < 500; ++i) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 30);
    auto x = random(n, 1 + static_cast<Eigen::Index>(rng() % 40));
    auto y = random(n, 1 + static_cast<Eigen::Index>(rng() % 40));
    if (i % 4 == 0) y.col(0) = 1e8 * x.col(0);
    if (i % 4 == 1) x *= 1e-6;
    const double c = linear_cka(x, y);
    range_excess = std::max(range_excess, c - 1.0);
    min_value = std::min(min_value, c);
  }
  const double elapsed = seconds_since(start);
  o.detail << "max|cka(X,X)-1|=" << self_err << " max invariance err=" << inv_err << " max oracle err="
           << oracle_err << " max excess over 1=" << range_excess << " min=" << min_value
           << " runtime=" << elapsed << "s ";
  o.check(self_err <= 1e-8, "self-similarity within 1e-8");
  o.check(inv_err <= 1e-6, "invariance within 1e-6");
  o.check(oracle_err <= 1e-6, "feature form equals Gram/HSIC within 1e-6");
  o.check(range_excess <= 1e-8 && min_value >= 0.0, "range [0, 1+1e-8]");
  o.check(elapsed < 5.0, "runtime < 5 s");
}

// 6. Trial protocol: determinism, the n ceiling, one target image.
void protocol_constraints(Outcome& o) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int c = 0; c < 31; ++c) {
    for (int i = 0; i < 3; ++i) pairs.emplace_back("img" + std::to_string(c * 3 + i), "class" + std::to_string(c));
  }
  const auto manifest = ProbeManifest::from_images("protocol", pairs);
  const std::set<std::string> classes(manifest.class_list.begin(), manifest.class_list.end());

  bool deterministic = true;
  for (std::uint64_t seed : {0ull, 1ull, 42ull, 18446744073709551615ull}) {
    deterministic &= trials_to_jsonl(generate_trials(manifest, classes, 4, 5, seed)) ==
                     trials_to_jsonl(generate_trials(manifest, classes, 4, 5, seed));
  }
  deterministic &= trials_to_jsonl(generate_trials(manifest, classes, 4, 5, 0)) !=
                   trials_to_jsonl(generate_trials(manifest, classes, 4, 5, 1));

  bool n31_ok = true;
  try {
    generate_trials(manifest, classes, 31, 1, 0);
  } catch (const Error&) {
    n31_ok = false;
  }
  std::string n32_message;
  try {
    generate_trials(manifest, classes, 32, 1, 0);
  } catch (const InputError& e) {
    n32_message = e.what();
  }
  const bool n32_ok = n32_message == "n=32 exceeds the 31 eligible classes; the maximum feasible n is 31";

  std::mt19937_64 rng(6666);
  std::size_t fuzzed = 0, bad = 0;
  while (fuzzed < 1000) {
    const std::size_t n = 2 + rng() % 30;
    for (const auto& t : generate_trials(manifest, classes, n, 1 + rng() % 3, rng()).trials) {
      std::size_t hits = 0;
      std::set<std::string> seen;
      for (const auto& id : t.images()) {
        hits += manifest.class_of.at(id) == t.target_class;
        seen.insert(manifest.class_of.at(id));
      }
      bad += hits != 1 || t.images().size() != n || seen.size() != n;
      if (++fuzzed >= 1000) break;
    }
  }
  o.detail << "deterministic=" << deterministic << " n=31 ok=" << n31_ok << " n=32 -> \"" << n32_message
           << "\" fuzzed=" << fuzzed << " violations=" << bad << " ";
  o.check(deterministic, "byte-deterministic per seed");
  o.check(n31_ok && n32_ok, "n=31 succeeds, n=32 errors with the ceiling");
  o.check(bad == 0, "exactly one target-class image per trial");
}

// 7. Container round-trip fuzz and malformed inputs.
void format_suite(Outcome& o) {
  std::mt19937_64 rng(7777);
  std::uniform_int_distribution<std::uint32_t> bits;
  auto random_float = [&] {
    for (;;) {
      const std::uint32_t b = bits(rng);
      float f;
      std::memcpy(&f, &b, 4);
      if (std::isfinite(f)) return f;
    }
  };
  std::size_t roundtrips = 0, failures = 0;
  for (int c = 0; c < 100; ++c) {
    ActivationTensor t;
    t.model_id = "fuzz-" + std::to_string(c);
    t.layer_id = "layer\xc3\xa9" + std::to_string(c % 4);
    const std::size_t n = 1 + rng() % 6, k = 1 + rng() % 5;
    t.image_ids = test::ids("im\"g", n);
    if (rng() % 2) {
      t.shape = {n, k, 1 + rng() % 4, 1 + rng() % 4};
    } else {
      t.shape = {n, k};
    }
    if (c % 10 == 0) t.meta = nlohmann::ordered_json{{"hook", "relu"}, {"post_nonlinearity", true}};
    std::size_t count = 1;
    for (auto s : t.shape) count *= s;
    for (std::size_t i = 0; i < count; ++i) t.values.push_back(random_float());
    const auto back = decode_activation_tensor(encode_activation_tensor(t));
    failures += !(back == t) || std::memcmp(back.values.data(), t.values.data(), count * 4) != 0;

    EmbeddingMatrix e;
    e.source_id = "fuzz";
    e.dim = 1 + rng() % 40;
    e.item_ids = test::ids("item", 1 + rng() % 8);
    e.normalized = c % 2 == 0;
    if (e.normalized) {
      e = test::random_unit_rows(rng, "item", e.item_ids.size(), e.dim);
    } else {
      for (std::size_t i = 0; i < e.item_ids.size() * e.dim; ++i) e.rows.push_back(random_float());
    }
    const auto eback = decode_embedding_matrix(encode_embedding_matrix(e));
    failures += !(eback == e);
    roundtrips += 2;
  }

  ActivationTensor base;
  base.model_id = "m";
  base.layer_id = "l";
  base.image_ids = {"a", "b"};
  base.shape = {2, 3};
  base.values = {1, 2, 3, 4, 5, 6};
  const auto good = encode_activation_tensor(base);
  auto with_header = [&](const std::string& header, std::size_t floats) {
    std::string out = "NACT";
    out.push_back(1);
    const auto len = static_cast<std::uint32_t>(header.size());
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((len >> (8 * b)) & 0xff));
    return out + header + std::string(floats * 4, '\0');
  };
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::string nan_bytes = good;
  std::memcpy(nan_bytes.data() + nan_bytes.size() - 4, &nan, 4);

  struct Case {
    const char* name;
    std::string bytes;
    int expected;  // 0 format, 1 corruption, 2 validation
  };
  const std::vector<Case> cases = {
      {"empty file", "", 0},
      {"bad magic", "XXXX" + good.substr(4), 0},
      {"wrong container", "NEMB" + good.substr(4), 0},
      {"bad version", good.substr(0, 4) + '\x07' + good.substr(5), 0},
      {"truncated preamble", good.substr(0, 7), 0},
      {"header overruns file", good.substr(0, 20), 1},
      {"truncated payload", good.substr(0, good.size() - 5), 1},
      {"trailing bytes", good + "\x01", 1},
      {"header not json", with_header("{\"model_id\":", 6), 0},
      {"header not object", with_header("[1,2]", 6), 0},
      {"missing field", with_header(R"({"model_id":"m","dtype":"f32","shape":[2,3],"image_ids":["a","b"]})", 6), 0},
      {"wrong dtype", with_header(R"({"model_id":"m","layer_id":"l","dtype":"f16","shape":[2,3],"image_ids":["a","b"]})", 6), 0},
      {"rank 1", with_header(R"({"model_id":"m","layer_id":"l","dtype":"f32","shape":[6],"image_ids":["a","b"]})", 6), 0},
      {"fractional shape", with_header(R"({"model_id":"m","layer_id":"l","dtype":"f32","shape":[2,1.5],"image_ids":["a","b"]})", 3), 0},
      {"id count mismatch", with_header(R"({"model_id":"m","layer_id":"l","dtype":"f32","shape":[2,3],"image_ids":["a"]})", 6), 2},
      {"duplicate ids", with_header(R"({"model_id":"m","layer_id":"l","dtype":"f32","shape":[2,3],"image_ids":["a","a"]})", 6), 2},
      {"NaN payload", nan_bytes, 2},
  };
  std::size_t typed = 0;
  std::ostringstream wrong;
  for (const auto& c : cases) {
    int got = -1;
    try {
      decode_activation_tensor(c.bytes);
    } catch (const FormatError&) {
      got = 0;
    } catch (const CorruptionError&) {
      got = 1;
    } catch (const ValidationError&) {
      got = 2;
    } catch (...) {
      got = 3;
    }
    if (got == c.expected) {
      ++typed;
    } else {
      wrong << c.name << ";";
    }
  }
  // Embedding-specific: unit-norm flag with a (3,4) row.
  EmbeddingMatrix bad_norm;
  bad_norm.source_id = "s";
  bad_norm.item_ids = {"x"};
  bad_norm.dim = 2;
  bad_norm.rows = {3, 4};
  bad_norm.normalized = false;
  auto bytes = encode_embedding_matrix(bad_norm);
  const auto flag = bytes.find("\"normalized\":false");
  bytes.replace(flag, 18, "\"normalized\":true ");
  bool norm_typed = false;
  try {
    decode_embedding_matrix(bytes);
  } catch (const ValidationError&) {
    norm_typed = true;
  } catch (...) {
  }

  o.detail << "roundtrips=" << roundtrips << " failures=" << failures << " malformed typed=" << typed << "/"
           << cases.size() << (norm_typed ? " +norm" : " -norm") << " " << wrong.str();
  o.check(failures == 0, "bit-exact round-trips");
  o.check(typed == cases.size() && norm_typed, "typed errors for malformed files");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"AoA reproduction", aoa_reproduction},
      {"planted-concept recovery", planted_recovery},
      {"chance floor", chance_floor},
      {"brute-force oracle equivalence", brute_force_oracles},
      {"CKA suite", cka_suite},
      {"protocol constraints", protocol_constraints},
      {"format suite", format_suite},
  };
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::cerr << "usage: acceptance [criterion 1-" << criteria.size() << "]\n";
    return 2;
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i + 1) != only) continue;
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "]";
    }
    std::cout << "criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first
              << "  " << o.detail.str() << std::endl;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
