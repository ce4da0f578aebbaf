#include "neuroscope/trials.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "neuroscope/error.hpp"
#include "neuroscope/io_util.hpp"
#include "neuroscope/rng.hpp"

namespace neuroscope {

namespace {

using ojson = nlohmann::ordered_json;

template <typename Json = nlohmann::json, typename F>
auto parse_jsonl(std::string_view text, const char* what, F&& parse_record) {
  std::vector<decltype(parse_record(Json{}))> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    try {
      out.push_back(parse_record(Json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string(what) + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> Trial::images() const {
  std::vector<std::string> out;
  out.reserve(n());
  for (std::size_t i = 0, f = 0; i < n(); ++i) {
    out.push_back(i == target_position ? target_image : foil_images[f++]);
  }
  return out;
}

TrialSet generate_trials(const ProbeManifest& manifest, const std::set<std::string>& classes,
                         std::size_t n, std::size_t trials_per_class, std::uint64_t seed) {
  if (n < 2) {
    throw InputError("n-way trials need n >= 2, got n=" + std::to_string(n));
  }
  if (trials_per_class < 1) {
    throw InputError("trials_per_class must be at least 1");
  }
  if (n > classes.size()) {
    throw InputError("n=" + std::to_string(n) + " exceeds the " + std::to_string(classes.size()) +
                     " eligible classes; the maximum feasible n is " +
                     std::to_string(classes.size()));
  }
  std::map<std::string, std::vector<std::string>> images;
  for (const auto& cls : classes) {
    auto ids = manifest.images_of(cls);
    if (ids.empty()) {
      throw InputError("class '" + cls + "' has no images in the probe manifest");
    }
    images.emplace(cls, std::move(ids));
  }
  const std::vector<std::string> ordered(classes.begin(), classes.end());

  CounterRng rng(seed);
  TrialSet set;
  set.trials.reserve(ordered.size() * trials_per_class);
  for (const auto& cls : ordered) {
    const auto& own = images.at(cls);
    for (std::size_t t = 0; t < trials_per_class; ++t) {
      Trial trial;
      trial.trial_id = "s" + std::to_string(seed) + "-" + cls + "-" + std::to_string(t);
      trial.target_class = cls;
      trial.seed = seed;
      trial.target_image = own[rng.uniform(own.size())];

      std::vector<std::string> others;
      others.reserve(ordered.size() - 1);
      for (const auto& c : ordered) {
        if (c != cls) {
          others.push_back(c);
        }
      }
      for (std::size_t j = 0; j + 1 < n; ++j) {
        const std::size_t r = j + rng.uniform(others.size() - j);
        std::swap(others[j], others[r]);
      }
      for (std::size_t j = 0; j + 1 < n; ++j) {
        const auto& pool = images.at(others[j]);
        trial.foil_images.push_back(pool[rng.uniform(pool.size())]);
      }
      trial.target_position = rng.uniform(n);
      set.trials.push_back(std::move(trial));
    }
  }
  return set;
}

std::string trials_to_jsonl(const TrialSet& set) {
  std::string out;
  for (const auto& t : set.trials) {
    ojson j;
    j["trial_id"] = t.trial_id;
    j["target_class"] = t.target_class;
    j["target_image"] = t.target_image;
    j["foils"] = t.foil_images;
    j["target_position"] = t.target_position;
    j["seed"] = t.seed;
    out += j.dump();
    out += '\n';
  }
  return out;
}

TrialSet trials_from_jsonl(std::string_view text) {
  TrialSet set;
  set.trials = parse_jsonl(text, "trial", [](const nlohmann::json& j) {
    Trial t;
    t.trial_id = j.at("trial_id").get<std::string>();
    t.target_class = j.at("target_class").get<std::string>();
    t.target_image = j.at("target_image").get<std::string>();
    t.foil_images = j.at("foils").get<std::vector<std::string>>();
    t.target_position = j.value("target_position", std::size_t{0});
    t.seed = j.at("seed").get<std::uint64_t>();
    if (t.target_position >= t.n()) {
      throw InputError("trial '" + t.trial_id + "' has target_position out of range");
    }
    return t;
  });
  return set;
}

void write_trials(const TrialSet& set, const std::filesystem::path& path) {
  write_file_atomic(path, trials_to_jsonl(set));
}

TrialSet read_trials(const std::filesystem::path& path) { return trials_from_jsonl(read_file(path)); }

std::string predictions_to_jsonl(const std::vector<TrialPrediction>& predictions) {
  std::string out;
  for (const auto& p : predictions) {
    ojson j;
    j["trial_id"] = p.trial_id;
    j["seed"] = p.seed;
    j["target"] = p.target_class;
    j["neuron"] = {{"layer", p.neuron.layer_id}, {"unit", p.neuron.unit}};
    ojson acts = ojson::object();
    for (const auto& [id, v] : p.activations) {
      acts[id] = v;
    }
    j["activations"] = std::move(acts);
    j["chosen"] = p.chosen;
    j["correct"] = p.correct;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<TrialPrediction> predictions_from_jsonl(std::string_view text) {
  // ordered_json keeps the activation map in presentation order.
  return parse_jsonl<ojson>(text, "prediction", [](const ojson& j) {
    TrialPrediction p;
    p.trial_id = j.at("trial_id").get<std::string>();
    p.seed = j.value("seed", std::uint64_t{0});
    p.target_class = j.at("target").get<std::string>();
    p.neuron.layer_id = j.at("neuron").at("layer").get<std::string>();
    p.neuron.unit = j.at("neuron").at("unit").get<std::size_t>();
    for (const auto& [id, v] : j.at("activations").items()) {
      p.activations.emplace_back(id, v.get<double>());
    }
    p.chosen = j.at("chosen").get<std::string>();
    p.correct = j.at("correct").get<bool>();
    return p;
  });
}

std::string_view to_string(Bucket bucket) {
  switch (bucket) {
    case Bucket::kInVocab:
      return "in-vocab";
    case Bucket::kOutOfVocab:
      return "out-of-vocab";
    case Bucket::kAll:
      return "all";
  }
  return "unknown";
}

Bucket parse_bucket(std::string_view text) {
  if (text == "in-vocab") return Bucket::kInVocab;
  if (text == "out-of-vocab") return Bucket::kOutOfVocab;
  if (text == "all") return Bucket::kAll;
  throw InputError("unknown bucket '" + std::string(text) + "'");
}

std::pair<double, std::optional<double>> mean_and_sample_std(const std::vector<double>& values) {
  if (values.empty()) {
    return {0.0, std::nullopt};
  }
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) {
    return {mean, std::nullopt};
  }
  double ss = 0.0;
  for (double v : values) {
    ss += (v - mean) * (v - mean);
  }
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

std::vector<AccuracyReport> score(const std::vector<TrialPrediction>& predictions,
                                  const VocabPartition& partition,
                                  const std::vector<std::uint64_t>& seeds) {
  struct Tally {
    std::size_t correct = 0;
    std::size_t total = 0;
  };
  // bucket -> seed -> tally
  std::map<Bucket, std::map<std::uint64_t, Tally>> tallies;
  std::map<Bucket, std::set<std::string>> classes;
  std::size_t n = 0;
  const std::set<std::uint64_t> seed_set(seeds.begin(), seeds.end());

  for (const auto& p : predictions) {
    Bucket bucket;
    if (partition.in_vocab.contains(p.target_class)) {
      bucket = Bucket::kInVocab;
    } else if (partition.out_of_vocab.contains(p.target_class)) {
      bucket = Bucket::kOutOfVocab;
    } else {
      throw InputError("prediction '" + p.trial_id + "' targets class '" + p.target_class +
                       "', which is not in a detected bucket");
    }
    if (!seed_set.contains(p.seed)) {
      throw InputError("prediction '" + p.trial_id + "' has seed " + std::to_string(p.seed) +
                       " outside the scored seed list");
    }
    if (n == 0) {
      n = p.activations.size();
    }
    for (Bucket b : {bucket, Bucket::kAll}) {
      auto& t = tallies[b][p.seed];
      t.total += 1;
      t.correct += p.correct ? 1 : 0;
      classes[b].insert(p.target_class);
    }
  }

  std::vector<AccuracyReport> reports;
  for (Bucket b : {Bucket::kInVocab, Bucket::kOutOfVocab, Bucket::kAll}) {
    AccuracyReport r;
    r.bucket = b;
    r.n = n;
    r.num_classes = classes[b].size();
    for (std::uint64_t s : seeds) {
      const auto it = tallies[b].find(s);
      if (it == tallies[b].end() || it->second.total == 0) {
        continue;
      }
      r.seeds.push_back(s);
      r.per_seed_accuracy.push_back(static_cast<double>(it->second.correct) /
                                    static_cast<double>(it->second.total));
      r.num_trials += it->second.total;
    }
    if (!r.per_seed_accuracy.empty()) {
      auto [mean, sd] = mean_and_sample_std(r.per_seed_accuracy);
      r.mean = mean;
      r.std = sd;
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

nlohmann::ordered_json report_to_json(const AccuracyReport& r) {
  ojson j;
  j["bucket"] = to_string(r.bucket);
  j["n"] = r.n;
  j["seeds"] = r.seeds;
  j["per_seed_accuracy"] = r.per_seed_accuracy;
  j["mean"] = r.mean ? ojson(*r.mean) : ojson(nullptr);
  j["std"] = r.std ? ojson(*r.std) : ojson(nullptr);
  j["std_ddof"] = 1;
  j["mean_defined"] = r.mean.has_value();
  j["num_classes"] = r.num_classes;
  j["num_trials"] = r.num_trials;
  return j;
}

AccuracyReport report_from_json(const nlohmann::json& j) {
  try {
    AccuracyReport r;
    r.bucket = parse_bucket(j.at("bucket").get<std::string>());
    r.n = j.at("n").get<std::size_t>();
    r.seeds = j.value("seeds", std::vector<std::uint64_t>{});
    r.per_seed_accuracy = j.value("per_seed_accuracy", std::vector<double>{});
    if (j.contains("mean") && !j.at("mean").is_null()) {
      r.mean = j.at("mean").get<double>();
    }
    if (j.contains("std") && !j.at("std").is_null()) {
      r.std = j.at("std").get<double>();
    }
    r.num_classes = j.value("num_classes", std::size_t{0});
    r.num_trials = j.value("num_trials", std::size_t{0});
    for (double a : r.per_seed_accuracy) {
      if (!(a >= 0.0 && a <= 1.0)) {
        throw ValidationError("per-seed accuracy outside [0, 1]");
      }
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed accuracy report: ") + e.what());
  }
}

std::string reports_to_csv(const std::vector<AccuracyReport>& reports) {
  std::ostringstream out;
  out.precision(17);
  out << "bucket,n,mean,std,num_trials,seeds\n";
  for (const auto& r : reports) {
    out << to_string(r.bucket) << ',' << r.n << ',';
    if (r.mean) out << *r.mean;
    out << ',';
    if (r.std) out << *r.std;
    out << ',' << r.num_trials << ',';
    for (std::size_t i = 0; i < r.seeds.size(); ++i) {
      out << (i ? ";" : "") << r.seeds[i];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace neuroscope
