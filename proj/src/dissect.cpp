#include "neuroscope/dissect.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "neuroscope/error.hpp"
#include "neuroscope/io_util.hpp"

namespace neuroscope {

namespace {

using ojson = nlohmann::ordered_json;

bool is_constant(std::span<const double> v) {
  if (v.empty()) {
    return true;
  }
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *lo == *hi;
}

/// Mean-centered copy scaled to unit norm; all zeros when constant.
Eigen::VectorXd centered_unit(std::span<const double> v) {
  Eigen::VectorXd out = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  if (is_constant(v)) {
    return Eigen::VectorXd::Zero(out.size());
  }
  out.array() -= out.mean();
  const double norm = out.norm();
  if (norm == 0.0) {
    return Eigen::VectorXd::Zero(out.size());
  }
  return out / norm;
}

std::vector<double> column(const ConceptActivationMatrix& p, std::size_t m) {
  std::vector<double> col(p.rows());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    col[i] = p.at(i, m);
  }
  return col;
}

/// log softmax over each row of P, plus log of the column means of softmax(P).
struct SoftmaxTables {
  Eigen::MatrixXd log_softmax;  // N x M
  Eigen::VectorXd log_mean;     // M
};

SoftmaxTables softmax_tables(const ConceptActivationMatrix& p) {
  const auto n = static_cast<Eigen::Index>(p.rows());
  const auto m = static_cast<Eigen::Index>(p.cols());
  SoftmaxTables t{Eigen::MatrixXd(n, m), Eigen::VectorXd::Zero(m)};
  for (Eigen::Index i = 0; i < n; ++i) {
    double hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < m; ++j) {
      hi = std::max(hi, static_cast<double>(p.values[i * m + j]));
    }
    double sum = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      sum += std::exp(p.values[i * m + j] - hi);
    }
    const double lse = hi + std::log(sum);
    for (Eigen::Index j = 0; j < m; ++j) {
      t.log_softmax(i, j) = p.values[i * m + j] - lse;
    }
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    t.log_mean(j) = std::log(t.log_softmax.col(j).array().exp().mean());
  }
  return t;
}

/// Indices of the `top` largest activations (ties to the lower index) and
/// their softmax weights.
std::pair<std::vector<std::size_t>, std::vector<double>> top_weights(std::span<const double> q,
                                                                     std::size_t top) {
  std::vector<std::size_t> idx(q.size());
  std::iota(idx.begin(), idx.end(), 0);
  top = std::min(top, q.size());
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return q[a] > q[b]; });
  idx.resize(top);
  std::vector<double> w(top);
  const double hi = top > 0 ? q[idx[0]] : 0.0;
  double sum = 0.0;
  for (std::size_t r = 0; r < top; ++r) {
    w[r] = std::exp(q[idx[r]] - hi);
    sum += w[r];
  }
  for (auto& x : w) {
    x /= sum;
  }
  return {std::move(idx), std::move(w)};
}

double wpmi_score(std::size_t m, const std::vector<std::size_t>& idx, const std::vector<double>& w,
                  const SoftmaxTables& tables, double lambda) {
  double acc = 0.0;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    acc += w[r] * tables.log_softmax(static_cast<Eigen::Index>(idx[r]), static_cast<Eigen::Index>(m));
  }
  return acc - lambda * tables.log_mean(static_cast<Eigen::Index>(m));
}

NeuronLabel dead_label(const ActivationTensor& t, std::size_t k, SimilarityKind kind,
                       SummaryKind summary) {
  return NeuronLabel{NeuronRef{t.layer_id, k}, std::string(kDeadConcept),
                     static_cast<double>(std::numeric_limits<float>::lowest()), kind, summary,
                     {"dead"}};
}

}  // namespace

std::string_view to_string(SummaryKind kind) {
  switch (kind) {
    case SummaryKind::kSpatialMean:
      return "spatial-mean";
    case SummaryKind::kSpatialMax:
      return "spatial-max";
    case SummaryKind::kIdentity:
      return "identity";
  }
  return "unknown";
}

std::string_view to_string(SimilarityKind kind) {
  return kind == SimilarityKind::kCosine ? "cosine" : "rank-wpmi";
}

SummaryKind parse_summary_kind(std::string_view text) {
  if (text == "mean" || text == "spatial-mean") return SummaryKind::kSpatialMean;
  if (text == "max" || text == "spatial-max") return SummaryKind::kSpatialMax;
  if (text == "identity") return SummaryKind::kIdentity;
  throw InputError("unknown summary kind '" + std::string(text) + "'");
}

SimilarityKind parse_similarity_kind(std::string_view text) {
  if (text == "cosine") return SimilarityKind::kCosine;
  if (text == "rank-wpmi") return SimilarityKind::kRankWpmi;
  throw InputError("unknown similarity kind '" + std::string(text) + "'");
}

ConceptActivationMatrix concept_activation_matrix(const EmbeddingMatrix& images,
                                                  const EmbeddingMatrix& concepts) {
  if (images.dim != concepts.dim) {
    throw InputError("embedding dim mismatch: images " + std::to_string(images.dim) +
                     " vs concepts " + std::to_string(concepts.dim));
  }
  if (!images.normalized || !concepts.normalized) {
    throw InputError("concept-activation matrix requires normalized embeddings ('" +
                     (images.normalized ? concepts.source_id : images.source_id) +
                     "' is not flagged normalized)");
  }
  images.validate();
  concepts.validate();
  ConceptActivationMatrix p;
  p.image_ids = images.item_ids;
  p.concepts = concepts.item_ids;
  p.values.resize(p.rows() * p.cols());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    const auto img = images.row(i);
    for (std::size_t j = 0; j < p.cols(); ++j) {
      const auto txt = concepts.row(j);
      double dot = 0.0;
      for (std::size_t d = 0; d < images.dim; ++d) {
        dot += static_cast<double>(img[d]) * txt[d];
      }
      p.values[i * p.cols() + j] = static_cast<float>(dot);
    }
  }
  return p;
}

double summarize_map(std::span<const float> map, SummaryKind kind) {
  if (map.empty()) {
    throw InputError("cannot summarize an empty activation map");
  }
  switch (kind) {
    case SummaryKind::kSpatialMean: {
      double sum = 0.0;
      for (float v : map) {
        sum += v;
      }
      return sum / static_cast<double>(map.size());
    }
    case SummaryKind::kSpatialMax:
      return *std::max_element(map.begin(), map.end());
    case SummaryKind::kIdentity:
      if (map.size() != 1) {
        throw InputError("identity summary requires non-spatial activations");
      }
      return map[0];
  }
  return 0.0;
}

NeuronActivationVector summarize_activations(const ActivationTensor& t, std::size_t neuron,
                                             SummaryKind kind) {
  if (neuron >= t.num_neurons()) {
    throw InputError("neuron index " + std::to_string(neuron) + " out of range for layer '" +
                     t.layer_id + "' with " + std::to_string(t.num_neurons()) + " neurons");
  }
  if (kind == SummaryKind::kIdentity && t.is_spatial()) {
    throw InputError("identity summary is only valid for non-spatial activations");
  }
  NeuronActivationVector out{NeuronRef{t.layer_id, neuron}, {}, kind};
  out.values.resize(t.num_images());
  for (std::size_t i = 0; i < t.num_images(); ++i) {
    out.values[i] = summarize_map(t.map(i, neuron), kind);
  }
  return out;
}

double similarity(std::size_t concept_index, std::span<const double> activations,
                  const ConceptActivationMatrix& p, SimilarityKind kind,
                  const RankWpmiParams& wpmi) {
  if (activations.size() != p.rows()) {
    throw InputError("activation vector has length " + std::to_string(activations.size()) +
                     " but P has " + std::to_string(p.rows()) + " rows");
  }
  if (concept_index >= p.cols()) {
    throw InputError("concept index " + std::to_string(concept_index) + " out of range");
  }
  if (kind == SimilarityKind::kCosine) {
    if (is_constant(activations)) {
      throw ComputationError("cosine similarity is undefined for a zero-variance activation vector");
    }
    const auto col = column(p, concept_index);
    return centered_unit(activations).dot(centered_unit(col));
  }
  const auto tables = softmax_tables(p);
  const auto [idx, w] = top_weights(activations, wpmi.top_images);
  return wpmi_score(concept_index, idx, w, tables, wpmi.lambda);
}

std::vector<NeuronLabel> label_neurons(const ActivationTensor& t, const ConceptActivationMatrix& p,
                                       SimilarityKind kind, SummaryKind summary,
                                       const RankWpmiParams& wpmi) {
  if (t.image_ids != p.image_ids) {
    throw InputError("image order of layer '" + t.layer_id +
                     "' does not match the concept-activation matrix");
  }
  if (p.cols() == 0) {
    throw InputError("concept-activation matrix has no concepts");
  }
  if (summary == SummaryKind::kIdentity && t.is_spatial()) {
    throw InputError("identity summary is only valid for non-spatial activations");
  }
  const std::size_t n = p.rows();
  const std::size_t m = p.cols();
  const std::size_t k_total = t.num_neurons();
  std::vector<NeuronLabel> labels(k_total);

  // Concept-side tables are shared read-only across workers.
  Eigen::MatrixXd columns;
  SoftmaxTables tables;
  if (kind == SimilarityKind::kCosine) {
    columns.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
      columns.col(static_cast<Eigen::Index>(j)) = centered_unit(column(p, j));
    }
  } else {
    tables = softmax_tables(p);
  }

  constexpr std::size_t kChunk = 64;
  const std::size_t chunks = (k_total + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t chunk_begin, std::size_t chunk_end) {
    for (std::size_t c = chunk_begin; c < chunk_end; ++c) {
      const std::size_t k_begin = c * kChunk;
      const std::size_t k_end = std::min(k_total, k_begin + kChunk);
      std::vector<std::size_t> live;
      std::vector<std::vector<double>> summaries;
      for (std::size_t k = k_begin; k < k_end; ++k) {
        auto q = summarize_activations(t, k, summary).values;
        if (is_constant(q)) {
          labels[k] = dead_label(t, k, kind, summary);
          continue;
        }
        live.push_back(k);
        summaries.push_back(std::move(q));
      }
      if (live.empty()) {
        continue;
      }
      Eigen::MatrixXd scores(static_cast<Eigen::Index>(live.size()), static_cast<Eigen::Index>(m));
      if (kind == SimilarityKind::kCosine) {
        Eigen::MatrixXd q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(live.size()));
        for (std::size_t r = 0; r < live.size(); ++r) {
          q.col(static_cast<Eigen::Index>(r)) = centered_unit(summaries[r]);
        }
        scores.noalias() = q.transpose() * columns;
      } else {
        for (std::size_t r = 0; r < live.size(); ++r) {
          const auto [idx, w] = top_weights(summaries[r], wpmi.top_images);
          for (std::size_t j = 0; j < m; ++j) {
            scores(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                wpmi_score(j, idx, w, tables, wpmi.lambda);
          }
        }
      }
      for (std::size_t r = 0; r < live.size(); ++r) {
        std::size_t best = 0;
        double best_score = scores(static_cast<Eigen::Index>(r), 0);
        for (std::size_t j = 1; j < m; ++j) {
          const double s = scores(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
          if (s > best_score) {
            best_score = s;
            best = j;
          }
        }
        labels[live[r]] = NeuronLabel{NeuronRef{t.layer_id, live[r]}, p.concepts[best], best_score,
                                      kind, summary, {}};
      }
    }
  });
  return labels;
}

nlohmann::ordered_json label_to_json(const NeuronLabel& label) {
  ojson j;
  j["layer"] = label.neuron.layer_id;
  j["unit"] = label.neuron.unit;
  j["concept"] = label.concept_name;
  j["score"] = label.score;
  j["similarity_kind"] = to_string(label.similarity);
  j["summary_kind"] = to_string(label.summary);
  j["flags"] = label.flags;
  return j;
}

NeuronLabel label_from_json(const nlohmann::json& j) {
  try {
    NeuronLabel label;
    label.neuron.layer_id = j.at("layer").get<std::string>();
    label.neuron.unit = j.at("unit").get<std::size_t>();
    label.concept_name = j.at("concept").get<std::string>();
    label.score = j.at("score").get<double>();
    label.similarity = parse_similarity_kind(j.at("similarity_kind").get<std::string>());
    label.summary = parse_summary_kind(j.at("summary_kind").get<std::string>());
    label.flags = j.value("flags", std::vector<std::string>{});
    return label;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed label record: ") + e.what());
  }
}

std::string labels_to_jsonl(const std::vector<NeuronLabel>& labels) {
  std::string out;
  for (const auto& l : labels) {
    out += label_to_json(l).dump();
    out += '\n';
  }
  return out;
}

std::vector<NeuronLabel> labels_from_jsonl(std::string_view text) {
  std::vector<NeuronLabel> labels;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    try {
      labels.push_back(label_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError("label line " + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("label line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return labels;
}

void write_labels(const std::vector<NeuronLabel>& labels, const std::filesystem::path& path) {
  write_file_atomic(path, labels_to_jsonl(labels));
}

std::vector<NeuronLabel> read_labels(const std::filesystem::path& path) {
  return labels_from_jsonl(read_file(path));
}

}  // namespace neuroscope
