#include "neuroscope/repr_analysis.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "neuroscope/error.hpp"
#include "neuroscope/io_util.hpp"

namespace neuroscope {

namespace {

Eigen::MatrixXd centered(const Eigen::MatrixXd& m) {
  return m.rowwise() - m.colwise().mean();
}

}  // namespace

std::string_view to_string(SpatialReduction r) {
  return r == SpatialReduction::kSpatialMean ? "spatial-mean" : "flatten";
}

SpatialReduction parse_spatial_reduction(std::string_view text) {
  if (text == "mean" || text == "spatial-mean") return SpatialReduction::kSpatialMean;
  if (text == "flatten") return SpatialReduction::kFlatten;
  throw InputError("unknown spatial reduction '" + std::string(text) + "'");
}

FeatureMatrix to_feature_matrix(const ActivationTensor& t, SpatialReduction reduction) {
  FeatureMatrix f{t.model_id, t.layer_id, t.image_ids, {}};
  const auto n = static_cast<Eigen::Index>(t.num_images());
  const std::size_t k = t.num_neurons();
  const std::size_t hw = t.map_size();
  if (reduction == SpatialReduction::kFlatten) {
    f.x.resize(n, static_cast<Eigen::Index>(k * hw));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k * hw; ++j) {
        f.x(i, static_cast<Eigen::Index>(j)) = t.values[static_cast<std::size_t>(i) * k * hw + j];
      }
    }
  } else {
    f.x.resize(n, static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        f.x(i, static_cast<Eigen::Index>(j)) =
            summarize_map(t.map(static_cast<std::size_t>(i), j), SummaryKind::kSpatialMean);
      }
    }
  }
  return f;
}

double linear_cka(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows()) {
    throw InputError("CKA needs the same number of examples, got " + std::to_string(x.rows()) +
                     " and " + std::to_string(y.rows()));
  }
  if (x.rows() < 2) {
    throw InputError("CKA needs at least two examples");
  }
  const Eigen::MatrixXd xc = centered(x);
  const Eigen::MatrixXd yc = centered(y);
  double cross = 0.0;
  double self_x = 0.0;
  double self_y = 0.0;
  const auto n = x.rows();
  if (x.cols() + y.cols() > 2 * n) {
    // Gram form: tr(Kx Ky) = ||Y^T X||_F^2 with K = M M^T.
    const Eigen::MatrixXd kx = xc * xc.transpose();
    const Eigen::MatrixXd ky = yc * yc.transpose();
    cross = (kx.array() * ky.array()).sum();
    self_x = kx.norm();
    self_y = ky.norm();
  } else {
    cross = (yc.transpose() * xc).squaredNorm();
    self_x = (xc.transpose() * xc).norm();
    self_y = (yc.transpose() * yc).norm();
  }
  if (self_x == 0.0 || self_y == 0.0) {
    throw ComputationError("CKA is undefined: a centered feature matrix is all zeros");
  }
  return cross / (self_x * self_y);
}

double linear_cka(const FeatureMatrix& x, const FeatureMatrix& y) {
  if (x.image_ids != y.image_ids) {
    throw InputError("probe order of '" + x.layer_id + "' and '" + y.layer_id + "' differs");
  }
  return linear_cka(x.x, y.x);
}

CkaMatrix cka_matrix(const std::vector<FeatureMatrix>& layers_a,
                     const std::vector<FeatureMatrix>& layers_b) {
  const std::vector<std::string>* probe = nullptr;
  for (const auto* side : {&layers_a, &layers_b}) {
    for (const auto& f : *side) {
      if (probe == nullptr) {
        probe = &f.image_ids;
      } else if (f.image_ids != *probe) {
        throw InputError("probe image order of layer '" + f.model_id + "/" + f.layer_id +
                         "' does not match the other layers");
      }
    }
  }
  CkaMatrix m;
  for (const auto& f : layers_a) m.rows.push_back(f.layer_id);
  for (const auto& f : layers_b) m.cols.push_back(f.layer_id);
  m.values.resize(static_cast<Eigen::Index>(layers_a.size()),
                  static_cast<Eigen::Index>(layers_b.size()));
  const std::size_t cells = layers_a.size() * layers_b.size();
  parallel_for(cells, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const std::size_t i = c / layers_b.size();
      const std::size_t j = c % layers_b.size();
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          linear_cka(layers_a[i].x, layers_b[j].x);
    }
  });
  return m;
}

std::string cka_to_csv(const CkaMatrix& m) {
  std::ostringstream out;
  out.precision(17);
  out << "layer";
  for (const auto& c : m.cols) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    out << m.rows[i];
    for (std::size_t j = 0; j < m.cols.size(); ++j) {
      out << ',' << m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    out << '\n';
  }
  return out.str();
}

std::string cka_to_long_csv(const CkaMatrix& m) {
  std::ostringstream out;
  out.precision(17);
  out << "row_layer,col_layer,cka\n";
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    for (std::size_t j = 0; j < m.cols.size(); ++j) {
      out << m.rows[i] << ',' << m.cols[j] << ','
          << m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << '\n';
    }
  }
  return out.str();
}

Taxonomy read_taxonomy(const std::filesystem::path& path) {
  Taxonomy taxonomy;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("taxonomy '" + path.string() + "': " + e.what());
  }
  if (!j.is_object()) {
    throw FormatError("taxonomy '" + path.string() + "' must be a JSON object");
  }
  for (const auto& [concept_name, cat] : j.items()) {
    if (!cat.is_string()) {
      throw FormatError("taxonomy entry '" + concept_name + "' is not a string");
    }
    const auto category = cat.get<std::string>();
    if (std::find(kCategories.begin(), kCategories.end(), category) == kCategories.end()) {
      throw ValidationError("taxonomy entry '" + concept_name + "' has unknown category '" +
                            category + "'");
    }
    taxonomy.emplace(concept_name, category);
  }
  return taxonomy;
}

std::size_t ConceptCensus::count(std::string_view layer, std::string_view category) const {
  const auto l = counts.find(std::string(layer));
  if (l == counts.end()) {
    return 0;
  }
  const auto c = l->second.find(std::string(category));
  return c == l->second.end() ? 0 : c->second;
}

ConceptCensus concept_census(const std::map<std::string, std::vector<NeuronLabel>>& labels_per_layer,
                             const Taxonomy& taxonomy) {
  ConceptCensus census;
  for (const auto& [layer, labels] : labels_per_layer) {
    census.layers.push_back(layer);
    auto& row = census.counts[layer];
    for (auto cat : kCategories) row[std::string(cat)] = 0;
    row[std::string(kUncategorized)] = 0;
    std::set<std::string> seen;
    for (const auto& l : labels) {
      if (l.is_dead() || !seen.insert(l.concept_name).second) {
        continue;
      }
      const auto it = taxonomy.find(l.concept_name);
      row[it == taxonomy.end() ? std::string(kUncategorized) : it->second] += 1;
    }
  }
  return census;
}

std::string census_to_csv(const ConceptCensus& census) {
  std::ostringstream out;
  out << "layer,category,count\n";
  for (const auto& layer : census.layers) {
    for (auto cat : kCategories) {
      out << layer << ',' << cat << ',' << census.count(layer, cat) << '\n';
    }
    out << layer << ',' << kUncategorized << ',' << census.count(layer, kUncategorized) << '\n';
  }
  return out.str();
}

}  // namespace neuroscope
