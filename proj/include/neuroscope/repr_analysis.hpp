#pragma once

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "neuroscope/dissect.hpp"
#include "neuroscope/tensor_store.hpp"

namespace neuroscope {

/// n examples by p features for one layer.
struct FeatureMatrix {
  std::string model_id;
  std::string layer_id;
  std::vector<std::string> image_ids;
  Eigen::MatrixXd x;
};

enum class SpatialReduction {
  kSpatialMean,  // p = K
  kFlatten,      // p = K * H * W
};

std::string_view to_string(SpatialReduction r);
SpatialReduction parse_spatial_reduction(std::string_view text);

FeatureMatrix to_feature_matrix(const ActivationTensor& t,
                                SpatialReduction reduction = SpatialReduction::kSpatialMean);

/// Linear CKA of the column-centered features:
///   ||Y^T X||_F^2 / (||X^T X||_F * ||Y^T Y||_F)
/// Uses n x n Gram matrices instead when that is cheaper. Throws
/// InputError on an example-count mismatch and ComputationError when either
/// centered matrix is all zeros.
double linear_cka(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);
double linear_cka(const FeatureMatrix& x, const FeatureMatrix& y);

struct CkaMatrix {
  std::vector<std::string> rows;  // layers of model A
  std::vector<std::string> cols;  // layers of model B
  Eigen::MatrixXd values;
};

CkaMatrix cka_matrix(const std::vector<FeatureMatrix>& layers_a,
                     const std::vector<FeatureMatrix>& layers_b);

/// Header row/col of layer ids, full-precision values.
std::string cka_to_csv(const CkaMatrix& m);
/// Long format: row_layer,col_layer,cka.
std::string cka_to_long_csv(const CkaMatrix& m);

inline constexpr std::array<std::string_view, 6> kCategories = {"color", "texture", "material",
                                                                 "part",  "object",  "scene"};
inline constexpr std::string_view kUncategorized = "uncategorized";

/// concept -> category.
using Taxonomy = std::map<std::string, std::string>;

/// JSON {concept: category}; categories must be one of kCategories.
Taxonomy read_taxonomy(const std::filesystem::path& path);

/// Unique concepts per (layer, category).
struct ConceptCensus {
  std::vector<std::string> layers;
  /// layer -> category -> count, every category (including uncategorized) present.
  std::map<std::string, std::map<std::string, std::size_t>> counts;

  std::size_t count(std::string_view layer, std::string_view category) const;
};

/// Counts each layer's distinct concepts per category. Dead neurons are
/// skipped; concepts absent from the taxonomy fall in "uncategorized".
ConceptCensus concept_census(const std::map<std::string, std::vector<NeuronLabel>>& labels_per_layer,
                             const Taxonomy& taxonomy);

/// CSV: layer,category,count.
std::string census_to_csv(const ConceptCensus& census);

}  // namespace neuroscope
