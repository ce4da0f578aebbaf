#include <random>

#include "doctest.h"
#include "neuroscope/dissect.hpp"
#include "neuroscope/error.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace neuroscope;

namespace {

ConceptActivationMatrix matrix_of(const std::vector<std::vector<double>>& rows) {
  ConceptActivationMatrix p;
  p.image_ids = test::ids("img", rows.size());
  p.concepts = test::ids("c", rows[0].size());
  for (const auto& r : rows) {
    for (double v : r) p.values.push_back(static_cast<float>(v));
  }
  return p;
}

std::vector<std::vector<double>> as_rows(const ConceptActivationMatrix& p) {
  std::vector<std::vector<double>> rows(p.rows(), std::vector<double>(p.cols()));
  for (std::size_t i = 0; i < p.rows(); ++i) {
    for (std::size_t j = 0; j < p.cols(); ++j) rows[i][j] = p.at(i, j);
  }
  return rows;
}

std::vector<double> column_of(const ConceptActivationMatrix& p, std::size_t m) {
  std::vector<double> c(p.rows());
  for (std::size_t i = 0; i < p.rows(); ++i) c[i] = p.at(i, m);
  return c;
}

}  // namespace

TEST_SUITE("dissect") {
  TEST_CASE("P of orthonormal rows is the identity") {
    EmbeddingMatrix e;
    e.source_id = "e";
    e.item_ids = {"a", "b"};
    e.dim = 2;
    e.rows = {1, 0, 0, 1};
    e.normalized = true;
    const auto p = concept_activation_matrix(e, e);
    CHECK(p.values == std::vector<float>{1, 0, 0, 1});
    CHECK(p.image_ids == e.item_ids);
  }

  TEST_CASE("P matches a double-precision dot-product oracle") {
    std::mt19937_64 rng(17);
    for (int round = 0; round < 20; ++round) {
      const auto images = test::random_unit_rows(rng, "i", 3, 16);
      const auto concepts = test::random_unit_rows(rng, "t", 4, 16);
      const auto p = concept_activation_matrix(images, concepts);
      const auto expected = oracle::p_matrix(images, concepts);
      for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 4; ++j) CHECK(p.at(i, j) == doctest::Approx(expected[i][j]).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("P rejects mismatched dims and unnormalized inputs") {
    std::mt19937_64 rng(1);
    const auto a = test::random_unit_rows(rng, "i", 2, 4);
    auto b = test::random_unit_rows(rng, "t", 2, 5);
    CHECK_THROWS_AS(concept_activation_matrix(a, b), InputError);
    b = test::random_unit_rows(rng, "t", 2, 4);
    b.normalized = false;
    CHECK_THROWS_AS(concept_activation_matrix(a, b), InputError);
  }

  TEST_CASE("summaries of small maps") {
    const std::vector<float> constant(9, 0.7f);
    CHECK(summarize_map(constant, SummaryKind::kSpatialMean) == doctest::Approx(0.7));
    CHECK(summarize_map(constant, SummaryKind::kSpatialMax) == doctest::Approx(0.7));
    const std::vector<float> m = {0, 1, 2, 3};
    CHECK(summarize_map(m, SummaryKind::kSpatialMean) == 1.5);
    CHECK(summarize_map(m, SummaryKind::kSpatialMax) == 3.0);
    CHECK_THROWS_AS(summarize_map(m, SummaryKind::kIdentity), InputError);
  }

  TEST_CASE("summarize_activations matches a per-image loop") {
    std::mt19937_64 rng(2);
    const auto t = test::random_tensor(rng, {8, 4, 5, 5}, test::ids("img", 8));
    for (std::size_t k = 0; k < 4; ++k) {
      const auto mean = summarize_activations(t, k, SummaryKind::kSpatialMean);
      const auto max = summarize_activations(t, k, SummaryKind::kSpatialMax);
      for (std::size_t i = 0; i < 8; ++i) {
        CHECK(mean.values[i] == doctest::Approx(oracle::map_summary(t, i, k, false)).epsilon(1e-12));
        CHECK(max.values[i] == oracle::map_summary(t, i, k, true));
      }
    }
    CHECK_THROWS_AS(summarize_activations(t, 4, SummaryKind::kSpatialMean), InputError);
    CHECK_THROWS_AS(summarize_activations(t, 0, SummaryKind::kIdentity), InputError);
  }

  TEST_CASE("cosine similarity basics") {
    const auto p = matrix_of({{0.1, 0.5}, {0.4, 0.5}, {-0.3, 0.5}, {0.2, 0.5}});
    const auto col = column_of(p, 0);
    CHECK(similarity(0, col, p, SimilarityKind::kCosine) == doctest::Approx(1.0));
    // Centered column is (0.0, 0.3, -0.4, 0.1); this vector is orthogonal to it.
    const std::vector<double> orth = {1.0, 0.4, 0.3, 0.0};
    CHECK(similarity(0, orth, p, SimilarityKind::kCosine) == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(similarity(1, col, p, SimilarityKind::kCosine) == 0.0);
    const std::vector<double> flat = {2, 2, 2, 2};
    CHECK_THROWS_AS(similarity(0, flat, p, SimilarityKind::kCosine), ComputationError);
    CHECK_THROWS_AS(similarity(2, col, p, SimilarityKind::kCosine), InputError);
  }

  TEST_CASE("similarity matches independent oracles") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal;
    for (int round = 0; round < 30; ++round) {
      const auto p = concept_activation_matrix(test::random_unit_rows(rng, "i", 12, 6),
                                               test::random_unit_rows(rng, "t", 5, 6));
      std::vector<double> q(12);
      for (auto& v : q) v = normal(rng);
      const auto rows = as_rows(p);
      for (std::size_t m = 0; m < 5; ++m) {
        CHECK(similarity(m, q, p, SimilarityKind::kCosine) ==
              doctest::Approx(oracle::cosine(q, column_of(p, m))).epsilon(1e-9));
        CHECK(similarity(m, q, p, SimilarityKind::kRankWpmi) ==
              doctest::Approx(oracle::rank_wpmi(q, rows, m, 100, 1.0)).epsilon(1e-9));
        CHECK(similarity(m, q, p, SimilarityKind::kRankWpmi, {5, 0.5}) ==
              doctest::Approx(oracle::rank_wpmi(q, rows, m, 5, 0.5)).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("a noisy copy of a concept column prefers that concept") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> noise(0.0, 0.01);
    const auto p = concept_activation_matrix(test::random_unit_rows(rng, "i", 60, 32),
                                             test::random_unit_rows(rng, "t", 50, 32));
    for (std::size_t target : {0u, 17u, 49u}) {
      auto q = column_of(p, target);
      for (auto& v : q) v += noise(rng);
      const double own = similarity(target, q, p, SimilarityKind::kCosine);
      for (std::size_t m = 0; m < 50; ++m) {
        if (m != target) CHECK(similarity(m, q, p, SimilarityKind::kCosine) < own);
      }
    }
  }

  TEST_CASE("cosine is invariant to positive scaling of activations") {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> normal;
    const auto p = concept_activation_matrix(test::random_unit_rows(rng, "i", 10, 8),
                                             test::random_unit_rows(rng, "t", 3, 8));
    std::vector<double> q(10);
    for (auto& v : q) v = normal(rng);
    std::vector<double> scaled = q;
    for (auto& v : scaled) v = 4.5 * v + 3.0;
    for (std::size_t m = 0; m < 3; ++m) {
      CHECK(similarity(m, scaled, p, SimilarityKind::kCosine) ==
            doctest::Approx(similarity(m, q, p, SimilarityKind::kCosine)).epsilon(1e-12));
    }
  }

  TEST_CASE("planted neurons get their concept; constant neurons are dead") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> noise(0.0, 0.01);
    const auto images = test::random_unit_rows(rng, "img", 30, 16);
    const auto concepts = test::random_unit_rows(rng, "c", 6, 16);
    const auto p = concept_activation_matrix(images, concepts);
    ActivationTensor t;
    t.model_id = "m";
    t.layer_id = "l";
    t.image_ids = images.item_ids;
    t.shape = {30, 4};
    const std::size_t planted[3] = {4, 0, 2};
    for (std::size_t i = 0; i < 30; ++i) {
      for (std::size_t k = 0; k < 3; ++k) t.values.push_back(static_cast<float>(p.at(i, planted[k]) + noise(rng)));
      t.values.push_back(0.25f);
    }
    const auto labels = label_neurons(t, p, SimilarityKind::kCosine, SummaryKind::kIdentity);
    REQUIRE(labels.size() == 4);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(labels[k].concept_name == concepts.item_ids[planted[k]]);
      CHECK(labels[k].neuron == NeuronRef{"l", k});
      CHECK(labels[k].flags.empty());
    }
    CHECK(labels[3].is_dead());
    CHECK(labels[3].flags == std::vector<std::string>{"dead"});
    CHECK(labels[3].score == static_cast<double>(std::numeric_limits<float>::lowest()));
  }

  TEST_CASE("labels equal the brute-force oracle on small instances") {
    std::mt19937_64 rng(13);
    for (int round = 0; round < 40; ++round) {
      const std::size_t n = 6, k = 4, m = 5;
      const auto images = test::random_unit_rows(rng, "img", n, 5);
      const auto concepts = test::random_unit_rows(rng, "c", m, 5);
      const auto p = concept_activation_matrix(images, concepts);
      auto t = test::random_tensor(rng, {n, k, 2, 2}, images.item_ids);
      if (round % 4 == 0) {
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t s = 0; s < 4; ++s) t.values[(i * k + 1) * 4 + s] = 1.0f;
        }
      }
      for (bool wpmi : {false, true}) {
        for (bool use_max : {false, true}) {
          const auto got = label_neurons(t, p, wpmi ? SimilarityKind::kRankWpmi : SimilarityKind::kCosine,
                                         use_max ? SummaryKind::kSpatialMax : SummaryKind::kSpatialMean);
          const auto want = oracle::label(t, as_rows(p), p.concepts, wpmi, use_max);
          REQUIRE(got.size() == want.size());
          for (std::size_t u = 0; u < k; ++u) {
            CHECK(got[u].is_dead() == want[u].dead);
            CHECK(got[u].concept_name == want[u].concept_name);
            if (!want[u].dead) CHECK(got[u].score == doctest::Approx(want[u].score).epsilon(1e-9));
          }
        }
      }
    }
  }

  TEST_CASE("argmax ties resolve to the lowest concept index") {
    // Columns 1 and 2 are identical, column 0 is the mirror image.
    const auto p = matrix_of({{0.9, 0.1, 0.1}, {0.5, 0.5, 0.5}, {0.1, 0.9, 0.9}});
    ActivationTensor t;
    t.model_id = "m";
    t.layer_id = "l";
    t.image_ids = p.image_ids;
    t.shape = {3, 1};
    t.values = {0.0f, 1.0f, 2.0f};
    const auto labels = label_neurons(t, p, SimilarityKind::kCosine, SummaryKind::kIdentity);
    CHECK(labels[0].concept_name == "c1");
  }

  TEST_CASE("image order mismatch is an error, never a silent reorder") {
    std::mt19937_64 rng(14);
    const auto images = test::random_unit_rows(rng, "img", 4, 4);
    const auto p = concept_activation_matrix(images, test::random_unit_rows(rng, "c", 3, 4));
    auto ids = images.item_ids;
    std::swap(ids[0], ids[1]);
    const auto t = test::random_tensor(rng, {4, 2}, ids);
    CHECK_THROWS_AS(label_neurons(t, p), InputError);
  }

  TEST_CASE("labels survive JSON Lines") {
    test::TempDir dir;
    std::vector<NeuronLabel> labels = {
        {{"layer1", 0}, "rug", 0.75, SimilarityKind::kCosine, SummaryKind::kSpatialMean, {}},
        {{"layer1", 1}, std::string(kDeadConcept), static_cast<double>(std::numeric_limits<float>::lowest()),
         SimilarityKind::kRankWpmi, SummaryKind::kSpatialMax, {"dead"}},
    };
    write_labels(labels, dir / "labels.jsonl");
    CHECK(read_labels(dir / "labels.jsonl") == labels);
    CHECK(labels_to_jsonl(labels).rfind(R"({"layer":"layer1","unit":0,"concept":"rug",)", 0) == 0);
    CHECK_THROWS_AS(labels_from_jsonl("{\"layer\": 1}\n"), FormatError);
    CHECK_THROWS_AS(labels_from_jsonl("not json\n"), FormatError);
  }

  TEST_CASE("kind names parse") {
    CHECK(parse_summary_kind("mean") == SummaryKind::kSpatialMean);
    CHECK(parse_summary_kind("spatial-max") == SummaryKind::kSpatialMax);
    CHECK(parse_similarity_kind("rank-wpmi") == SimilarityKind::kRankWpmi);
    CHECK_THROWS_AS(parse_similarity_kind("dot"), InputError);
  }
}
