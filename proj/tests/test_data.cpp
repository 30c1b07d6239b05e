#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "lgi/network_data.hpp"
#include "lgi/rng.hpp"

using namespace lgi;

namespace {

InteractionData from_string(const std::string& text) {
  std::istringstream in(text);
  return load_events(in, "test");
}

}  // namespace

TEST_CASE("load_events builds A and the study-overlap counts") {
  auto d = from_string(
      "study_id,row_species,col_species\n"
      "study1,b1,p1\n"
      "study2,b1,p2\n"
      "study2,b2,p2\n");
  REQUIRE(d.n_rows == 2);
  REQUIRE(d.n_cols == 2);
  CHECK(d.adjacency(0, 0) == 1);
  CHECK(d.overlap(0, 0) == 1);
  CHECK(d.adjacency(0, 1) == 1);
  CHECK(d.overlap(0, 1) == 1);
  CHECK(d.adjacency(1, 0) == 0);
  CHECK(d.overlap(1, 0) == 0);
  CHECK(d.row_ids[0] == "b1");  // first-appearance order
  CHECK(d.col_ids[1] == "p2");
}

TEST_CASE("load_events rejects empty and malformed input") {
  CHECK_THROWS_WITH_AS(from_string("study_id,row_species,col_species\n"),
                       doctest::Contains("no events"), std::runtime_error);
  CHECK_THROWS_WITH_AS(from_string("study_id,row_species,col_species\ns1,b1\n"),
                       doctest::Contains(":2"), std::runtime_error);
  // duplicates within a study collapse
  auto d = from_string(
      "study_id,row_species,col_species\ns1,b1,p1\ns1,b1,p1\n");
  CHECK(d.n_rows == 1);
  CHECK(d.overlap(0, 0) == 1);
}

TEST_CASE("singleton event stream") {
  auto d = from_string("study_id,row_species,col_species\ns1,b1,p1\n");
  CHECK(d.n_rows == 1);
  CHECK(d.n_cols == 1);
  CHECK(d.adjacency(0, 0) == 1);
  CHECK(d.overlap(0, 0) == 1);
}

TEST_CASE("recorded interaction implies overlap on random streams") {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<Event> events;
    int n_studies = 1 + static_cast<int>(rng.integer(10));
    for (int s = 0; s < n_studies; ++s)
      for (int k = 0; k < 8; ++k)
        events.push_back({"s" + std::to_string(s),
                          "b" + std::to_string(rng.integer(6)),
                          "p" + std::to_string(rng.integer(7))});
    auto d = build_interactions(events);

    // brute-force recount of the overlap rule
    std::map<std::string, std::pair<std::set<std::string>, std::set<std::string>>> per;
    for (const auto& e : events) {
      per[e.study].first.insert(e.row_species);
      per[e.study].second.insert(e.col_species);
    }
    for (int i = 0; i < d.n_rows; ++i)
      for (int j = 0; j < d.n_cols; ++j) {
        int n = 0;
        for (const auto& [study, sets] : per) {
          (void)study;
          if (sets.first.count(d.row_ids[i]) && sets.second.count(d.col_ids[j])) ++n;
        }
        CHECK(d.overlap(i, j) == n);
        if (d.adjacency(i, j) == 1) CHECK(d.overlap(i, j) >= 1);
      }
  }
}

TEST_CASE("trait loading standardizes continuous and validates binary") {
  std::istringstream in(
      "species_id,mass,flocking\n"
      "b1,1.0,0\n"
      "b2,3.0,1\n"
      "b3,NA,NA\n");
  auto tm = load_traits(in, "traits", {TraitKind::kContinuous, TraitKind::kBinary},
                        {"b1", "b2", "b3"});
  CHECK(tm.values(0, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(tm.values(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(tm.missing(2, 0));
  CHECK(tm.values(1, 1) == 1.0);
  CHECK(tm.missing(2, 1));
  CHECK(tm.center(0) == doctest::Approx(2.0));
  CHECK(tm.scale(0) == doctest::Approx(std::sqrt(2.0)));

  std::istringstream bad(
      "species_id,flag\n"
      "b1,2\n");
  CHECK_THROWS_WITH_AS(load_traits(bad, "traits", {TraitKind::kBinary}, {"b1"}),
                       doctest::Contains("binary"), std::runtime_error);
}

TEST_CASE("taxonomy correlation weights by finest shared rank") {
  TaxonomyTable tax;
  tax.species_ids = {"a", "b", "c", "d", "e"};
  tax.genus = {"g1", "g1", "g2", "g3", "g4"};
  tax.family = {"f1", "f1", "f1", "f2", "f3"};
  tax.order = {"o1", "o1", "o1", "o1", "o2"};
  auto corr = build_taxonomy_correlation(tax, tax.species_ids);
  CHECK(corr.C(0, 0) == 1.0);
  CHECK(corr.C(0, 1) == 0.75);  // same genus
  CHECK(corr.C(0, 2) == 0.5);   // same family, different genus
  CHECK(corr.C(0, 3) == 0.25);  // same order only
  CHECK(corr.C(0, 4) == 0.0);   // unrelated
  CHECK(corr.C == corr.C.transpose());

  CHECK_THROWS_WITH_AS(build_taxonomy_correlation(tax, {"a", "zz"}),
                       doctest::Contains("zz"), std::runtime_error);
}

TEST_CASE("taxonomy correlation is equivariant under species reordering") {
  TaxonomyTable tax;
  tax.species_ids = {"a", "b", "c", "d"};
  tax.genus = {"g1", "g2", "g1", "g3"};
  tax.family = {"f1", "f1", "f1", "f2"};
  tax.order = {"", "", "", ""};
  auto c1 = build_taxonomy_correlation(tax, {"a", "b", "c", "d"});
  auto c2 = build_taxonomy_correlation(tax, {"d", "c", "b", "a"});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(c1.C(i, j) == c2.C(3 - i, 3 - j));
}

TEST_CASE("blend_correlation blends toward the identity") {
  MatrixXd C = MatrixXd::Identity(2, 2);
  C(0, 1) = C(1, 0) = 0.75;
  CHECK(blend_correlation(C, 0.0) == MatrixXd::Identity(2, 2));
  CHECK(blend_correlation(C, 1.0) == C);
  auto half = blend_correlation(C, 0.5);
  CHECK(half(0, 1) == doctest::Approx(0.375));
  CHECK(half(0, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(blend_correlation(C, 1.5), std::domain_error);
  CHECK_THROWS_AS(blend_correlation(C, -0.1), std::domain_error);
}

TEST_CASE("blended matrices keep eigenvalues above 1 - rho") {
  TaxonomyTable tax;
  tax.species_ids = {"a", "b", "c", "d", "e", "f"};
  tax.genus = {"g1", "g1", "g2", "g2", "g3", "g3"};
  tax.family = {"f1", "f1", "f1", "f2", "f2", "f2"};
  tax.order = {"o", "o", "o", "o", "o", "o"};
  auto corr = build_taxonomy_correlation(tax, tax.species_ids);
  for (double rho : {0.2, 0.6, 0.95}) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(blend_correlation(corr.C, rho));
    CHECK(es.eigenvalues().minCoeff() >= (1.0 - rho) - 1e-10);
  }
}

TEST_CASE("effort summary flags zero-effort species and bins the rest") {
  InteractionData d;
  d.n_rows = 2;
  d.n_cols = 2;
  d.adjacency = MatrixXi::Zero(2, 2);
  d.overlap.resize(2, 2);
  d.overlap << 1, 2, 0, 0;
  auto eff = compute_effort(d);
  CHECK(eff.row_effort(0) == 3.0);
  CHECK(eff.row_effort(1) == 0.0);
  CHECK(eff.row_bin(1) == -1);
  CHECK(eff.row_bin(0) >= 0);

  d.overlap.setZero();
  eff = compute_effort(d);
  CHECK((eff.row_bin.array() == -1).all());
  CHECK((eff.col_bin.array() == -1).all());

  d.overlap << 5, 0, 0, 0;
  eff = compute_effort(d);
  CHECK(eff.row_effort(0) == 5.0);
  CHECK(eff.col_effort(0) == 5.0);
}
