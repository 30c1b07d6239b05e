#include <doctest.h>

#include <cmath>

#include "lgi/numeric.hpp"
#include "lgi/simbench.hpp"

using namespace lgi;

TEST_CASE("auroc: pairwise concordance with ties at half") {
  VectorXd s(4);
  s << 0.9, 0.8, 0.4, 0.2;
  CHECK(auroc(s, {1, 0, 1, 0}) == doctest::Approx(0.75));

  VectorXd sep(4);
  sep << 0.9, 0.8, 0.2, 0.1;
  CHECK(auroc(sep, {1, 1, 0, 0}) == doctest::Approx(1.0));

  VectorXd tied = VectorXd::Constant(6, 0.5);
  CHECK(auroc(tied, {1, 0, 1, 0, 1, 0}) == doctest::Approx(0.5));

  CHECK_THROWS_AS(auroc(s, {1, 1, 1, 1}), std::invalid_argument);
}

TEST_CASE("auroc is invariant under strictly monotone score transforms") {
  Rng rng(3);
  VectorXd s(30);
  std::vector<int> labels(30);
  for (int i = 0; i < 30; ++i) {
    s(i) = rng.normal();
    labels[i] = rng.bernoulli(0.4);
  }
  labels[0] = 1;
  labels[1] = 0;
  double base = auroc(s, labels);
  VectorXd t = s.unaryExpr([](double v) { return std::exp(3.0 * v) + 7.0; });
  CHECK(auroc(t, labels) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("generate_dataset is deterministic and respects the support rule") {
  auto opt = desk_preset(1);
  opt.n_rows = 30;
  opt.n_cols = 40;
  opt.n_heldout_rows = 5;
  opt.n_heldout_cols = 5;
  auto a = generate_dataset(opt, 99);
  auto b = generate_dataset(opt, 99);
  CHECK(a.data.adjacency == b.data.adjacency);
  CHECK((a.truth.L_true == b.truth.L_true));
  CHECK(a.traits_rows.values == b.traits_rows.values);

  for (int j = 0; j < opt.n_cols; ++j)
    for (int i = 0; i < opt.n_rows; ++i)
      if (a.data.adjacency(i, j) == 1) {
        CHECK(a.truth.L_true(i, j) == 1);
        CHECK(a.data.overlap(i, j) >= 1);
      }

  // held-out species have no observational effort at all
  for (int i : a.truth.heldout_rows) CHECK(a.data.overlap.row(i).sum() == 0);
  for (int j : a.truth.heldout_cols) CHECK(a.data.overlap.col(j).sum() == 0);
}

TEST_CASE("intercept calibration hits the target density across seeds") {
  auto opt = desk_preset(1);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto sim = generate_dataset(opt, seed);
    CHECK(std::fabs(sim.truth.achieved_density - opt.target_density) < 0.005);
  }
}

TEST_CASE("dgm1 with zero slopes is an intercept-only Bernoulli field") {
  auto opt = desk_preset(1);
  opt.slope = 0.0;
  opt.n_rows = 50;
  opt.n_cols = 60;
  auto sim = generate_dataset(opt, 5);
  CHECK((sim.truth.prob_true.array() == sim.truth.prob_true(0, 0)).all());
  double mean_l = sim.truth.L_true.cast<double>().mean();
  double p = sim.truth.prob_true(0, 0);
  CHECK(std::fabs(mean_l - p) < 4.0 * std::sqrt(p * (1 - p) / (50.0 * 60.0)));
}

TEST_CASE("the three mechanisms and presets produce consistent shapes") {
  for (int dgm : {1, 2, 3}) {
    auto opt = desk_preset(dgm);
    opt.n_rows = 24;
    opt.n_cols = 30;
    opt.n_heldout_rows = 3;
    opt.n_heldout_cols = 3;
    auto sim = generate_dataset(opt, 7);
    CHECK(sim.traits_rows.p == 5);
    CHECK(sim.traits_cols.p == 12);
    CHECK(sim.traits_rows.n_continuous() == 2);
    CHECK(sim.traits_cols.n_continuous() == 4);
    CHECK(static_cast<int>(sim.truth.heldout_rows.size()) == 3);
  }
  CHECK_THROWS_AS(generate_dataset(desk_preset(4), 1), std::invalid_argument);
}

TEST_CASE("evaluate_stratified: perfect and random predictions") {
  auto opt = desk_preset(1);
  opt.n_rows = 30;
  opt.n_cols = 40;
  opt.n_heldout_rows = 4;
  opt.n_heldout_cols = 4;
  auto sim = generate_dataset(opt, 11);
  auto effort = compute_effort(sim.data);

  MatrixXd perfect = sim.truth.L_true.cast<double>();
  auto table = evaluate_stratified(perfect, sim, effort);
  const EvalRow* overall = table.find("unrecorded", "", -1);
  REQUIRE(overall != nullptr);
  CHECK(overall->auroc_value == doctest::Approx(1.0));
  // single-class strata come back undefined, not as an error
  const EvalRow* pos_only = table.find("unrecorded-true", "", -1);
  REQUIRE(pos_only != nullptr);
  CHECK_FALSE(pos_only->defined());

  Rng rng(13);
  MatrixXd random(30, 40);
  for (int j = 0; j < 40; ++j)
    for (int i = 0; i < 30; ++i) random(i, j) = rng.uniform();
  auto rtable = evaluate_stratified(random, sim, effort);
  const EvalRow* r = rtable.find("unrecorded", "", -1);
  double n_pos = r->n_positive, n_neg = r->n_negative;
  double se = std::sqrt((n_pos + n_neg + 1.0) / (12.0 * n_pos * n_neg));
  CHECK(std::fabs(r->auroc_value - 0.5) < 4.0 * se);

  // oracle scoring is present wherever the stratum is defined
  CHECK(r->oracle_auroc > 0.5);
}

TEST_CASE("holdout_cv masks recorded cells without touching the overlap") {
  auto opt = desk_preset(1);
  opt.n_rows = 25;
  opt.n_cols = 30;
  opt.n_heldout_rows = 4;
  opt.n_heldout_cols = 4;
  auto sim = generate_dataset(opt, 17);
  Rng rng(19);
  auto reps = holdout_cv(sim.data, 5, 3, rng);
  REQUIRE(reps.size() == 3);
  for (const auto& rep : reps) {
    CHECK(rep.cells.size() == 5);
    CHECK(rep.masked.overlap == sim.data.overlap);
    for (auto [i, j] : rep.cells) {
      CHECK(sim.data.adjacency(i, j) == 1);
      CHECK(rep.masked.adjacency(i, j) == 0);
      CHECK(rep.masked.overlap(i, j) >= 1);
    }
  }
  CHECK_THROWS_AS(holdout_cv(sim.data, 0, 3, rng), std::invalid_argument);
  CHECK_THROWS_AS(holdout_cv(sim.data, 1000000, 3, rng), std::invalid_argument);
}

TEST_CASE("holdout_ratio compares held-out cells against all unrecorded") {
  InteractionData data;
  data.n_rows = 2;
  data.n_cols = 2;
  data.adjacency = MatrixXi::Zero(2, 2);
  data.overlap = MatrixXi::Ones(2, 2);
  HoldoutRep rep;
  rep.masked = data;
  rep.cells = {{0, 0}};
  MatrixXd prob(2, 2);
  prob << 0.8, 0.2, 0.1, 0.1;
  auto ratio = holdout_ratio(prob, rep);
  CHECK(ratio.mean_ratio == doctest::Approx(0.8 / 0.3));
}
