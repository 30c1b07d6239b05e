#include <doctest.h>

#include <cmath>

#include "lgi/baselines.hpp"
#include "lgi/numeric.hpp"
#include "support/geweke.hpp"

using namespace lgi;
using lgi::testing::draw_state_from_prior;
using lgi::testing::GewekeSystem;
using lgi::testing::make_geweke_system;

TEST_CASE("covariate design has 1 + p_B + p_P coefficients") {
  auto g = make_geweke_system();
  CovState s = init_cov_state(g.data, g.traits_rows, g.traits_cols, true);
  CHECK(s.alpha.size() == 1 + g.traits_rows.p + g.traits_cols.p);
  CHECK(s.delta.size() == 1 + g.traits_rows.p);
  // L starts at A for both variants
  for (int j = 0; j < g.data.n_cols; ++j)
    for (int i = 0; i < g.data.n_rows; ++i)
      CHECK(s.L(i, j) == g.data.adjacency(i, j));
}

TEST_CASE("zero-overlap unrecorded pair draws from the bare interaction model") {
  auto g = make_geweke_system(2, 2);
  g.data.adjacency.setZero();
  g.data.overlap.setZero();
  CovState s = init_cov_state(g.data, g.traits_rows, g.traits_cols, true);
  s.alpha(0) = 0.4;  // known intercept, covariates at work values
  double expect = expit(cov_interaction_logit(s, 0, 0));
  CHECK(true_interaction_weight(expect, s.p_rows(0), s.p_cols(0), 0) ==
        doctest::Approx(expect));
}

TEST_CASE("binary imputation conditional matches two-point enumeration") {
  // 1 bird, 2 plants, one binary bird trait
  lgi::testing::GewekeSystem g = make_geweke_system(1, 2);
  g.traits_rows.p = 1;
  g.traits_rows.kind = {TraitKind::kBinary};
  g.traits_rows.names = {"b0"};
  g.traits_rows.values = MatrixXd::Zero(1, 1);
  g.traits_rows.missing.setConstant(1, 1, true);
  g.traits_rows.center = VectorXd::Zero(1);
  g.traits_rows.scale = VectorXd::Ones(1);

  CovState s = init_cov_state(g.data, g.traits_rows, g.traits_cols, true);
  s.alpha.setZero();
  s.alpha(0) = 0.2;
  s.alpha(1) = 0.9;        // the binary trait's interaction slope
  s.delta.setZero();
  s.delta(0) = -0.1;
  s.delta(1) = 0.6;
  s.mu_x(0) = logit(0.3);  // Bernoulli mean of the trait submodel
  s.p_rows(0) = 0.4;
  s.L(0, 0) = 1;
  s.L(0, 1) = 0;

  // direct enumeration over x in {0, 1}
  double w[2];
  for (int x = 0; x <= 1; ++x) {
    double lp0 = s.alpha(0) + s.alpha(1) * x + s.W.row(0) * s.alpha.tail(s.p_P);
    double lp1 = s.alpha(0) + s.alpha(1) * x + s.W.row(1) * s.alpha.tail(s.p_P);
    double lik = expit(lp0) * (1.0 - expit(lp1));
    double mu = s.delta(0) + s.delta(1) * x;
    double det = std::exp(log_normal_pdf(logit(0.4), mu, s.sigma2_p_rows));
    double prior = x == 1 ? 0.3 : 0.7;
    w[x] = lik * det * prior;
  }
  double expect = w[1] / (w[0] + w[1]);
  CHECK(cov_binary_imputation_prob(s, g.traits_rows, true, 0, 0, true) ==
        doctest::Approx(expect).epsilon(1e-10));

  // without bias correction the detection factor drops out
  for (int x = 0; x <= 1; ++x) {
    double lp0 = s.alpha(0) + s.alpha(1) * x + s.W.row(0) * s.alpha.tail(s.p_P);
    double lp1 = s.alpha(0) + s.alpha(1) * x + s.W.row(1) * s.alpha.tail(s.p_P);
    w[x] = expit(lp0) * (1.0 - expit(lp1)) * (x == 1 ? 0.3 : 0.7);
  }
  CHECK(cov_binary_imputation_prob(s, g.traits_rows, true, 0, 0, false) ==
        doctest::Approx(w[1] / (w[0] + w[1])).epsilon(1e-10));
}

TEST_CASE("cov-observed recovers the base rate with inert covariates") {
  // all covariate values zero: the intercept posterior concentrates near
  // logit(mean(A))
  auto g = make_geweke_system(8, 9);
  g.traits_rows.values.setZero();
  g.traits_cols.values.setZero();
  g.traits_rows.missing.setConstant(8, 2, false);
  g.traits_cols.missing.setConstant(9, 2, false);
  int ones = 0;
  for (int j = 0; j < 9; ++j)
    for (int i = 0; i < 8; ++i) {
      g.data.adjacency(i, j) = (i + j) % 3 == 0 ? 1 : 0;
      g.data.overlap(i, j) = std::max(g.data.overlap(i, j), g.data.adjacency(i, j));
      ones += g.data.adjacency(i, j);
    }
  ChainConfig cfg;
  cfg.n_iter = 1500;
  cfg.burn_in = 500;
  cfg.thin = 2;
  cfg.n_chains = 1;
  cfg.seed = 5;
  g.prior.sigma2_0 = 25.0;
  auto draws = fit_cov_observed(g.data, g.traits_rows, g.traits_cols, g.prior, cfg);
  double acc = 0.0;
  for (const auto& d : draws.chains[0]) acc += d.alpha(0);
  double mean_alpha0 = acc / static_cast<double>(draws.chains[0].size());
  double target = logit(static_cast<double>(ones) / (8.0 * 9.0));
  CHECK(std::fabs(mean_alpha0 - target) < 0.35);

  // fitted interaction probabilities stay inside (0,1)
  MatrixXd prob = draws.model_prob_mean();
  CHECK((prob.array() > 0.0).all());
  CHECK((prob.array() < 1.0).all());
}

TEST_CASE("baseline fits are seed-deterministic") {
  auto g = make_geweke_system();
  ChainConfig cfg;
  cfg.n_iter = 60;
  cfg.burn_in = 20;
  cfg.thin = 2;
  cfg.n_chains = 2;
  cfg.seed = 31;
  auto a = fit_cov_bias_corrected(g.data, g.traits_rows, g.traits_cols, g.prior, cfg);
  auto b = fit_cov_bias_corrected(g.data, g.traits_rows, g.traits_cols, g.prior, cfg);
  CHECK(a.l_sum == b.l_sum);
  CHECK(a.chains[1][3].alpha == b.chains[1][3].alpha);

  auto c = fit_latent_observed(g.data, g.traits_rows, g.traits_cols, g.C_rows,
                               g.C_cols, g.prior, cfg);
  auto d = fit_latent_observed(g.data, g.traits_rows, g.traits_cols, g.C_rows,
                               g.C_cols, g.prior, cfg);
  CHECK(c.prob_sum == d.prob_sum);
  // the observed-network variant never moves L away from A
  for (const auto& chain : c.l_draws)
    for (const auto& snap : chain)
      for (int j = 0; j < g.data.n_cols; ++j)
        for (int i = 0; i < g.data.n_rows; ++i)
          CHECK(snap.get(i, j) == (g.data.adjacency(i, j) == 1));
}

TEST_CASE("geweke: latent-observed sweep on a 3x4 toy") {
  // same joint-distribution check as the main engine, restricted to the
  // machinery this variant uses (no detection block, L pinned to A)
  GewekeSystem g = make_geweke_system(3, 4);
  const int cycles = 6000;
  SweepOptions opt;
  opt.bias_corrected = false;

  std::vector<double> mc_l0, mc_s2x, mc_rho;
  {
    Rng rng(91);
    for (int k = 0; k < cycles; ++k) {
      ParamState s = draw_state_from_prior(g, rng);
      mc_l0.push_back(s.lambda0);
      mc_s2x.push_back(s.sigma2_x(0));
      mc_rho.push_back(s.rho_rows);
    }
  }

  std::vector<double> sc_l0, sc_s2x, sc_rho;
  {
    Rng rng(92);
    GewekeSystem sys = make_geweke_system(3, 4);
    ParamState s = draw_state_from_prior(sys, rng);
    // in this model the observed network follows the interaction submodel
    // directly; the prior draw of L is exactly such a draw
    for (int j = 0; j < s.n_cols; ++j)
      for (int i = 0; i < s.n_rows; ++i) sys.data.adjacency(i, j) = s.L(i, j);
    GibbsContext ctx{sys.data, sys.traits_rows, sys.traits_cols, sys.C_rows,
                     sys.C_cols, sys.prior};
    SweepScratch scratch;
    for (int k = 0; k < cycles; ++k) {
      for (int j = 0; j < s.n_cols; ++j)
        for (int i = 0; i < s.n_rows; ++i)
          s.L(i, j) = static_cast<std::int8_t>(sys.data.adjacency(i, j));
      gibbs_sweep(s, ctx, scratch, rng, opt);
      // fresh data: A directly from the interaction model, traits from theirs
      for (int j = 0; j < s.n_cols; ++j)
        for (int i = 0; i < s.n_rows; ++i) {
          double lp = s.lambda0;
          for (int h = 0; h < s.H; ++h) lp += s.lambda(h) * s.U(i, h) * s.V(j, h);
          sys.data.adjacency(i, j) = rng.bernoulli(expit(lp)) ? 1 : 0;
        }
      lgi::testing::redraw_traits(sys, s, rng);
      sc_l0.push_back(s.lambda0);
      sc_s2x.push_back(s.sigma2_x(0));
      sc_rho.push_back(s.rho_rows);
    }
  }

  using lgi::testing::batch_summary;
  using lgi::testing::geweke_z;
  using lgi::testing::iid_summary;
  CHECK(geweke_z(iid_summary(mc_l0), batch_summary(sc_l0)) < 5.0);
  CHECK(geweke_z(iid_summary(mc_s2x), batch_summary(sc_s2x)) < 5.0);
  CHECK(geweke_z(iid_summary(mc_rho), batch_summary(sc_rho)) < 5.0);
}

TEST_CASE("cov-bc collapses to cov-obs when detection is certain") {
  // with p pinned at 1 and one chance per pair, a possible interaction is
  // always recorded, so L = A exactly and the two samplers share the same
  // interaction-coefficient conditional
  auto g = make_geweke_system(6, 7);
  Rng data_rng(41);
  for (int j = 0; j < 7; ++j)
    for (int i = 0; i < 6; ++i) {
      g.data.overlap(i, j) = 1;
      g.data.adjacency(i, j) = data_rng.bernoulli(0.35) ? 1 : 0;
    }
  g.traits_rows.missing.setConstant(6, 2, false);
  g.traits_cols.missing.setConstant(7, 2, false);

  const int sweeps = 4000, burn = 500;
  auto run = [&](bool bias) {
    Rng rng(42);
    CovState s = init_cov_state(g.data, g.traits_rows, g.traits_cols, bias);
    CovScratch scratch;
    MatrixXd acc = MatrixXd::Zero(6, 7);
    int kept = 0;
    for (int it = 0; it < sweeps; ++it) {
      if (bias) {
        s.p_rows.setConstant(1.0 - 1e-12);
        s.p_cols.setConstant(1.0 - 1e-12);
      }
      cov_sweep(s, g.data, g.traits_rows, g.traits_cols, g.prior, scratch, bias,
                rng);
      if (bias)
        for (int j = 0; j < 7; ++j)
          for (int i = 0; i < 6; ++i) CHECK(s.L(i, j) == g.data.adjacency(i, j));
      if (it < burn) continue;
      for (int j = 0; j < 7; ++j)
        for (int i = 0; i < 6; ++i)
          acc(i, j) += expit(cov_interaction_logit(s, i, j));
      ++kept;
    }
    return MatrixXd(acc / kept);
  };
  MatrixXd with_bias = run(true);
  MatrixXd without = run(false);
  CHECK((with_bias - without).cwiseAbs().maxCoeff() < 0.06);
  CHECK((with_bias - without).cwiseAbs().mean() < 0.02);
}
