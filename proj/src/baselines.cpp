#include "lgi/baselines.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <iostream>
#include <thread>

#include "lgi/numeric.hpp"
#include "lgi/polya_gamma.hpp"

namespace lgi {

namespace {

double log_one_minus_pow(double q, int n) {
  return std::log(-std::expm1(static_cast<double>(n) * std::log1p(-q)));
}

}  // namespace

CovState init_cov_state(const InteractionData& data, const TraitMatrix& traits_rows,
                        const TraitMatrix& traits_cols, bool bias_corrected) {
  CovState s;
  s.n_rows = data.n_rows;
  s.n_cols = data.n_cols;
  s.p_B = traits_rows.p;
  s.p_P = traits_cols.p;
  s.alpha = VectorXd::Zero(1 + s.p_B + s.p_P);
  s.delta = VectorXd::Zero(1 + s.p_B);
  s.zeta = VectorXd::Zero(1 + s.p_P);
  s.sigma2_p_rows = s.sigma2_p_cols = 1.0;
  s.p_rows = VectorXd::Constant(s.n_rows, 0.5);
  s.p_cols = VectorXd::Constant(s.n_cols, 0.5);

  auto init_traits = [](const TraitMatrix& tm, VectorXd& mu, VectorXd& sigma2,
                        MatrixXd& work) {
    mu = VectorXd::Zero(std::max(tm.p, 1));
    sigma2 = VectorXd::Ones(std::max(tm.p, 1));
    work = tm.values;
    for (int m = 0; m < tm.p; ++m) {
      double sum = 0.0;
      int cnt = 0;
      for (int i = 0; i < tm.n; ++i)
        if (!tm.missing(i, m)) {
          sum += tm.values(i, m);
          ++cnt;
        }
      double mean = cnt > 0 ? sum / cnt : 0.0;
      if (tm.kind[m] == TraitKind::kBinary) {
        double q = std::min(std::max(mean, 0.02), 0.98);
        mu(m) = logit(q);
        for (int i = 0; i < tm.n; ++i)
          if (tm.missing(i, m)) work(i, m) = mean >= 0.5 ? 1.0 : 0.0;
      } else {
        mu(m) = mean;
        for (int i = 0; i < tm.n; ++i)
          if (tm.missing(i, m)) work(i, m) = mean;
      }
    }
  };
  init_traits(traits_rows, s.mu_x, s.sigma2_x, s.X);
  init_traits(traits_cols, s.mu_w, s.sigma2_w, s.W);

  s.L.resize(s.n_rows, s.n_cols);
  for (int j = 0; j < s.n_cols; ++j)
    for (int i = 0; i < s.n_rows; ++i)
      s.L(i, j) = static_cast<std::int8_t>(data.adjacency(i, j));
  (void)bias_corrected;
  return s;
}

double cov_interaction_logit(const CovState& s, int i, int j) {
  double lp = s.alpha(0);
  lp += s.X.row(i) * s.alpha.segment(1, s.p_B);
  lp += s.W.row(j) * s.alpha.segment(1 + s.p_B, s.p_P);
  return lp;
}

namespace {

void cov_update_l(CovState& s, const InteractionData& data, Rng& rng) {
  for (int j = 0; j < s.n_cols; ++j)
    for (int i = 0; i < s.n_rows; ++i) {
      if (data.adjacency(i, j) == 1) continue;
      double w = true_interaction_weight(expit(cov_interaction_logit(s, i, j)),
                                         s.p_rows(i), s.p_cols(j),
                                         data.overlap(i, j));
      s.L(i, j) = rng.bernoulli(w) ? 1 : 0;
    }
}

void cov_update_alpha(CovState& s, const PriorConfig& prior, CovScratch& scratch,
                      Rng& rng) {
  int k = 1 + s.p_B + s.p_P;
  scratch.omega_l.resize(s.n_rows, s.n_cols);
  MatrixXd precision = MatrixXd::Zero(k, k);
  VectorXd linear = VectorXd::Zero(k);
  VectorXd d(k);
  for (int j = 0; j < s.n_cols; ++j) {
    for (int i = 0; i < s.n_rows; ++i) {
      double lp = cov_interaction_logit(s, i, j);
      double w = draw_pg1(lp, rng);
      scratch.omega_l(i, j) = w;
      d(0) = 1.0;
      d.segment(1, s.p_B) = s.X.row(i).transpose();
      d.segment(1 + s.p_B, s.p_P) = s.W.row(j).transpose();
      precision.selfadjointView<Eigen::Lower>().rankUpdate(d, w);
      linear += (s.L(i, j) - 0.5) * d;
    }
  }
  MatrixXd sym = precision.selfadjointView<Eigen::Lower>();
  precision = sym;
  precision.diagonal().array() += 1.0 / prior.sigma2_0;
  s.alpha = gaussian_conditional_from_normal_eq(precision, linear).draw(rng);
}

void cov_update_detection_coeffs(CovState& s, const PriorConfig& prior, Rng& rng) {
  auto update_side = [&](const MatrixXd& covs, const VectorXd& p, VectorXd& coef,
                         double& sigma2) {
    int n = static_cast<int>(covs.rows());
    int q = static_cast<int>(covs.cols());
    MatrixXd design(n, q + 1);
    design.col(0).setOnes();
    design.rightCols(q) = covs;
    VectorXd response(n);
    for (int i = 0; i < n; ++i) response(i) = logit(p(i));
    VectorXd omega = VectorXd::Constant(n, 1.0 / sigma2);
    VectorXd prior_prec = VectorXd::Constant(q + 1, 1.0 / prior.sigma2_0);
    VectorXd prior_mean = VectorXd::Zero(q + 1);
    coef = gaussian_conditional(design, response / sigma2, omega, prior_prec,
                                prior_mean)
               .draw(rng);
    double ssr = (response - design * coef).squaredNorm();
    sigma2 = rng.inv_gamma(prior.a_sigma + 0.5 * n, prior.b_sigma + 0.5 * ssr);
  };
  update_side(s.X, s.p_rows, s.delta, s.sigma2_p_rows);
  update_side(s.W, s.p_cols, s.zeta, s.sigma2_p_cols);
}

void cov_update_detection_probs(CovState& s, const InteractionData& data,
                                const PriorConfig& prior, Rng& rng) {
  double n_conc = prior.mh_concentration;
  auto mh = [&](double& p, double mu, double var,
                const std::function<double(double)>& log_lik) {
    double x = rng.beta(n_conc * p, n_conc * (1.0 - p));
    if (!(x > 0.0 && x < 1.0) || !std::isfinite(x)) return;
    double log_ap = log_lik(x) - log_lik(p);
    log_ap += log_normal_pdf(logit(x), mu, var) - log_normal_pdf(logit(p), mu, var);
    log_ap += std::log(p * (1.0 - p)) - std::log(x * (1.0 - x));
    log_ap += log_beta_pdf(p, n_conc * x, n_conc * (1.0 - x)) -
              log_beta_pdf(x, n_conc * p, n_conc * (1.0 - p));
    if (std::log(rng.uniform()) < log_ap) p = x;
  };

  for (int i = 0; i < s.n_rows; ++i) {
    double mu = s.delta(0) + s.X.row(i) * s.delta.tail(s.p_B);
    mh(s.p_rows(i), mu, s.sigma2_p_rows, [&](double p) {
      double acc = 0.0;
      for (int j = 0; j < s.n_cols; ++j) {
        if (s.L(i, j) != 1 || data.overlap(i, j) == 0) continue;
        double q = p * s.p_cols(j);
        if (data.adjacency(i, j) == 1)
          acc += log_one_minus_pow(q, data.overlap(i, j));
        else
          acc += data.overlap(i, j) * std::log1p(-q);
      }
      return acc;
    });
  }
  for (int j = 0; j < s.n_cols; ++j) {
    double mu = s.zeta(0) + s.W.row(j) * s.zeta.tail(s.p_P);
    mh(s.p_cols(j), mu, s.sigma2_p_cols, [&](double p) {
      double acc = 0.0;
      for (int i = 0; i < s.n_rows; ++i) {
        if (s.L(i, j) != 1 || data.overlap(i, j) == 0) continue;
        double q = s.p_rows(i) * p;
        if (data.adjacency(i, j) == 1)
          acc += log_one_minus_pow(q, data.overlap(i, j));
        else
          acc += data.overlap(i, j) * std::log1p(-q);
      }
      return acc;
    });
  }
}

void cov_update_trait_means(CovState& s, const TraitMatrix& traits_rows,
                            const TraitMatrix& traits_cols,
                            const PriorConfig& prior, Rng& rng) {
  auto update_side = [&](const TraitMatrix& tm, MatrixXd& work, VectorXd& mu,
                         VectorXd& sigma2) {
    int n = tm.n;
    for (int m = 0; m < tm.p; ++m) {
      if (tm.kind[m] == TraitKind::kContinuous) {
        double var_new = 1.0 / (n / sigma2(m) + 1.0 / prior.sigma2_0);
        double mean_new = var_new * (work.col(m).sum() / sigma2(m) +
                                     prior.mu0 / prior.sigma2_0);
        mu(m) = rng.normal(mean_new, std::sqrt(var_new));
        double ssr = (work.col(m).array() - mu(m)).square().sum();
        sigma2(m) = rng.inv_gamma(prior.a_sigma + 0.5 * n, prior.b_sigma + 0.5 * ssr);
      } else {
        double sum_omega = 0.0;
        for (int i = 0; i < n; ++i) sum_omega += draw_pg1(mu(m), rng);
        double var_new = 1.0 / (sum_omega + 1.0 / prior.sigma2_0);
        double mean_new = var_new * ((work.col(m).array() - 0.5).sum() +
                                     prior.mu0 / prior.sigma2_0);
        mu(m) = rng.normal(mean_new, std::sqrt(var_new));
      }
    }
  };
  update_side(traits_rows, s.X, s.mu_x, s.sigma2_x);
  update_side(traits_cols, s.W, s.mu_w, s.sigma2_w);
}

}  // namespace

double cov_binary_imputation_prob(const CovState& s, const TraitMatrix& traits,
                                  bool row_side, int unit, int trait,
                                  bool bias_corrected) {
  (void)traits;
  double logw[2];
  for (int x = 0; x <= 1; ++x) {
    double acc = 0.0;
    if (row_side) {
      double xm = s.X(unit, trait);
      const_cast<CovState&>(s).X(unit, trait) = x;
      for (int j = 0; j < s.n_cols; ++j) {
        double p = expit(cov_interaction_logit(s, unit, j));
        acc += s.L(unit, j) == 1 ? std::log(p) : std::log1p(-p);
      }
      if (bias_corrected) {
        double mu = s.delta(0) + s.X.row(unit) * s.delta.tail(s.p_B);
        acc += log_normal_pdf(logit(s.p_rows(unit)), mu, s.sigma2_p_rows);
      }
      const_cast<CovState&>(s).X(unit, trait) = xm;
      double prob1 = expit(s.mu_x(trait));
      acc += x == 1 ? std::log(prob1) : std::log1p(-prob1);
    } else {
      double xm = s.W(unit, trait);
      const_cast<CovState&>(s).W(unit, trait) = x;
      for (int i = 0; i < s.n_rows; ++i) {
        double p = expit(cov_interaction_logit(s, i, unit));
        acc += s.L(i, unit) == 1 ? std::log(p) : std::log1p(-p);
      }
      if (bias_corrected) {
        double mu = s.zeta(0) + s.W.row(unit) * s.zeta.tail(s.p_P);
        acc += log_normal_pdf(logit(s.p_cols(unit)), mu, s.sigma2_p_cols);
      }
      const_cast<CovState&>(s).W(unit, trait) = xm;
      double prob1 = expit(s.mu_w(trait));
      acc += x == 1 ? std::log(prob1) : std::log1p(-prob1);
    }
    logw[x] = acc;
  }
  double m = std::max(logw[0], logw[1]);
  double w1 = std::exp(logw[1] - m);
  return w1 / (std::exp(logw[0] - m) + w1);
}

namespace {

void cov_impute_missing(CovState& s, const TraitMatrix& traits_rows,
                        const TraitMatrix& traits_cols, const CovScratch& scratch,
                        const PriorConfig& prior, bool bias_corrected, Rng& rng) {
  (void)prior;
  // bird side
  for (int m = 0; m < s.p_B; ++m) {
    bool binary = traits_rows.kind[m] == TraitKind::kBinary;
    for (int i = 0; i < s.n_rows; ++i) {
      if (!traits_rows.missing(i, m)) continue;
      if (binary) {
        double p1 = cov_binary_imputation_prob(s, traits_rows, true, i, m,
                                               bias_corrected);
        s.X(i, m) = rng.bernoulli(p1) ? 1.0 : 0.0;
        continue;
      }
      double am = s.alpha(1 + m);
      double dm = s.delta(1 + m);
      double prec = 1.0 / s.sigma2_x(m);
      double lin = s.mu_x(m) / s.sigma2_x(m);
      for (int j = 0; j < s.n_cols; ++j) {
        double w = scratch.omega_l(i, j);
        // linear predictor with the m-th covariate removed
        double lp_minus = cov_interaction_logit(s, i, j) - am * s.X(i, m);
        prec += am * am * w;
        lin += am * ((s.L(i, j) - 0.5) - w * lp_minus);
      }
      if (bias_corrected) {
        double mu_minus =
            s.delta(0) + s.X.row(i) * s.delta.tail(s.p_B) - dm * s.X(i, m);
        prec += dm * dm / s.sigma2_p_rows;
        lin += dm * (logit(s.p_rows(i)) - mu_minus) / s.sigma2_p_rows;
      }
      double var = 1.0 / prec;
      s.X(i, m) = rng.normal(var * lin, std::sqrt(var));
    }
  }
  // plant side
  for (int l = 0; l < s.p_P; ++l) {
    bool binary = traits_cols.kind[l] == TraitKind::kBinary;
    for (int j = 0; j < s.n_cols; ++j) {
      if (!traits_cols.missing(j, l)) continue;
      if (binary) {
        double p1 = cov_binary_imputation_prob(s, traits_cols, false, j, l,
                                               bias_corrected);
        s.W(j, l) = rng.bernoulli(p1) ? 1.0 : 0.0;
        continue;
      }
      double al = s.alpha(1 + s.p_B + l);
      double zl = s.zeta(1 + l);
      double prec = 1.0 / s.sigma2_w(l);
      double lin = s.mu_w(l) / s.sigma2_w(l);
      for (int i = 0; i < s.n_rows; ++i) {
        double w = scratch.omega_l(i, j);
        double lp_minus = cov_interaction_logit(s, i, j) - al * s.W(j, l);
        prec += al * al * w;
        lin += al * ((s.L(i, j) - 0.5) - w * lp_minus);
      }
      if (bias_corrected) {
        double mu_minus =
            s.zeta(0) + s.W.row(j) * s.zeta.tail(s.p_P) - zl * s.W(j, l);
        prec += zl * zl / s.sigma2_p_cols;
        lin += zl * (logit(s.p_cols(j)) - mu_minus) / s.sigma2_p_cols;
      }
      double var = 1.0 / prec;
      s.W(j, l) = rng.normal(var * lin, std::sqrt(var));
    }
  }
}

}  // namespace

void cov_sweep(CovState& s, const InteractionData& data,
               const TraitMatrix& traits_rows, const TraitMatrix& traits_cols,
               const PriorConfig& prior, CovScratch& scratch, bool bias_corrected,
               Rng& rng) {
  if (bias_corrected) cov_update_l(s, data, rng);
  cov_update_alpha(s, prior, scratch, rng);
  if (bias_corrected) {
    cov_update_detection_coeffs(s, prior, rng);
    cov_update_detection_probs(s, data, prior, rng);
  }
  cov_update_trait_means(s, traits_rows, traits_cols, prior, rng);
  cov_impute_missing(s, traits_rows, traits_cols, scratch, prior, bias_corrected,
                     rng);
}

namespace {

PosteriorDraws fit_cov_model(const InteractionData& data,
                             const TraitMatrix& traits_rows,
                             const TraitMatrix& traits_cols,
                             const PriorConfig& prior, const ChainConfig& cfg,
                             bool bias_corrected) {
  cfg.validate();
  prior.validate();
  std::cerr << "note: " << (bias_corrected ? "cov-bc" : "cov-obs")
            << " ignores the latent-factor prior fields of the config\n";

  PosteriorDraws out;
  out.model = bias_corrected ? ModelKind::kCovBiasCorrected : ModelKind::kCovObserved;
  out.n_rows = data.n_rows;
  out.n_cols = data.n_cols;
  out.H = 0;
  out.p_B = traits_rows.p;
  out.p_P = traits_cols.p;
  out.prior = prior;
  out.chain_config = cfg;
  out.l_sum = MatrixXd::Zero(data.n_rows, data.n_cols);
  out.prob_sum = MatrixXd::Zero(data.n_rows, data.n_cols);

  Rng track_rng = Rng::child(cfg.seed, {0x747261636bULL});
  auto pick = [&](int n, int count) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    for (int i = 0; i < n; ++i)
      std::swap(all[i], all[static_cast<int>(track_rng.integer(n))]);
    all.resize(std::min(count, n));
    std::sort(all.begin(), all.end());
    return all;
  };
  out.tracked_rows = pick(data.n_rows, 4);
  out.tracked_cols = pick(data.n_cols, 4);

  struct ChainOut {
    std::vector<ParamDraw> draws;
    std::vector<BitMatrix> l_draws;
    MatrixXd l_sum, prob_sum;
    std::map<std::string, std::vector<double>> series;
  };
  std::vector<ChainOut> results(cfg.n_chains);

  auto run_one = [&](int c) {
    Rng rng = Rng::child(cfg.seed, {0x636861696eULL, static_cast<std::uint64_t>(c)});
    CovState s = init_cov_state(data, traits_rows, traits_cols, bias_corrected);
    CovScratch scratch;
    ChainOut& res = results[c];
    res.l_sum = MatrixXd::Zero(data.n_rows, data.n_cols);
    res.prob_sum = MatrixXd::Zero(data.n_rows, data.n_cols);
    for (int iter = 1; iter <= cfg.n_iter; ++iter) {
      cov_sweep(s, data, traits_rows, traits_cols, prior, scratch, bias_corrected,
                rng);
      if (!s.alpha.allFinite())
        throw std::runtime_error("non-finite state at iteration " +
                                 std::to_string(iter));
      if (iter <= cfg.burn_in || (iter - cfg.burn_in) % cfg.thin != 0) continue;

      ParamDraw d;
      d.alpha = s.alpha;
      d.delta0 = s.delta(0);
      d.delta = s.delta.tail(s.p_B);
      d.sigma2_p_rows = s.sigma2_p_rows;
      d.zeta0 = s.zeta(0);
      d.zeta = s.zeta.tail(s.p_P);
      d.sigma2_p_cols = s.sigma2_p_cols;
      d.p_rows = s.p_rows;
      d.p_cols = s.p_cols;
      d.sigma2_x = s.sigma2_x;
      d.sigma2_w = s.sigma2_w;
      d.mu_x = s.mu_x;
      d.mu_w = s.mu_w;
      res.draws.push_back(std::move(d));

      for (int j = 0; j < data.n_cols; ++j)
        for (int i = 0; i < data.n_rows; ++i) {
          res.l_sum(i, j) += s.L(i, j);
          res.prob_sum(i, j) += expit(cov_interaction_logit(s, i, j));
        }
      if (cfg.keep_l_draws) {
        BitMatrix snap(data.n_rows, data.n_cols);
        for (int j = 0; j < data.n_cols; ++j)
          for (int i = 0; i < data.n_rows; ++i) snap.set(i, j, s.L(i, j) == 1);
        res.l_draws.push_back(std::move(snap));
      }
      res.series["alpha_0"].push_back(s.alpha(0));
      if (bias_corrected) {
        res.series["sigma2_p_rows"].push_back(s.sigma2_p_rows);
        res.series["sigma2_p_cols"].push_back(s.sigma2_p_cols);
        for (int i : out.tracked_rows)
          res.series["p_row_" + std::to_string(i)].push_back(s.p_rows(i));
        for (int j : out.tracked_cols)
          res.series["p_col_" + std::to_string(j)].push_back(s.p_cols(j));
      }
      for (int m = 0; m < s.p_B; ++m)
        if (traits_rows.kind[m] == TraitKind::kContinuous)
          res.series["sigma2_x_" + std::to_string(m)].push_back(s.sigma2_x(m));
      for (int l = 0; l < s.p_P; ++l)
        if (traits_cols.kind[l] == TraitKind::kContinuous)
          res.series["sigma2_w_" + std::to_string(l)].push_back(s.sigma2_w(l));
    }
  };

  int hw = static_cast<int>(std::thread::hardware_concurrency());
  int max_threads = cfg.threads > 0 ? cfg.threads : (hw > 0 ? hw : 1);
  if (max_threads <= 1 || cfg.n_chains == 1) {
    for (int c = 0; c < cfg.n_chains; ++c) run_one(c);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(cfg.n_chains);
    int n_workers = std::min(max_threads, cfg.n_chains);
    for (int w = 0; w < n_workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          int c = next.fetch_add(1);
          if (c >= cfg.n_chains) return;
          try {
            run_one(c);
          } catch (...) {
            errors[c] = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  for (auto& r : results) {
    out.chains.push_back(std::move(r.draws));
    out.l_sum += r.l_sum;
    out.prob_sum += r.prob_sum;
    out.series.push_back(std::move(r.series));
    if (cfg.keep_l_draws) out.l_draws.push_back(std::move(r.l_draws));
  }
  return out;
}

}  // namespace

PosteriorDraws fit_cov_bias_corrected(const InteractionData& data,
                                      const TraitMatrix& traits_rows,
                                      const TraitMatrix& traits_cols,
                                      const PriorConfig& prior,
                                      const ChainConfig& cfg) {
  return fit_cov_model(data, traits_rows, traits_cols, prior, cfg, true);
}

PosteriorDraws fit_cov_observed(const InteractionData& data,
                                const TraitMatrix& traits_rows,
                                const TraitMatrix& traits_cols,
                                const PriorConfig& prior, const ChainConfig& cfg) {
  return fit_cov_model(data, traits_rows, traits_cols, prior, cfg, false);
}

PosteriorDraws fit_latent_observed(const InteractionData& data,
                                   const TraitMatrix& traits_rows,
                                   const TraitMatrix& traits_cols,
                                   const MatrixXd& C_rows, const MatrixXd& C_cols,
                                   const PriorConfig& prior,
                                   const ChainConfig& cfg) {
  return run_chain(cfg, prior, data, traits_rows, traits_cols, C_rows, C_cols,
                   ModelKind::kLatentObserved);
}

}  // namespace lgi
