#include "lgi/gibbs.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

#include "lgi/numeric.hpp"

namespace lgi {

namespace {

// log(1 - (1 - q)^n) for q in (0,1), n >= 1
double log_one_minus_pow(double q, int n) {
  return std::log(-std::expm1(static_cast<double>(n) * std::log1p(-q)));
}

VectorXd logit_vector(const VectorXd& p) {
  VectorXd out(p.size());
  for (int i = 0; i < p.size(); ++i) out(i) = logit(p(i));
  return out;
}

}  // namespace

double true_interaction_weight(double p_interaction, double p_row, double p_col,
                               int n_overlap) {
  double undetected = std::exp(static_cast<double>(n_overlap) *
                               std::log1p(-p_row * p_col));
  double w1 = p_interaction * undetected;
  return w1 / ((1.0 - p_interaction) + w1);
}

void update_true_interactions(ParamState& s, const InteractionData& data, Rng& rng) {
  MatrixXd lp = interaction_logits(s);
  for (int j = 0; j < s.n_cols; ++j) {
    for (int i = 0; i < s.n_rows; ++i) {
      if (data.adjacency(i, j) == 1) continue;  // pinned at 1, never redrawn
      double w = true_interaction_weight(expit(lp(i, j)), s.p_rows(i), s.p_cols(j),
                                         data.overlap(i, j));
      s.L(i, j) = rng.bernoulli(w) ? 1 : 0;
    }
  }
}

void draw_interaction_pg(const ParamState& s, MatrixXd& omega_l, Rng& rng) {
  MatrixXd lp = interaction_logits(s);
  omega_l.resize(s.n_rows, s.n_cols);
  for (int j = 0; j < s.n_cols; ++j)
    for (int i = 0; i < s.n_rows; ++i) omega_l(i, j) = draw_pg1(lp(i, j), rng);
}

void update_interaction_coeffs(ParamState& s, const MatrixXd& omega_l,
                               const PriorConfig& prior, Rng& rng) {
  int H = s.H;
  Eigen::Index n_pairs = static_cast<Eigen::Index>(s.n_rows) * s.n_cols;
  MatrixXd design(n_pairs, H + 1);
  design.col(0).setOnes();
  for (int h = 0; h < H; ++h) {
    // column-major flattening of the rank-one table U_ih V_jh
    Eigen::Map<MatrixXd> col(design.col(h + 1).data(), s.n_rows, s.n_cols);
    col = s.U.col(h) * s.V.col(h).transpose();
  }
  VectorXd kappa(n_pairs), omega(n_pairs);
  for (int j = 0; j < s.n_cols; ++j)
    for (int i = 0; i < s.n_rows; ++i) {
      Eigen::Index k = static_cast<Eigen::Index>(j) * s.n_rows + i;
      kappa(k) = s.L(i, j) - 0.5;
      omega(k) = omega_l(i, j);
    }

  MatrixXd precision = design.transpose() * omega.asDiagonal() * design;
  VectorXd linear = design.transpose() * kappa;
  precision(0, 0) += 1.0 / prior.sigma2_0;
  linear(0) += prior.mu0 / prior.sigma2_0;
  for (int h = 0; h < H; ++h)
    precision(h + 1, h + 1) +=
        1.0 / (s.shrink.tau_lambda(h) * s.shrink.theta(h));

  VectorXd draw = gaussian_conditional_from_normal_eq(precision, linear).draw(rng);
  s.lambda0 = draw(0);
  s.lambda = draw.tail(H);
}

namespace {

// Shared conjugate block for one trait-style model on one side.
void update_coef_block(const MatrixXd& factors, const VectorXd& response,
                       bool binary, double sigma2, const VectorXd& pg_weights,
                       const VectorXd& tau_row, const VectorXd& theta,
                       const PriorConfig& prior, VectorXd& coef_out, Rng& rng) {
  int n = static_cast<int>(factors.rows());
  int H = static_cast<int>(factors.cols());
  MatrixXd design(n, H + 1);
  design.col(0).setOnes();
  design.rightCols(H) = factors;

  VectorXd omega(n), kappa(n);
  if (binary) {
    omega = pg_weights;
    kappa = response.array() - 0.5;
  } else {
    omega.setConstant(n, 1.0 / sigma2);
    kappa = response / sigma2;
  }
  VectorXd prior_prec(H + 1), prior_mean = VectorXd::Zero(H + 1);
  prior_prec(0) = 1.0 / prior.sigma2_0;
  prior_mean(0) = prior.mu0;
  for (int h = 0; h < H; ++h) prior_prec(h + 1) = 1.0 / (tau_row(h) * theta(h));

  coef_out = gaussian_conditional(design, kappa, omega, prior_prec, prior_mean)
                 .draw(rng);
}

double draw_residual_variance(const MatrixXd& factors, const VectorXd& response,
                              const VectorXd& coef, const PriorConfig& prior,
                              Rng& rng) {
  int n = static_cast<int>(factors.rows());
  int H = static_cast<int>(factors.cols());
  VectorXd fitted = VectorXd::Constant(n, coef(0)) + factors * coef.tail(H);
  double ssr = (response - fitted).squaredNorm();
  return rng.inv_gamma(prior.a_sigma + 0.5 * n, prior.b_sigma + 0.5 * ssr);
}

}  // namespace

void update_trait_models(ParamState& s, const GibbsContext& ctx,
                         SweepScratch& scratch, Rng& rng) {
  const PriorConfig& prior = ctx.prior;
  scratch.omega_x.resize(s.n_rows, std::max(s.p_B, 1));
  scratch.omega_w.resize(s.n_cols, std::max(s.p_P, 1));

  VectorXd coef;
  for (int m = 0; m < s.p_B; ++m) {
    bool binary = ctx.traits_rows.kind[m] == TraitKind::kBinary;
    if (binary) {
      VectorXd lp = VectorXd::Constant(s.n_rows, s.beta(m, 0)) +
                    s.U * s.beta.row(m).tail(s.H).transpose();
      for (int i = 0; i < s.n_rows; ++i)
        scratch.omega_x(i, m) = draw_pg1(lp(i), rng);
    }
    update_coef_block(s.U, s.X.col(m), binary, s.sigma2_x(m),
                      scratch.omega_x.col(m), s.shrink.tau_beta.row(m),
                      s.shrink.theta, prior, coef, rng);
    s.beta.row(m) = coef.transpose();
    if (!binary)
      s.sigma2_x(m) = draw_residual_variance(s.U, s.X.col(m), coef, prior, rng);
  }

  for (int l = 0; l < s.p_P; ++l) {
    bool binary = ctx.traits_cols.kind[l] == TraitKind::kBinary;
    if (binary) {
      VectorXd lp = VectorXd::Constant(s.n_cols, s.gamma(l, 0)) +
                    s.V * s.gamma.row(l).tail(s.H).transpose();
      for (int j = 0; j < s.n_cols; ++j)
        scratch.omega_w(j, l) = draw_pg1(lp(j), rng);
    }
    update_coef_block(s.V, s.W.col(l), binary, s.sigma2_w(l),
                      scratch.omega_w.col(l), s.shrink.tau_gamma.row(l),
                      s.shrink.theta, prior, coef, rng);
    s.gamma.row(l) = coef.transpose();
    if (!binary)
      s.sigma2_w(l) = draw_residual_variance(s.V, s.W.col(l), coef, prior, rng);
  }
}

void update_detection_coeffs(ParamState& s, const PriorConfig& prior, Rng& rng) {
  VectorXd coef;
  VectorXd logit_rows = logit_vector(s.p_rows);
  update_coef_block(s.U, logit_rows, false, s.sigma2_p_rows, VectorXd(),
                    s.shrink.tau_delta, s.shrink.theta, prior, coef, rng);
  s.delta0 = coef(0);
  s.delta = coef.tail(s.H);
  s.sigma2_p_rows =
      draw_residual_variance(s.U, logit_rows, coef, prior, rng);

  VectorXd logit_cols = logit_vector(s.p_cols);
  update_coef_block(s.V, logit_cols, false, s.sigma2_p_cols, VectorXd(),
                    s.shrink.tau_zeta, s.shrink.theta, prior, coef, rng);
  s.zeta0 = coef(0);
  s.zeta = coef.tail(s.H);
  s.sigma2_p_cols =
      draw_residual_variance(s.V, logit_cols, coef, prior, rng);
}

namespace {

struct FactorSide {
  // row side when updating U, column side when updating V
  MatrixXd* factors;          // n x H, updated in place
  const MatrixXd* other;      // m x H
  MatrixXd* coef;             // traits x (H+1)
  const VectorXd* sigma2;     // residual variances
  const std::vector<TraitKind>* kinds;
  const MatrixXd* traits;     // n x p working values
  const MatrixXd* omega_traits;
  const VectorXd* det_coef;   // delta or zeta (H)
  double det0;
  double det_sigma2;
  const VectorXd* p;          // detection probabilities
  const MatrixXd* prior_inv;  // Sigma^{-1}
};

// Draws every factor column of one side, sequential in h. The likelihood
// precision is diagonal (traits, detection, interactions all contribute
// per-species terms); only the cross-species prior couples the entries.
void update_factor_side(FactorSide side, bool rows_side, const ParamState& s,
                        const MatrixXd& omega_l, bool with_detection, Rng& rng) {
  MatrixXd& F = *side.factors;
  int n = static_cast<int>(F.rows());
  int H = static_cast<int>(F.cols());
  int p = static_cast<int>(side.coef->rows());

  MatrixXd lp = interaction_logits(s);  // refreshed incrementally below
  MatrixXd pred_traits(n, std::max(p, 1));
  for (int m = 0; m < p; ++m)
    pred_traits.col(m) = VectorXd::Constant(n, (*side.coef)(m, 0)) +
                         F * side.coef->row(m).tail(H).transpose();
  VectorXd pred_det;
  VectorXd logit_p;
  if (with_detection) {
    pred_det = VectorXd::Constant(n, side.det0) + F * (*side.det_coef);
    logit_p = logit_vector(*side.p);
  }
  MatrixXd l_centered(s.n_rows, s.n_cols);
  for (int j = 0; j < s.n_cols; ++j)
    for (int i = 0; i < s.n_rows; ++i) l_centered(i, j) = s.L(i, j) - 0.5;

  VectorXd dvec(n), b(n);
  for (int h = 0; h < H; ++h) {
    dvec.setZero();
    b.setZero();
    VectorXd Fh = F.col(h);

    for (int m = 0; m < p; ++m) {
      double c = (*side.coef)(m, h + 1);
      if ((*side.kinds)[m] == TraitKind::kContinuous) {
        double inv_var = 1.0 / (*side.sigma2)(m);
        dvec.array() += c * c * inv_var;
        b += (c * inv_var) *
             (side.traits->col(m) - pred_traits.col(m) + c * Fh);
      } else {
        dvec += (c * c) * side.omega_traits->col(m);
        b += c * ((side.traits->col(m).array() - 0.5) -
                  side.omega_traits->col(m).array() *
                      (pred_traits.col(m) - c * Fh).array())
                     .matrix();
      }
    }

    if (with_detection) {
      double dh = (*side.det_coef)(h);
      double inv_var = 1.0 / side.det_sigma2;
      dvec.array() += dh * dh * inv_var;
      b += (dh * inv_var) * (logit_p - pred_det + dh * Fh);
    }

    // interaction block: all three sums reduce to matrix-vector products
    // against the opposite side's scaled factor column
    {
      VectorXd c = s.lambda(h) * (rows_side ? s.V.col(h) : s.U.col(h));
      VectorXd c2 = c.cwiseProduct(c);
      VectorXd d_int(n), lin(n);
      if (rows_side) {
        d_int = omega_l * c2;
        lin = l_centered * c - omega_l.cwiseProduct(lp) * c;
      } else {
        d_int = omega_l.transpose() * c2;
        lin = l_centered.transpose() * c -
              (omega_l.cwiseProduct(lp)).transpose() * c;
      }
      dvec += d_int;
      b += lin + Fh.cwiseProduct(d_int);
    }

    MatrixXd precision = *side.prior_inv;
    precision.diagonal() += dvec;
    VectorXd fresh = gaussian_conditional_from_normal_eq(precision, b).draw(rng);
    VectorXd dF = fresh - Fh;

    if (rows_side)
      lp += s.lambda(h) * dF * s.V.col(h).transpose();
    else
      lp += s.lambda(h) * s.U.col(h) * dF.transpose();
    if (p > 0) pred_traits += dF * side.coef->col(h + 1).transpose();
    if (with_detection) pred_det += (*side.det_coef)(h)*dF;
    F.col(h) = fresh;
  }
}

}  // namespace

void update_latent_factors(ParamState& s, const GibbsContext& ctx,
                           const SweepScratch& scratch, Rng& rng,
                           const SweepOptions& opt) {
  FactorSide rows{&s.U,
                  &s.V,
                  &s.beta,
                  &s.sigma2_x,
                  &ctx.traits_rows.kind,
                  &s.X,
                  &scratch.omega_x,
                  &s.delta,
                  s.delta0,
                  s.sigma2_p_rows,
                  &s.p_rows,
                  &s.sigma_u_inv};
  update_factor_side(rows, true, s, scratch.omega_l, opt.bias_corrected, rng);

  FactorSide cols{&s.V,
                  &s.U,
                  &s.gamma,
                  &s.sigma2_w,
                  &ctx.traits_cols.kind,
                  &s.W,
                  &scratch.omega_w,
                  &s.zeta,
                  s.zeta0,
                  s.sigma2_p_cols,
                  &s.p_cols,
                  &s.sigma_v_inv};
  update_factor_side(cols, false, s, scratch.omega_l, opt.bias_corrected, rng);
}

void update_shrinkage(ParamState& s, const PriorConfig& prior, Rng& rng,
                      const SweepOptions& opt) {
  int H = s.H;
  ShrinkState& sh = s.shrink;
  bool det = opt.bias_corrected;

  auto tau_draw = [&](double coef, double theta) {
    return rng.inv_gamma(0.5 * (prior.nu + 1.0),
                         0.5 * (prior.nu + coef * coef / theta));
  };
  for (int h = 0; h < H; ++h) {
    double th = sh.theta(h);
    for (int m = 0; m < s.p_B; ++m)
      sh.tau_beta(m, h) = tau_draw(s.beta(m, h + 1), th);
    for (int l = 0; l < s.p_P; ++l)
      sh.tau_gamma(l, h) = tau_draw(s.gamma(l, h + 1), th);
    sh.tau_lambda(h) = tau_draw(s.lambda(h), th);
    if (det) {
      sh.tau_delta(h) = tau_draw(s.delta(h), th);
      sh.tau_zeta(h) = tau_draw(s.zeta(h), th);
    }
  }

  // Slab/spike assignments, with theta integrated out: spike lanes score the
  // coefficients under a normal at the spike scale, slab lanes under the
  // multivariate t implied by the inverse-gamma slab.
  int dim = s.p_B + s.p_P + (det ? 3 : 1);
  VectorXd x(dim), tau(dim);
  VectorXd logw(H);
  for (int h = 0; h < H; ++h) {
    int k = 0;
    for (int m = 0; m < s.p_B; ++m, ++k) {
      x(k) = s.beta(m, h + 1);
      tau(k) = sh.tau_beta(m, h);
    }
    for (int l = 0; l < s.p_P; ++l, ++k) {
      x(k) = s.gamma(l, h + 1);
      tau(k) = sh.tau_gamma(l, h);
    }
    x(k) = s.lambda(h);
    tau(k) = sh.tau_lambda(h);
    ++k;
    if (det) {
      x(k) = s.delta(h);
      tau(k) = sh.tau_delta(h);
      ++k;
      x(k) = s.zeta(h);
      tau(k) = sh.tau_zeta(h);
      ++k;
    }

    double log_spike = log_mvn_diag_pdf(x, prior.theta_inf * tau);
    double log_slab = log_mvt_diag_pdf(
        x, 2.0 * prior.alpha_theta,
        (prior.beta_theta / prior.alpha_theta) * tau);
    for (int l = 0; l < H; ++l)
      logw(l) = std::log(sh.omega(l)) + (l <= h ? log_spike : log_slab);

    double norm = log_sum_exp(logw);
    double u = rng.uniform();
    double cum = 0.0;
    int pick = H;
    for (int l = 0; l < H; ++l) {
      cum += std::exp(logw(l) - norm);
      if (u <= cum) {
        pick = l + 1;
        break;
      }
    }
    sh.z(h) = std::min(pick, H);
  }

  for (int h = 0; h + 1 < H; ++h) {
    int eq = 0, gt = 0;
    for (int t = 0; t < H; ++t) {
      eq += (sh.z(t) == h + 1);
      gt += (sh.z(t) > h + 1);
    }
    sh.v(h) = rng.beta(1.0 + eq, prior.alpha + gt);
    if (sh.v(h) >= 1.0) sh.v(h) = 1.0 - 1e-12;
    if (sh.v(h) <= 0.0) sh.v(h) = 1e-12;
  }
  sh.v(H - 1) = 1.0;
  std::tie(sh.omega, sh.pi) = stick_break(sh.v);

  for (int h = 0; h < H; ++h) {
    if (sh.z(h) <= h + 1) {
      sh.theta(h) = prior.theta_inf;
      continue;
    }
    double ssum = 0.0;
    for (int m = 0; m < s.p_B; ++m)
      ssum += s.beta(m, h + 1) * s.beta(m, h + 1) / sh.tau_beta(m, h);
    for (int l = 0; l < s.p_P; ++l)
      ssum += s.gamma(l, h + 1) * s.gamma(l, h + 1) / sh.tau_gamma(l, h);
    ssum += s.lambda(h) * s.lambda(h) / sh.tau_lambda(h);
    if (det) {
      ssum += s.delta(h) * s.delta(h) / sh.tau_delta(h);
      ssum += s.zeta(h) * s.zeta(h) / sh.tau_zeta(h);
    }
    sh.theta(h) = rng.inv_gamma(prior.alpha_theta + 0.5 * dim,
                                prior.beta_theta + 0.5 * ssum);
  }
}

namespace {

// One Metropolis-Hastings step for one detection probability. The model puts
// a normal on the logit, so the target density over p carries the 1/(p(1-p))
// change-of-variables factor alongside the detection likelihood.
bool detection_mh_step(double& p, double lik_mean, double lik_var, double n_conc,
                       const std::function<double(double)>& log_lik, Rng& rng) {
  double x = rng.beta(n_conc * p, n_conc * (1.0 - p));
  if (!(x > 0.0 && x < 1.0) || !std::isfinite(x)) return false;  // auto-reject

  double log_ap = log_lik(x) - log_lik(p);
  double lx = logit(x), lp = logit(p);
  log_ap += log_normal_pdf(lx, lik_mean, lik_var) -
            log_normal_pdf(lp, lik_mean, lik_var);
  log_ap += std::log(p * (1.0 - p)) - std::log(x * (1.0 - x));
  log_ap += log_beta_pdf(p, n_conc * x, n_conc * (1.0 - x)) -
            log_beta_pdf(x, n_conc * p, n_conc * (1.0 - p));
  if (std::log(rng.uniform()) < log_ap) {
    p = x;
    return true;
  }
  return false;
}

}  // namespace

double detection_loglik(const ParamState& s, const InteractionData& data,
                        bool row_side, int index, double p) {
  double acc = 0.0;
  int n_other = row_side ? s.n_cols : s.n_rows;
  for (int k = 0; k < n_other; ++k) {
    int i = row_side ? index : k;
    int j = row_side ? k : index;
    if (s.L(i, j) != 1) continue;
    int nij = data.overlap(i, j);
    if (nij == 0) continue;
    double q = row_side ? p * s.p_cols(j) : s.p_rows(i) * p;
    if (data.adjacency(i, j) == 1)
      acc += log_one_minus_pow(q, nij);
    else
      acc += nij * std::log1p(-q);
  }
  return acc;
}

void update_detection_probs(ParamState& s, const InteractionData& data,
                            const PriorConfig& prior, Rng& rng) {
  double n_conc = prior.mh_concentration;

  for (int i = 0; i < s.n_rows; ++i) {
    double mu = s.delta0 + s.U.row(i) * s.delta;
    detection_mh_step(
        s.p_rows(i), mu, s.sigma2_p_rows, n_conc,
        [&](double p) { return detection_loglik(s, data, true, i, p); }, rng);
  }
  for (int j = 0; j < s.n_cols; ++j) {
    double mu = s.zeta0 + s.V.row(j) * s.zeta;
    detection_mh_step(
        s.p_cols(j), mu, s.sigma2_p_cols, n_conc,
        [&](double p) { return detection_loglik(s, data, false, j, p); }, rng);
  }
}

double log_factor_column_density(const MatrixXd& C, double rho,
                                 const MatrixXd& F) {
  Eigen::LLT<MatrixXd> llt(blend_correlation(C, rho));
  if (llt.info() != Eigen::Success)
    return -std::numeric_limits<double>::infinity();
  double logdet = 0.0;
  MatrixXd chol_l = llt.matrixL();
  for (int i = 0; i < chol_l.rows(); ++i) logdet += 2.0 * std::log(chol_l(i, i));
  MatrixXd y = llt.matrixL().solve(F);
  return -0.5 * (static_cast<double>(F.cols()) * logdet + y.squaredNorm());
}

namespace {

bool rho_mh_step(double& rho, const MatrixXd& C, const MatrixXd& F,
                 const PriorConfig& prior, Rng& rng) {
  double n_conc = prior.mh_concentration;
  double x = rng.beta(n_conc * rho, n_conc * (1.0 - rho));
  if (!(x > 0.0 && x < 1.0) || !std::isfinite(x)) return false;

  double log_ap = log_factor_column_density(C, x, F) -
                  log_factor_column_density(C, rho, F);
  log_ap += log_beta_pdf(x, prior.a_rho, prior.b_rho) -
            log_beta_pdf(rho, prior.a_rho, prior.b_rho);
  log_ap += log_beta_pdf(rho, n_conc * x, n_conc * (1.0 - x)) -
            log_beta_pdf(x, n_conc * rho, n_conc * (1.0 - rho));
  if (std::log(rng.uniform()) < log_ap) {
    rho = x;
    return true;
  }
  return false;
}

}  // namespace

void update_rho(ParamState& s, const GibbsContext& ctx, Rng& rng) {
  if (rho_mh_step(s.rho_rows, ctx.C_rows, s.U, ctx.prior, rng))
    s.refresh_row_covariance(ctx.C_rows);
  if (rho_mh_step(s.rho_cols, ctx.C_cols, s.V, ctx.prior, rng))
    s.refresh_col_covariance(ctx.C_cols);
}

void impute_missing_traits(ParamState& s, const GibbsContext& ctx, Rng& rng) {
  for (int m = 0; m < s.p_B; ++m) {
    bool binary = ctx.traits_rows.kind[m] == TraitKind::kBinary;
    for (int i = 0; i < s.n_rows; ++i) {
      if (!ctx.traits_rows.missing(i, m)) continue;
      double pred = s.beta(m, 0) + s.U.row(i) * s.beta.row(m).tail(s.H).transpose();
      if (binary)
        s.X(i, m) = rng.bernoulli(expit(pred)) ? 1.0 : 0.0;
      else
        s.X(i, m) = rng.normal(pred, std::sqrt(s.sigma2_x(m)));
    }
  }
  for (int l = 0; l < s.p_P; ++l) {
    bool binary = ctx.traits_cols.kind[l] == TraitKind::kBinary;
    for (int j = 0; j < s.n_cols; ++j) {
      if (!ctx.traits_cols.missing(j, l)) continue;
      double pred = s.gamma(l, 0) + s.V.row(j) * s.gamma.row(l).tail(s.H).transpose();
      if (binary)
        s.W(j, l) = rng.bernoulli(expit(pred)) ? 1.0 : 0.0;
      else
        s.W(j, l) = rng.normal(pred, std::sqrt(s.sigma2_w(l)));
    }
  }
}

void gibbs_sweep(ParamState& s, const GibbsContext& ctx, SweepScratch& scratch,
                 Rng& rng, const SweepOptions& opt) {
  if (opt.bias_corrected) update_true_interactions(s, ctx.data, rng);
  draw_interaction_pg(s, scratch.omega_l, rng);
  update_interaction_coeffs(s, scratch.omega_l, ctx.prior, rng);
  update_trait_models(s, ctx, scratch, rng);
  if (opt.bias_corrected) update_detection_coeffs(s, ctx.prior, rng);
  update_latent_factors(s, ctx, scratch, rng, opt);
  update_shrinkage(s, ctx.prior, rng, opt);
  if (opt.bias_corrected) update_detection_probs(s, ctx.data, ctx.prior, rng);
  update_rho(s, ctx, rng);
  impute_missing_traits(s, ctx, rng);
}

MatrixXd interaction_logits(const ParamState& s) {
  MatrixXd lp = s.U * s.lambda.asDiagonal() * s.V.transpose();
  lp.array() += s.lambda0;
  return lp;
}

namespace {

void check_finite(const ParamState& s, int iter) {
  bool ok = std::isfinite(s.lambda0) && s.lambda.allFinite() &&
            s.U.allFinite() && s.V.allFinite() && s.beta.allFinite() &&
            s.gamma.allFinite() && std::isfinite(s.sigma2_p_rows) &&
            std::isfinite(s.sigma2_p_cols);
  if (!ok)
    throw std::runtime_error("non-finite state at iteration " +
                             std::to_string(iter));
}

std::vector<int> pick_tracked(int n, int count, Rng& rng) {
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  for (int i = 0; i < n; ++i) {
    int j = static_cast<int>(rng.integer(n));
    std::swap(all[i], all[j]);
  }
  all.resize(std::min(count, n));
  std::sort(all.begin(), all.end());
  return all;
}

void record_series(std::map<std::string, std::vector<double>>& out,
                   const ParamState& s, const GibbsContext& ctx,
                   const std::vector<int>& rows, const std::vector<int>& cols,
                   bool bias_corrected) {
  out["rho_rows"].push_back(s.rho_rows);
  out["rho_cols"].push_back(s.rho_cols);
  for (int m = 0; m < s.p_B; ++m)
    if (ctx.traits_rows.kind[m] == TraitKind::kContinuous)
      out["sigma2_x_" + std::to_string(m)].push_back(s.sigma2_x(m));
  for (int l = 0; l < s.p_P; ++l)
    if (ctx.traits_cols.kind[l] == TraitKind::kContinuous)
      out["sigma2_w_" + std::to_string(l)].push_back(s.sigma2_w(l));
  if (bias_corrected) {
    out["sigma2_p_rows"].push_back(s.sigma2_p_rows);
    out["sigma2_p_cols"].push_back(s.sigma2_p_cols);
    for (int i : rows) out["p_row_" + std::to_string(i)].push_back(s.p_rows(i));
    for (int j : cols) out["p_col_" + std::to_string(j)].push_back(s.p_cols(j));
  }
  for (int i : rows)
    for (int m = 0; m < s.p_B; ++m) {
      double lp = s.beta(m, 0) + s.U.row(i) * s.beta.row(m).tail(s.H).transpose();
      out["lp_x_" + std::to_string(i) + "_" + std::to_string(m)].push_back(lp);
    }
  for (int j : cols)
    for (int l = 0; l < s.p_P; ++l) {
      double lp = s.gamma(l, 0) + s.V.row(j) * s.gamma.row(l).tail(s.H).transpose();
      out["lp_w_" + std::to_string(j) + "_" + std::to_string(l)].push_back(lp);
    }
}

ParamDraw make_draw(const ParamState& s) {
  ParamDraw d;
  d.lambda0 = s.lambda0;
  d.lambda = s.lambda;
  d.U = s.U;
  d.V = s.V;
  d.beta = s.beta;
  d.gamma = s.gamma;
  d.sigma2_x = s.sigma2_x;
  d.sigma2_w = s.sigma2_w;
  d.delta0 = s.delta0;
  d.delta = s.delta;
  d.sigma2_p_rows = s.sigma2_p_rows;
  d.zeta0 = s.zeta0;
  d.zeta = s.zeta;
  d.sigma2_p_cols = s.sigma2_p_cols;
  d.p_rows = s.p_rows;
  d.p_cols = s.p_cols;
  d.rho_rows = s.rho_rows;
  d.rho_cols = s.rho_cols;
  return d;
}

struct ChainResult {
  std::vector<ParamDraw> draws;
  std::vector<BitMatrix> l_draws;
  MatrixXd l_sum;
  MatrixXd prob_sum;
  std::map<std::string, std::vector<double>> series;
};

ChainResult run_one_chain(int chain_index, const ChainConfig& cfg,
                          const PriorConfig& prior, const GibbsContext& ctx,
                          ModelKind kind, const std::vector<int>& tracked_rows,
                          const std::vector<int>& tracked_cols) {
  SweepOptions opt;
  opt.bias_corrected = kind == ModelKind::kLatentBiasCorrected;

  Rng rng = Rng::child(cfg.seed, {0x636861696eULL, static_cast<std::uint64_t>(chain_index)});
  ParamState state = init_state(prior, ctx.data, ctx.traits_rows, ctx.traits_cols,
                                ctx.C_rows, ctx.C_cols, rng);
  if (!opt.bias_corrected) {
    for (int j = 0; j < state.n_cols; ++j)
      for (int i = 0; i < state.n_rows; ++i)
        state.L(i, j) = static_cast<std::int8_t>(ctx.data.adjacency(i, j));
  }

  ChainResult out;
  out.l_sum = MatrixXd::Zero(state.n_rows, state.n_cols);
  out.prob_sum = MatrixXd::Zero(state.n_rows, state.n_cols);
  out.draws.reserve(cfg.kept_per_chain());

  SweepScratch scratch;
  for (int iter = 1; iter <= cfg.n_iter; ++iter) {
    gibbs_sweep(state, ctx, scratch, rng, opt);
    check_finite(state, iter);
    if (iter <= cfg.burn_in || (iter - cfg.burn_in) % cfg.thin != 0) continue;

    out.draws.push_back(make_draw(state));
    MatrixXd lp = interaction_logits(state);
    for (int j = 0; j < state.n_cols; ++j)
      for (int i = 0; i < state.n_rows; ++i) {
        out.l_sum(i, j) += state.L(i, j);
        out.prob_sum(i, j) += expit(lp(i, j));
      }
    if (cfg.keep_l_draws) {
      BitMatrix snap(state.n_rows, state.n_cols);
      for (int j = 0; j < state.n_cols; ++j)
        for (int i = 0; i < state.n_rows; ++i)
          snap.set(i, j, state.L(i, j) == 1);
      out.l_draws.push_back(std::move(snap));
    }
    record_series(out.series, state, ctx, tracked_rows, tracked_cols,
                  opt.bias_corrected);
  }
  return out;
}

}  // namespace

PosteriorDraws run_chain(const ChainConfig& cfg, const PriorConfig& prior,
                         const InteractionData& data,
                         const TraitMatrix& traits_rows,
                         const TraitMatrix& traits_cols, const MatrixXd& C_rows,
                         const MatrixXd& C_cols, ModelKind kind) {
  if (kind != ModelKind::kLatentBiasCorrected && kind != ModelKind::kLatentObserved)
    throw std::invalid_argument("run_chain handles the latent-factor models only");
  cfg.validate();
  prior.validate();
  GibbsContext ctx{data, traits_rows, traits_cols, C_rows, C_cols, prior};

  Rng track_rng = Rng::child(cfg.seed, {0x747261636bULL});
  std::vector<int> tracked_rows = pick_tracked(data.n_rows, 4, track_rng);
  std::vector<int> tracked_cols = pick_tracked(data.n_cols, 4, track_rng);

  std::vector<ChainResult> results(cfg.n_chains);
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  int max_threads = cfg.threads > 0 ? cfg.threads : (hw > 0 ? hw : 1);

  if (max_threads <= 1 || cfg.n_chains == 1) {
    for (int c = 0; c < cfg.n_chains; ++c)
      results[c] = run_one_chain(c, cfg, prior, ctx, kind, tracked_rows, tracked_cols);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(cfg.n_chains);
    int n_workers = std::min(max_threads, cfg.n_chains);
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          int c = next.fetch_add(1);
          if (c >= cfg.n_chains) return;
          try {
            results[c] =
                run_one_chain(c, cfg, prior, ctx, kind, tracked_rows, tracked_cols);
          } catch (...) {
            errors[c] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  PosteriorDraws out;
  out.model = kind;
  out.n_rows = data.n_rows;
  out.n_cols = data.n_cols;
  out.H = prior.H;
  out.p_B = traits_rows.p;
  out.p_P = traits_cols.p;
  out.prior = prior;
  out.chain_config = cfg;
  out.tracked_rows = tracked_rows;
  out.tracked_cols = tracked_cols;
  out.l_sum = MatrixXd::Zero(data.n_rows, data.n_cols);
  out.prob_sum = MatrixXd::Zero(data.n_rows, data.n_cols);
  for (auto& r : results) {
    out.chains.push_back(std::move(r.draws));
    out.l_sum += r.l_sum;
    out.prob_sum += r.prob_sum;
    out.series.push_back(std::move(r.series));
    if (cfg.keep_l_draws) out.l_draws.push_back(std::move(r.l_draws));
  }
  return out;
}

}  // namespace lgi
