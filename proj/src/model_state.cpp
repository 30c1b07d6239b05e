#include "lgi/model_state.hpp"

#include <cmath>
#include <stdexcept>

namespace lgi {

std::pair<VectorXd, VectorXd> stick_break(const VectorXd& v) {
  int H = static_cast<int>(v.size());
  if (H < 1) throw std::invalid_argument("stick_break: empty v");
  if (v(H - 1) != 1.0) throw std::invalid_argument("stick_break: v_H must be 1");
  VectorXd omega(H), pi(H);
  double remaining = 1.0;
  double cum = 0.0;
  for (int l = 0; l < H; ++l) {
    if (v(l) < 0.0 || v(l) > 1.0)
      throw std::invalid_argument("stick_break: v outside [0,1]");
    omega(l) = v(l) * remaining;
    remaining *= (1.0 - v(l));
    cum += omega(l);
    pi(l) = cum;
  }
  return {omega, pi};
}

double coefficient_prior_variance(const ShrinkState& s, CoefFamily family,
                                  int trait_index, int h) {
  int H = static_cast<int>(s.theta.size());
  if (h < 0 || h >= H)
    throw std::out_of_range("coefficient_prior_variance: factor index");
  double tau;
  switch (family) {
    case CoefFamily::kBeta:
      if (trait_index < 0 || trait_index >= s.tau_beta.rows())
        throw std::out_of_range("coefficient_prior_variance: trait index");
      tau = s.tau_beta(trait_index, h);
      break;
    case CoefFamily::kGamma:
      if (trait_index < 0 || trait_index >= s.tau_gamma.rows())
        throw std::out_of_range("coefficient_prior_variance: trait index");
      tau = s.tau_gamma(trait_index, h);
      break;
    case CoefFamily::kLambda:
      tau = s.tau_lambda(h);
      break;
    case CoefFamily::kDelta:
      tau = s.tau_delta(h);
      break;
    case CoefFamily::kZeta:
      tau = s.tau_zeta(h);
      break;
    default:
      throw std::invalid_argument("coefficient_prior_variance: family");
  }
  return tau * s.theta(h);
}

void ParamState::refresh_row_covariance(const MatrixXd& C_rows) {
  MatrixXd sigma = blend_correlation(C_rows, rho_rows);
  sigma_u_llt.compute(sigma);
  if (sigma_u_llt.info() != Eigen::Success)
    throw std::runtime_error("row factor covariance not positive definite");
  sigma_u_inv = sigma_u_llt.solve(MatrixXd::Identity(n_rows, n_rows));
}

void ParamState::refresh_col_covariance(const MatrixXd& C_cols) {
  MatrixXd sigma = blend_correlation(C_cols, rho_cols);
  sigma_v_llt.compute(sigma);
  if (sigma_v_llt.info() != Eigen::Success)
    throw std::runtime_error("column factor covariance not positive definite");
  sigma_v_inv = sigma_v_llt.solve(MatrixXd::Identity(n_cols, n_cols));
}

namespace {

// column draw from N(0, Sigma) via the cached Cholesky factor
VectorXd correlated_normal(const Eigen::LLT<MatrixXd>& llt, int n, Rng& rng) {
  VectorXd z(n);
  for (int i = 0; i < n; ++i) z(i) = rng.normal();
  return llt.matrixL() * z;
}

}  // namespace

ParamState init_state(const PriorConfig& prior, const InteractionData& data,
                      const TraitMatrix& traits_rows, const TraitMatrix& traits_cols,
                      const MatrixXd& C_rows, const MatrixXd& C_cols, Rng& rng) {
  prior.validate();
  if (traits_rows.n != data.n_rows || traits_cols.n != data.n_cols ||
      C_rows.rows() != data.n_rows || C_cols.rows() != data.n_cols)
    throw std::invalid_argument("init_state: dimension mismatch");

  ParamState s;
  s.n_rows = data.n_rows;
  s.n_cols = data.n_cols;
  s.H = prior.H;
  s.p_B = traits_rows.p;
  s.p_P = traits_cols.p;
  int H = s.H;

  // Shrinkage block first: all theta_h start on the slab so factors are live.
  s.shrink.v = VectorXd::Ones(H);
  for (int h = 0; h + 1 < H; ++h) s.shrink.v(h) = rng.beta(1.0, prior.alpha);
  std::tie(s.shrink.omega, s.shrink.pi) = stick_break(s.shrink.v);
  s.shrink.z = VectorXi::Constant(H, H);
  s.shrink.theta = VectorXd(H);
  for (int h = 0; h < H; ++h)
    s.shrink.theta(h) = rng.inv_gamma(prior.alpha_theta, prior.beta_theta);

  auto draw_tau_matrix = [&](int rows) {
    MatrixXd m(rows, H);
    for (int r = 0; r < rows; ++r)
      for (int h = 0; h < H; ++h)
        m(r, h) = rng.inv_gamma(prior.nu / 2.0, prior.nu / 2.0);
    return m;
  };
  auto draw_tau_vector = [&] {
    VectorXd v(H);
    for (int h = 0; h < H; ++h) v(h) = rng.inv_gamma(prior.nu / 2.0, prior.nu / 2.0);
    return v;
  };
  s.shrink.tau_beta = draw_tau_matrix(s.p_B);
  s.shrink.tau_gamma = draw_tau_matrix(s.p_P);
  s.shrink.tau_lambda = draw_tau_vector();
  s.shrink.tau_delta = draw_tau_vector();
  s.shrink.tau_zeta = draw_tau_vector();

  // Factors from their prior at the prior-mean correlation blend.
  s.rho_rows = prior.a_rho / (prior.a_rho + prior.b_rho);
  s.rho_cols = s.rho_rows;
  s.refresh_row_covariance(C_rows);
  s.refresh_col_covariance(C_cols);
  Eigen::LLT<MatrixXd> chol_u(blend_correlation(C_rows, s.rho_rows));
  Eigen::LLT<MatrixXd> chol_v(blend_correlation(C_cols, s.rho_cols));
  s.U = MatrixXd(s.n_rows, H);
  s.V = MatrixXd(s.n_cols, H);
  for (int h = 0; h < H; ++h) {
    s.U.col(h) = correlated_normal(chol_u, s.n_rows, rng);
    s.V.col(h) = correlated_normal(chol_v, s.n_cols, rng);
  }

  auto coef_draw = [&](double tau, double theta) {
    return rng.normal(0.0, std::sqrt(tau * theta));
  };
  double intercept_sd = std::sqrt(prior.sigma2_0);

  s.lambda0 = rng.normal(prior.mu0, intercept_sd);
  s.lambda = VectorXd(H);
  for (int h = 0; h < H; ++h)
    s.lambda(h) = coef_draw(s.shrink.tau_lambda(h), s.shrink.theta(h));

  s.beta = MatrixXd(s.p_B, H + 1);
  for (int m = 0; m < s.p_B; ++m) {
    s.beta(m, 0) = rng.normal(prior.mu0, intercept_sd);
    for (int h = 0; h < H; ++h)
      s.beta(m, h + 1) = coef_draw(s.shrink.tau_beta(m, h), s.shrink.theta(h));
  }
  s.gamma = MatrixXd(s.p_P, H + 1);
  for (int l = 0; l < s.p_P; ++l) {
    s.gamma(l, 0) = rng.normal(prior.mu0, intercept_sd);
    for (int h = 0; h < H; ++h)
      s.gamma(l, h + 1) = coef_draw(s.shrink.tau_gamma(l, h), s.shrink.theta(h));
  }

  s.sigma2_x = VectorXd::Ones(std::max(s.p_B, 1));
  for (int m = 0; m < s.p_B; ++m)
    s.sigma2_x(m) = rng.inv_gamma(prior.a_sigma, prior.b_sigma);
  s.sigma2_w = VectorXd::Ones(std::max(s.p_P, 1));
  for (int l = 0; l < s.p_P; ++l)
    s.sigma2_w(l) = rng.inv_gamma(prior.a_sigma, prior.b_sigma);

  s.delta0 = rng.normal(prior.mu0, intercept_sd);
  s.zeta0 = rng.normal(prior.mu0, intercept_sd);
  s.delta = VectorXd(H);
  s.zeta = VectorXd(H);
  for (int h = 0; h < H; ++h) {
    s.delta(h) = coef_draw(s.shrink.tau_delta(h), s.shrink.theta(h));
    s.zeta(h) = coef_draw(s.shrink.tau_zeta(h), s.shrink.theta(h));
  }
  s.sigma2_p_rows = rng.inv_gamma(prior.a_sigma, prior.b_sigma);
  s.sigma2_p_cols = rng.inv_gamma(prior.a_sigma, prior.b_sigma);

  s.p_rows = VectorXd::Constant(s.n_rows, 0.5);
  s.p_cols = VectorXd::Constant(s.n_cols, 0.5);

  s.L.resize(s.n_rows, s.n_cols);
  for (int i = 0; i < s.n_rows; ++i)
    for (int j = 0; j < s.n_cols; ++j)
      s.L(i, j) = data.adjacency(i, j) == 1 ? 1 : (rng.bernoulli(0.1) ? 1 : 0);

  // Missing traits: column mean for continuous, observed frequency for binary.
  auto fill_traits = [&](const TraitMatrix& tm) {
    MatrixXd out = tm.values;
    for (int m = 0; m < tm.p; ++m) {
      double sum = 0.0;
      int cnt = 0;
      for (int i = 0; i < tm.n; ++i)
        if (!tm.missing(i, m)) {
          sum += tm.values(i, m);
          ++cnt;
        }
      double mean = cnt > 0 ? sum / cnt : 0.0;
      for (int i = 0; i < tm.n; ++i) {
        if (!tm.missing(i, m)) continue;
        if (tm.kind[m] == TraitKind::kBinary)
          out(i, m) = rng.bernoulli(mean) ? 1.0 : 0.0;
        else
          out(i, m) = mean;
      }
    }
    return out;
  };
  s.X = fill_traits(traits_rows);
  s.W = fill_traits(traits_cols);

  return s;
}

}  // namespace lgi
