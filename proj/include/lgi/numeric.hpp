#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "lgi/rng.hpp"

namespace lgi {

// Linear predictors are clamped to +-35 before expit; expit(35) is within
// 1e-15 of 1 and the clamp keeps downstream logs finite.
inline double clamp_lp(double x) { return x < -35.0 ? -35.0 : (x > 35.0 ? 35.0 : x); }

inline double expit(double x) {
  x = clamp_lp(x);
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

inline double log_normal_pdf(double x, double mean, double var) {
  double d = x - mean;
  return -0.5 * (std::log(2.0 * M_PI * var) + d * d / var);
}

inline double log_beta_pdf(double x, double a, double b) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) + std::lgamma(a + b) -
         std::lgamma(a) - std::lgamma(b);
}

// log sum_i exp(x_i), guarded against empty and -inf inputs
double log_sum_exp(const Eigen::VectorXd& x);

// Gaussian conditional with precision P = X' Omega X + prior_prec and
// mean P^{-1} (X' kappa + prior_prec * prior_mean). `chol` factors P.
struct GaussianConditional {
  Eigen::VectorXd mean;
  Eigen::LLT<Eigen::MatrixXd> chol;

  Eigen::VectorXd draw(Rng& rng) const;
  Eigen::MatrixXd covariance() const;
};

// Weighted-regression conditional used by every coefficient block update:
// design X (n x k), working response kappa (n), per-row weights omega (n),
// diagonal prior precision and prior mean (k).
GaussianConditional gaussian_conditional(const Eigen::MatrixXd& X,
                                         const Eigen::VectorXd& kappa,
                                         const Eigen::VectorXd& omega,
                                         const Eigen::VectorXd& prior_prec,
                                         const Eigen::VectorXd& prior_mean);

// Same conditional given a precomputed precision matrix and linear term.
GaussianConditional gaussian_conditional_from_normal_eq(
    const Eigen::MatrixXd& precision, const Eigen::VectorXd& linear);

// Multivariate normal log density with diagonal covariance `diag_cov`.
double log_mvn_diag_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& diag_cov);

// Multivariate t log density with `dof` degrees of freedom and diagonal scale
// matrix `diag_scale` (covariance up to the t normalization), centered at 0.
double log_mvt_diag_pdf(const Eigen::VectorXd& x, double dof,
                        const Eigen::VectorXd& diag_scale);

}  // namespace lgi
