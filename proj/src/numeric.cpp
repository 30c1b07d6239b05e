#include "lgi/numeric.hpp"

#include <limits>
#include <stdexcept>

namespace lgi {

double log_sum_exp(const Eigen::VectorXd& x) {
  if (x.size() == 0) return -std::numeric_limits<double>::infinity();
  double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) s += std::exp(x(i) - m);
  return m + std::log(s);
}

Eigen::VectorXd GaussianConditional::draw(Rng& rng) const {
  Eigen::VectorXd z(mean.size());
  for (int i = 0; i < z.size(); ++i) z(i) = rng.normal();
  // x = mean + L^{-T} z gives covariance (L L^T)^{-1}
  return mean + chol.matrixU().solve(z);
}

Eigen::MatrixXd GaussianConditional::covariance() const {
  int k = static_cast<int>(mean.size());
  return chol.solve(Eigen::MatrixXd::Identity(k, k));
}

GaussianConditional gaussian_conditional(const Eigen::MatrixXd& X,
                                         const Eigen::VectorXd& kappa,
                                         const Eigen::VectorXd& omega,
                                         const Eigen::VectorXd& prior_prec,
                                         const Eigen::VectorXd& prior_mean) {
  Eigen::MatrixXd precision = X.transpose() * omega.asDiagonal() * X;
  precision.diagonal() += prior_prec;
  Eigen::VectorXd linear =
      X.transpose() * kappa + prior_prec.cwiseProduct(prior_mean);
  return gaussian_conditional_from_normal_eq(precision, linear);
}

GaussianConditional gaussian_conditional_from_normal_eq(
    const Eigen::MatrixXd& precision, const Eigen::VectorXd& linear) {
  GaussianConditional out;
  out.chol.compute(precision);
  if (out.chol.info() != Eigen::Success)
    throw std::runtime_error("gaussian_conditional: precision not positive definite");
  out.mean = out.chol.solve(linear);
  return out;
}

double log_mvn_diag_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& diag_cov) {
  double acc = 0.0;
  for (int i = 0; i < x.size(); ++i)
    acc += log_normal_pdf(x(i), 0.0, diag_cov(i));
  return acc;
}

double log_mvt_diag_pdf(const Eigen::VectorXd& x, double dof,
                        const Eigen::VectorXd& diag_scale) {
  int k = static_cast<int>(x.size());
  double quad = 0.0;
  double logdet = 0.0;
  for (int i = 0; i < k; ++i) {
    quad += x(i) * x(i) / diag_scale(i);
    logdet += std::log(diag_scale(i));
  }
  return std::lgamma(0.5 * (dof + k)) - std::lgamma(0.5 * dof) -
         0.5 * k * std::log(dof * M_PI) - 0.5 * logdet -
         0.5 * (dof + k) * std::log1p(quad / dof);
}

}  // namespace lgi
