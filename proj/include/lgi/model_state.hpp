#pragma once

#include <Eigen/Dense>
#include <utility>

#include "lgi/config.hpp"
#include "lgi/network_data.hpp"
#include "lgi/rng.hpp"

namespace lgi {

// Stick-breaking bookkeeping of the increasing shrinkage prior. The slab/spike
// indicator z_h addresses the mixture weights: z_h <= h puts theta_h on the
// spike (theta_inf), z_h > h leaves it on the inverse-gamma slab.
struct ShrinkState {
  VectorXd theta;       // H overall variances
  MatrixXd tau_beta;    // p_B x H
  MatrixXd tau_gamma;   // p_P x H
  VectorXd tau_lambda;  // H
  VectorXd tau_delta;   // H
  VectorXd tau_zeta;    // H
  VectorXd v;           // H stick fractions, v_H = 1
  VectorXd omega;       // H weights, sums to 1
  VectorXd pi;          // H cumulative weights, pi_H = 1
  VectorXi z;           // H indicators in 1..H
};

enum class CoefFamily { kBeta, kGamma, kLambda, kDelta, kZeta };

// omega_l = v_l * prod_{t<l} (1 - v_t); pi_h = sum_{l<=h} omega_l.
// Requires v_t in [0,1] and v_H = 1 (so the weights sum to one).
std::pair<VectorXd, VectorXd> stick_break(const VectorXd& v);

// Prior variance tau * theta_h of one slope coefficient. Intercepts do not
// pass through here; they carry the fixed sigma2_0 prior.
double coefficient_prior_variance(const ShrinkState& s, CoefFamily family,
                                  int trait_index, int h);

// Full parameter state of one chain.
struct ParamState {
  int n_rows = 0, n_cols = 0, H = 0, p_B = 0, p_P = 0;

  Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> L;  // true interactions
  MatrixXd U, V;  // latent factors, n x H

  double lambda0 = 0.0;
  VectorXd lambda;  // H

  // Trait coefficients, one row per trait: column 0 is the intercept,
  // columns 1..H the factor loadings.
  MatrixXd beta;    // p_B x (H+1)
  MatrixXd gamma;   // p_P x (H+1)
  VectorXd sigma2_x;  // residual variances, used for continuous traits only
  VectorXd sigma2_w;

  double delta0 = 0.0;
  VectorXd delta;  // H
  double sigma2_p_rows = 1.0;
  double zeta0 = 0.0;
  VectorXd zeta;  // H
  double sigma2_p_cols = 1.0;

  VectorXd p_rows;  // detection probabilities, in (0,1)
  VectorXd p_cols;

  double rho_rows = 0.5;
  double rho_cols = 0.5;

  ShrinkState shrink;

  // Trait working copies with current imputations at missing cells.
  MatrixXd X;  // n_rows x p_B
  MatrixXd W;  // n_cols x p_P

  // Cached prior covariance pieces for the current rho values.
  MatrixXd sigma_u_inv, sigma_v_inv;
  Eigen::LLT<MatrixXd> sigma_u_llt, sigma_v_llt;

  void refresh_row_covariance(const MatrixXd& C_rows);
  void refresh_col_covariance(const MatrixXd& C_cols);
};

// Draws an initial state: factors and coefficients from their priors with rho
// at its prior mean, L = A plus Bernoulli(0.1) noise at unrecorded cells,
// detection probabilities at 0.5, missing traits at column means (continuous)
// or observed-frequency draws (binary). theta starts all-slab so early sweeps
// explore before shrinkage engages.
ParamState init_state(const PriorConfig& prior, const InteractionData& data,
                      const TraitMatrix& traits_rows, const TraitMatrix& traits_cols,
                      const MatrixXd& C_rows, const MatrixXd& C_cols, Rng& rng);

}  // namespace lgi
