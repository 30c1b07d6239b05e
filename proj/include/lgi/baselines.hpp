#pragma once

#include "lgi/config.hpp"
#include "lgi/draws.hpp"
#include "lgi/gibbs.hpp"
#include "lgi/network_data.hpp"

namespace lgi {

// The three reference samplers the main model is compared against. They share
// the data model, the Polya-Gamma sampler, and the posterior-draw container.
//
//  - covariates, bias corrected: interaction and detection submodels linear in
//    the observed covariates, same false-negative mechanism as the main model,
//    intercept-only imputation submodels per trait.
//  - covariates, observed: the same interaction submodel with L pinned to A;
//    no detection machinery, imputation drops the detection term.
//  - latent factors, observed: the main latent-factor engine with L pinned to
//    A and the detection submodel removed.

PosteriorDraws fit_cov_bias_corrected(const InteractionData& data,
                                      const TraitMatrix& traits_rows,
                                      const TraitMatrix& traits_cols,
                                      const PriorConfig& prior,
                                      const ChainConfig& cfg);

PosteriorDraws fit_cov_observed(const InteractionData& data,
                                const TraitMatrix& traits_rows,
                                const TraitMatrix& traits_cols,
                                const PriorConfig& prior, const ChainConfig& cfg);

PosteriorDraws fit_latent_observed(const InteractionData& data,
                                   const TraitMatrix& traits_rows,
                                   const TraitMatrix& traits_cols,
                                   const MatrixXd& C_rows, const MatrixXd& C_cols,
                                   const PriorConfig& prior,
                                   const ChainConfig& cfg);

// State of the covariate-direct samplers, exposed for the conditional-update
// tests. alpha stacks (intercept, bird slopes, plant slopes).
struct CovState {
  int n_rows = 0, n_cols = 0, p_B = 0, p_P = 0;
  Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> L;
  VectorXd alpha;
  VectorXd delta;  // detection slopes on bird covariates, delta(0) intercept
  double sigma2_p_rows = 1.0;
  VectorXd zeta;
  double sigma2_p_cols = 1.0;
  VectorXd p_rows, p_cols;
  // intercept-only trait submodels: mean for continuous, logit mean for binary
  VectorXd mu_x, mu_w;
  VectorXd sigma2_x, sigma2_w;
  MatrixXd X, W;  // working trait values with current imputations
};

struct CovScratch {
  MatrixXd omega_l;
};

CovState init_cov_state(const InteractionData& data, const TraitMatrix& traits_rows,
                        const TraitMatrix& traits_cols, bool bias_corrected);

double cov_interaction_logit(const CovState& s, int i, int j);

void cov_sweep(CovState& s, const InteractionData& data,
               const TraitMatrix& traits_rows, const TraitMatrix& traits_cols,
               const PriorConfig& prior, CovScratch& scratch, bool bias_corrected,
               Rng& rng);

// Conditional used to impute one missing binary trait cell; exposed so the
// two-point enumeration oracle can check it directly. Returns P(X = 1 | .).
double cov_binary_imputation_prob(const CovState& s, const TraitMatrix& traits_rows,
                                  bool row_side, int unit, int trait,
                                  bool bias_corrected);

}  // namespace lgi
