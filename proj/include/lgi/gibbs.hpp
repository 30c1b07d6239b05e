#pragma once

#include <Eigen/Dense>

#include "lgi/config.hpp"
#include "lgi/draws.hpp"
#include "lgi/model_state.hpp"
#include "lgi/network_data.hpp"
#include "lgi/polya_gamma.hpp"
#include "lgi/rng.hpp"

namespace lgi {

// Immutable inputs shared by every sweep of one fit.
struct GibbsContext {
  const InteractionData& data;
  const TraitMatrix& traits_rows;
  const TraitMatrix& traits_cols;
  const MatrixXd& C_rows;
  const MatrixXd& C_cols;
  const PriorConfig& prior;
};

// The latent-factor engine serves both the bias-corrected model and the
// variant that takes the recorded network as truth. Without bias correction
// there is no detection submodel: L stays pinned to A, the factor precision
// drops the detection term, and the shrinkage updates run over the trait and
// interaction coefficients only.
struct SweepOptions {
  bool bias_corrected = true;
};

// Per-sweep buffers (Polya-Gamma draws are regenerated every sweep and never
// carried across iterations).
struct SweepScratch {
  MatrixXd omega_l;  // n_rows x n_cols
  MatrixXd omega_x;  // n_rows x p_B, binary columns only
  MatrixXd omega_w;  // n_cols x p_P
};

// Recorded cells stay at 1; unrecorded cells are redrawn from the exact
// Bernoulli conditional that weighs the interaction-model probability against
// the evidence of n_ij undetected chances.
void update_true_interactions(ParamState& s, const InteractionData& data, Rng& rng);

// Closed-form conditional weight P(L_ij = 1 | A_ij = 0, ...) used by the
// update above and by its tests.
double true_interaction_weight(double p_interaction, double p_row, double p_col,
                               int n_overlap);

void draw_interaction_pg(const ParamState& s, MatrixXd& omega_l, Rng& rng);

// Joint normal draw of (lambda0, lambda) given the Polya-Gamma weights.
void update_interaction_coeffs(ParamState& s, const MatrixXd& omega_l,
                               const PriorConfig& prior, Rng& rng);

// Continuous traits: conjugate normal/inverse-gamma. Binary traits: fresh
// Polya-Gamma weights (written into scratch) then a normal draw.
void update_trait_models(ParamState& s, const GibbsContext& ctx,
                         SweepScratch& scratch, Rng& rng);

// Conjugate update of the detection-coefficient blocks with the current
// logit detection probabilities as response.
void update_detection_coeffs(ParamState& s, const PriorConfig& prior, Rng& rng);

void update_latent_factors(ParamState& s, const GibbsContext& ctx,
                           const SweepScratch& scratch, Rng& rng,
                           const SweepOptions& opt = {});

void update_shrinkage(ParamState& s, const PriorConfig& prior, Rng& rng,
                      const SweepOptions& opt = {});

// Metropolis-Hastings sweep over the per-species detection probabilities with
// Beta proposals centered at the current value.
void update_detection_probs(ParamState& s, const InteractionData& data,
                            const PriorConfig& prior, Rng& rng);

// Detection log likelihood of one species' probability: the product over the
// currently-possible pairs of the per-study detection terms.
double detection_loglik(const ParamState& s, const InteractionData& data,
                        bool row_side, int index, double p);

// log of prod_h N(F_col_h; 0, rho C + (1-rho) I), up to the 2*pi constant.
double log_factor_column_density(const MatrixXd& C, double rho, const MatrixXd& F);

// Metropolis-Hastings update of the correlation blends rho.
void update_rho(ParamState& s, const GibbsContext& ctx, Rng& rng);

void impute_missing_traits(ParamState& s, const GibbsContext& ctx, Rng& rng);

// One full sweep in the fixed order: interactions, interaction coefficients,
// trait models, detection coefficients, latent factors, shrinkage, detection
// probabilities, correlation blends, imputation.
void gibbs_sweep(ParamState& s, const GibbsContext& ctx, SweepScratch& scratch,
                 Rng& rng, const SweepOptions& opt = {});

// Interaction-model linear predictor matrix for the current factors.
MatrixXd interaction_logits(const ParamState& s);

// Runs `cfg.n_chains` chains (in parallel when threads allow) and pools the
// thinned draws. Chain seeds derive from the master seed. A non-finite state
// aborts with the offending iteration in the message.
PosteriorDraws run_chain(const ChainConfig& cfg, const PriorConfig& prior,
                         const InteractionData& data,
                         const TraitMatrix& traits_rows,
                         const TraitMatrix& traits_cols, const MatrixXd& C_rows,
                         const MatrixXd& C_cols,
                         ModelKind kind = ModelKind::kLatentBiasCorrected);

}  // namespace lgi
