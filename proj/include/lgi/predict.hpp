#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lgi/draws.hpp"
#include "lgi/network_data.hpp"
#include "lgi/rng.hpp"

namespace lgi {

// Posterior summary of the interaction matrix: cellwise mean of the kept L
// draws pooled over chains, the spread of per-chain means as a Monte-Carlo
// standard error, and the recorded-cell flags.
struct InteractionPosterior {
  MatrixXd prob;
  MatrixXd mcse;
  MatrixXi recorded;
};

InteractionPosterior posterior_interaction_matrix(const PosteriorDraws& draws,
                                                  const InteractionData& data);

// A species absent from every study: traits in original file units with a
// missing mask, plus taxonomy labels used to correlate its latent factors
// with the fitted species. Unseen genera/families correlate 0.
struct NewSpecies {
  std::string id;
  bool row_side = true;
  VectorXd traits;               // raw units, same column order as the fit
  std::vector<bool> missing;
  std::string genus, family, order;
};

// Latent factors for a new species, one row per kept draw (chains pooled in
// order). Each factor column is drawn from the conditional normal of the
// extended correlation blend given that draw's in-sample factors.
MatrixXd sample_new_latents(const PosteriorDraws& draws, const NewSpecies& sp,
                            const TaxonomyCorrelation& fitted_tax, Rng& rng);

// Importance weights: per draw, the product of trait-model densities at the
// species' observed trait values; missing cells contribute 1. Traits are
// standardized with the fit's stored transforms before evaluation.
VectorXd importance_weights(const PosteriorDraws& draws, const NewSpecies& sp,
                            const TraitMatrix& fitted_traits,
                            const MatrixXd& latents);

struct OutOfSamplePrediction {
  double prob = 0.0;
  double ess = 0.0;  // effective sample size of the weights
  int n_draws = 0;
};

// Importance-sampled P(interaction) for a pair with at least one new species.
// For half-in-sample pairs pass the in-sample index on the other side; that
// side uses its stored per-draw factors with weight one.
OutOfSamplePrediction predict_out_of_sample(const FitBundle& fit,
                                            const NewSpecies* new_row,
                                            int row_index,
                                            const NewSpecies* new_col,
                                            int col_index, Rng& rng);

}  // namespace lgi
