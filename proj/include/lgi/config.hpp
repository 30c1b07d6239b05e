#pragma once

#include <cstdint>
#include <string>

namespace lgi {

// Hyperparameters shared by the samplers. Field names double as the JSON
// config keys (ASCII spellings of the model symbols).
struct PriorConfig {
  int H = 10;                 // latent dimension truncation
  double nu = 5.0;            // scale-mixture degrees of freedom for the tau terms
  double alpha = 5.0;         // stick-breaking concentration
  double alpha_theta = 2.0;   // slab inverse-gamma shape
  double beta_theta = 2.0;    // slab inverse-gamma scale
  double theta_inf = 0.01;    // spike value
  double a_rho = 1.0;         // Beta prior on the correlation blends
  double b_rho = 1.0;
  double a_sigma = 1.0;       // inverse-gamma prior on residual variances
  double b_sigma = 1.0;
  double mu0 = 0.0;           // intercept prior mean
  double sigma2_0 = 100.0;    // intercept prior variance
  double mh_concentration = 100.0;  // Beta proposal concentration for MH steps

  void validate() const;
  std::string to_json() const;
  static PriorConfig from_json(const std::string& text);
};

struct ChainConfig {
  int n_iter = 5000;
  int burn_in = 2500;
  int thin = 5;
  int n_chains = 3;
  std::uint64_t seed = 1;
  int threads = 0;            // 0 = one thread per chain, capped at hardware
  bool keep_l_draws = true;   // retain thinned L snapshots

  int kept_per_chain() const { return (n_iter - burn_in) / thin; }
  void validate() const;
  std::string to_json() const;
  static ChainConfig from_json(const std::string& text);
};

// Parses a combined config document holding either or both blocks:
// {"prior": {...}, "chain": {...}}; top-level keys are also accepted.
void parse_config_document(const std::string& text, PriorConfig* prior,
                           ChainConfig* chain);

}  // namespace lgi
