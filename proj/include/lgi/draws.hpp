#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lgi/config.hpp"
#include "lgi/network_data.hpp"

namespace lgi {

enum class ModelKind {
  kLatentBiasCorrected,
  kLatentObserved,
  kCovBiasCorrected,
  kCovObserved,
};

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

// Packed 0/1 matrix for thinned interaction snapshots.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(int rows, int cols)
      : rows_(rows), cols_(cols),
        words_((static_cast<std::size_t>(rows) * cols + 63) / 64, 0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool get(int i, int j) const {
    std::size_t k = static_cast<std::size_t>(i) * cols_ + j;
    return (words_[k >> 6] >> (k & 63)) & 1u;
  }
  void set(int i, int j, bool v) {
    std::size_t k = static_cast<std::size_t>(i) * cols_ + j;
    std::uint64_t bit = 1ULL << (k & 63);
    if (v)
      words_[k >> 6] |= bit;
    else
      words_[k >> 6] &= ~bit;
  }
  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t>& words() { return words_; }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<std::uint64_t> words_;
};

// One kept draw. Latent-factor models fill the factor blocks; covariate-direct
// models fill `alpha` (intercept, then bird and plant slopes) and the trait
// means `mu_x`/`mu_w` of their imputation submodels instead.
struct ParamDraw {
  double lambda0 = 0.0;
  VectorXd lambda;
  MatrixXd U, V;
  MatrixXd beta, gamma;
  VectorXd sigma2_x, sigma2_w;
  double delta0 = 0.0;
  VectorXd delta;
  double sigma2_p_rows = 1.0;
  double zeta0 = 0.0;
  VectorXd zeta;
  double sigma2_p_cols = 1.0;
  VectorXd p_rows, p_cols;
  double rho_rows = 0.5;
  double rho_cols = 0.5;
  VectorXd alpha;
  VectorXd mu_x, mu_w;
};

// Thinned post-burn-in output of one fit, pooled across chains. `l_sum` and
// `prob_sum` accumulate the interaction indicator and the interaction-model
// probability per cell over every kept draw.
struct PosteriorDraws {
  ModelKind model = ModelKind::kLatentBiasCorrected;
  int n_rows = 0, n_cols = 0, H = 0, p_B = 0, p_P = 0;

  std::vector<std::vector<ParamDraw>> chains;
  std::vector<std::vector<BitMatrix>> l_draws;  // empty when snapshots are off
  MatrixXd l_sum;
  MatrixXd prob_sum;

  std::vector<int> tracked_rows, tracked_cols;
  // per-chain scalar traces; every series has exactly kept_per_chain entries
  std::vector<std::map<std::string, std::vector<double>>> series;

  PriorConfig prior;
  ChainConfig chain_config;

  int total_kept() const {
    int n = 0;
    for (const auto& c : chains) n += static_cast<int>(c.size());
    return n;
  }

  // Posterior mean of the interaction indicator (recorded cells are 1 in
  // every draw for the bias-corrected models).
  MatrixXd l_mean() const;
  // Posterior mean of the interaction-model probability; the score used for
  // models that treat the recorded network as truth.
  MatrixXd model_prob_mean() const;
};

// Everything a downstream command needs to resume work on a fit.
struct FitBundle {
  PosteriorDraws draws;
  InteractionData data;
  TraitMatrix traits_rows, traits_cols;
  TaxonomyCorrelation tax_rows, tax_cols;
};

void save_fit_bundle(const FitBundle& bundle, const std::string& path);
FitBundle load_fit_bundle(const std::string& path);

}  // namespace lgi
