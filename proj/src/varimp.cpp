#include "lgi/varimp.hpp"

#include <cmath>
#include <stdexcept>

namespace lgi {

namespace {

// Standardize to mean 0 and unit norm so that correlations become dot
// products; an (effectively) constant vector maps to zero, which makes its
// correlation terms contribute 0 instead of NaN.
VectorXd standardize_or_zero(const VectorXd& x) {
  int n = static_cast<int>(x.size());
  double mean = x.mean();
  VectorXd c = x.array() - mean;
  double ss = c.squaredNorm();
  if (ss < 1e-24) return VectorXd::Zero(n);
  return c / std::sqrt(ss);
}

}  // namespace

ImportanceRow variable_importance(const PosteriorDraws& draws,
                                  const TraitMatrix& traits, bool row_side,
                                  int trait_index, int B, Rng& rng) {
  if (B < 1) throw std::invalid_argument("variable importance needs permutations");
  if (trait_index < 0 || trait_index >= traits.p)
    throw std::out_of_range("trait index");
  if (draws.model != ModelKind::kLatentBiasCorrected &&
      draws.model != ModelKind::kLatentObserved)
    throw std::invalid_argument(
        "variable importance needs a latent-factor fit (interaction logits "
        "are reconstructed from the factors)");

  std::vector<int> observed;
  for (int i = 0; i < traits.n; ++i)
    if (!traits.missing(i, trait_index)) observed.push_back(i);
  int n_obs = static_cast<int>(observed.size());
  if (n_obs < 2)
    throw std::invalid_argument("trait has fewer than two observed species");

  VectorXd x(n_obs);
  for (int k = 0; k < n_obs; ++k) x(k) = traits.values(observed[k], trait_index);
  if ((x.array() - x(0)).abs().maxCoeff() < 1e-12)
    throw std::invalid_argument("trait column is constant; correlation undefined");

  // The permuted columns are fixed up front and reused across draws. Row 0 of
  // the standardized bank is the observed ordering.
  MatrixXd bank(B + 1, n_obs);
  bank.row(0) = standardize_or_zero(x).transpose();
  VectorXd perm = x;
  for (int b = 1; b <= B; ++b) {
    for (int k = n_obs - 1; k > 0; --k) {
      int j = static_cast<int>(rng.integer(static_cast<std::uint64_t>(k + 1)));
      std::swap(perm(k), perm(j));
    }
    bank.row(b) = standardize_or_zero(perm).transpose();
  }

  int n_other = row_side ? draws.n_cols : draws.n_rows;
  VectorXd acc = VectorXd::Zero(B + 1);
  long terms = 0;
  MatrixXd logits(n_obs, n_other);
  MatrixXd own(n_obs, draws.H);
  for (const auto& chain : draws.chains) {
    for (const auto& d : chain) {
      // interaction logits restricted to the observed species of this side
      const MatrixXd& self = row_side ? d.U : d.V;
      const MatrixXd& other = row_side ? d.V : d.U;
      for (int k = 0; k < n_obs; ++k) own.row(k) = self.row(observed[k]);
      logits = own * d.lambda.asDiagonal() * other.transpose();
      logits.array() += d.lambda0;
      for (int j = 0; j < n_other; ++j)
        logits.col(j) = standardize_or_zero(logits.col(j));
      // squared correlations for the observed and every permuted column
      MatrixXd g = bank * logits;  // (B+1) x n_other
      acc += g.cwiseProduct(g).rowwise().sum();
      terms += n_other;
    }
  }
  if (terms == 0) throw std::runtime_error("no kept draws");
  acc /= static_cast<double>(terms);

  ImportanceRow row;
  row.trait = traits.names.empty() ? ("trait_" + std::to_string(trait_index))
                                   : traits.names[trait_index];
  row.group = traits.kind[trait_index];
  row.B = B;
  row.t_obs = acc(0);
  double mean = acc.tail(B).mean();
  double sd = B > 1 ? std::sqrt((acc.tail(B).array() - mean).square().sum() /
                                (B - 1))
                    : 0.0;
  row.perm_mean = mean;
  row.perm_sd = sd;
  row.z = sd > 0.0 ? (row.t_obs - mean) / sd : 0.0;
  return row;
}

std::vector<ImportanceRow> variable_importance_all(const PosteriorDraws& draws,
                                                   const TraitMatrix& traits,
                                                   bool row_side, int B,
                                                   Rng& rng) {
  std::vector<ImportanceRow> rows;
  rows.reserve(static_cast<std::size_t>(traits.p));
  for (int m = 0; m < traits.p; ++m)
    rows.push_back(variable_importance(draws, traits, row_side, m, B, rng));
  return rows;
}

}  // namespace lgi
