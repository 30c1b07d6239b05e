#include "lgi/predict.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "lgi/numeric.hpp"

namespace lgi {

InteractionPosterior posterior_interaction_matrix(const PosteriorDraws& draws,
                                                  const InteractionData& data) {
  if (draws.total_kept() == 0) throw std::runtime_error("no kept draws");
  InteractionPosterior out;
  out.prob = draws.l_mean();
  out.recorded = data.adjacency;

  // Monte-Carlo error from the spread of per-chain means.
  int n_chains = static_cast<int>(draws.chains.size());
  out.mcse = MatrixXd::Zero(draws.n_rows, draws.n_cols);
  if (n_chains >= 2 && !draws.l_draws.empty()) {
    std::vector<MatrixXd> chain_means;
    for (const auto& chain : draws.l_draws) {
      MatrixXd m = MatrixXd::Zero(draws.n_rows, draws.n_cols);
      for (const auto& snap : chain)
        for (int j = 0; j < draws.n_cols; ++j)
          for (int i = 0; i < draws.n_rows; ++i) m(i, j) += snap.get(i, j);
      if (!chain.empty()) m /= static_cast<double>(chain.size());
      chain_means.push_back(std::move(m));
    }
    MatrixXd mean = MatrixXd::Zero(draws.n_rows, draws.n_cols);
    for (const auto& m : chain_means) mean += m;
    mean /= static_cast<double>(n_chains);
    MatrixXd var = MatrixXd::Zero(draws.n_rows, draws.n_cols);
    for (const auto& m : chain_means) var += (m - mean).cwiseProduct(m - mean);
    var /= static_cast<double>(n_chains - 1);
    out.mcse = (var / static_cast<double>(n_chains)).cwiseSqrt();
  }
  return out;
}

namespace {

VectorXd standardized_traits(const NewSpecies& sp, const TraitMatrix& fitted) {
  if (sp.traits.size() != fitted.p ||
      static_cast<int>(sp.missing.size()) != fitted.p)
    throw std::invalid_argument("new species has " +
                                std::to_string(sp.traits.size()) +
                                " traits, fit expects " + std::to_string(fitted.p));
  VectorXd x(fitted.p);
  for (int m = 0; m < fitted.p; ++m) {
    if (sp.missing[m]) {
      x(m) = 0.0;
      continue;
    }
    if (fitted.kind[m] == TraitKind::kBinary) {
      if (sp.traits(m) != 0.0 && sp.traits(m) != 1.0)
        throw std::invalid_argument("binary trait '" + fitted.names[m] +
                                    "' must be 0 or 1");
      x(m) = sp.traits(m);
    } else {
      x(m) = (sp.traits(m) - fitted.center(m)) / fitted.scale(m);
    }
  }
  return x;
}

}  // namespace

MatrixXd sample_new_latents(const PosteriorDraws& draws, const NewSpecies& sp,
                            const TaxonomyCorrelation& fitted_tax, Rng& rng) {
  VectorXd cross =
      taxonomy_cross_correlation(fitted_tax, sp.genus, sp.family, sp.order);
  bool related = false;
  for (int i = 0; i < cross.size(); ++i)
    if (cross(i) != 0.0) related = true;

  int total = draws.total_kept();
  int H = draws.H;
  MatrixXd latents(total, H);
  int r = 0;
  for (const auto& chain : draws.chains) {
    for (const auto& d : chain) {
      double rho = sp.row_side ? d.rho_rows : d.rho_cols;
      const MatrixXd& factors = sp.row_side ? d.U : d.V;
      // conditional of the appended species given the in-sample block; an
      // unrelated species (zero cross-correlation) falls back to N(0, 1)
      bool conditioned = related && rho > 0.0;
      double cond_var = 1.0;
      VectorXd w;
      if (conditioned) {
        Eigen::LLT<MatrixXd> llt(blend_correlation(fitted_tax.C, rho));
        if (llt.info() != Eigen::Success)
          throw std::runtime_error("singular in-sample correlation block");
        VectorXd c = rho * cross;
        w = llt.solve(c);
        cond_var = 1.0 - c.dot(w);
        if (cond_var < 1e-12) cond_var = 1e-12;
      }
      double sd = std::sqrt(cond_var);
      for (int h = 0; h < H; ++h) {
        double mu = conditioned ? w.dot(factors.col(h)) : 0.0;
        latents(r, h) = rng.normal(mu, sd);
      }
      ++r;
    }
  }
  return latents;
}

VectorXd importance_weights(const PosteriorDraws& draws, const NewSpecies& sp,
                            const TraitMatrix& fitted_traits,
                            const MatrixXd& latents) {
  VectorXd x = standardized_traits(sp, fitted_traits);
  int total = draws.total_kept();
  if (latents.rows() != total)
    throw std::invalid_argument("latent draws do not match kept draws");

  VectorXd weights(total);
  int r = 0;
  for (const auto& chain : draws.chains) {
    for (const auto& d : chain) {
      const MatrixXd& coef = sp.row_side ? d.beta : d.gamma;
      const VectorXd& sigma2 = sp.row_side ? d.sigma2_x : d.sigma2_w;
      double logw = 0.0;
      for (int m = 0; m < fitted_traits.p; ++m) {
        if (sp.missing[m]) continue;  // missing traits contribute weight 1
        double pred = coef(m, 0) + coef.row(m).tail(draws.H) * latents.row(r).transpose();
        if (fitted_traits.kind[m] == TraitKind::kBinary) {
          double p = expit(pred);
          logw += x(m) == 1.0 ? std::log(p) : std::log1p(-p);
        } else {
          logw += log_normal_pdf(x(m), pred, sigma2(m));
        }
      }
      weights(r) = std::exp(logw);
      ++r;
    }
  }
  return weights;
}

OutOfSamplePrediction predict_out_of_sample(const FitBundle& fit,
                                            const NewSpecies* new_row,
                                            int row_index,
                                            const NewSpecies* new_col,
                                            int col_index, Rng& rng) {
  if (new_row == nullptr && new_col == nullptr)
    throw std::invalid_argument("at least one side must be a new species");
  const PosteriorDraws& draws = fit.draws;
  int total = draws.total_kept();
  if (total == 0) throw std::runtime_error("no kept draws");

  MatrixXd row_latents, col_latents;
  VectorXd weights = VectorXd::Ones(total);
  if (new_row) {
    row_latents = sample_new_latents(draws, *new_row, fit.tax_rows, rng);
    weights =
        weights.cwiseProduct(importance_weights(draws, *new_row, fit.traits_rows,
                                                row_latents));
  }
  if (new_col) {
    col_latents = sample_new_latents(draws, *new_col, fit.tax_cols, rng);
    weights =
        weights.cwiseProduct(importance_weights(draws, *new_col, fit.traits_cols,
                                                col_latents));
  }

  double wsum = weights.sum();
  if (!(wsum > 0.0))
    throw std::runtime_error(
        "all importance weights are zero; the trait values are implausible at "
        "this fit's scale (consider rescaling traits)");

  double acc = 0.0;
  int r = 0;
  for (const auto& chain : draws.chains) {
    for (const auto& d : chain) {
      double lp = d.lambda0;
      for (int h = 0; h < draws.H; ++h) {
        double u = new_row ? row_latents(r, h) : d.U(row_index, h);
        double v = new_col ? col_latents(r, h) : d.V(col_index, h);
        lp += d.lambda(h) * u * v;
      }
      if (rng.bernoulli(expit(lp))) acc += weights(r);
      ++r;
    }
  }

  OutOfSamplePrediction out;
  out.prob = acc / wsum;
  out.ess = wsum * wsum / weights.squaredNorm();
  out.n_draws = total;
  if (out.ess < 0.1 * total)
    std::cerr << "warning: importance-weight effective sample size " << out.ess
              << " below 10% of " << total << " draws\n";
  return out;
}

}  // namespace lgi
