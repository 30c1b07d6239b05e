#include "lgi/simbench.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "lgi/numeric.hpp"

namespace lgi {

SimOptions desk_preset(int dgm) {
  SimOptions o;
  o.dgm = dgm;
  o.n_rows = 60;
  o.n_cols = 100;
  o.n_studies = 40;
  o.n_heldout_rows = 10;
  o.n_heldout_cols = 10;
  return o;
}

SimOptions paper_preset(int dgm) {
  SimOptions o;
  o.dgm = dgm;
  return o;
}

ChainConfig desk_chain_config() {
  ChainConfig c;
  c.n_iter = 3000;
  c.burn_in = 1500;
  c.thin = 5;
  c.n_chains = 3;
  return c;
}

namespace {

// Taxonomy synthesis: species grouped into genera of 2-4, genera into
// families of 2-3, bird families into orders of ~3.
TaxonomyTable synth_taxonomy(int n, const std::string& prefix, bool with_order,
                             Rng& rng) {
  TaxonomyTable tax;
  int genus = 0, family = 0, order = 0;
  int genus_left = 0, family_left = 0, order_left = 0;
  for (int i = 0; i < n; ++i) {
    if (genus_left == 0) {
      ++genus;
      genus_left = 2 + static_cast<int>(rng.integer(3));
      if (family_left == 0) {
        ++family;
        family_left = 2 + static_cast<int>(rng.integer(2));
        if (order_left == 0) {
          ++order;
          order_left = 3;
        }
        --order_left;
      }
      --family_left;
    }
    --genus_left;
    tax.species_ids.push_back(prefix + std::to_string(i));
    tax.genus.push_back(prefix + "g" + std::to_string(genus));
    tax.family.push_back(prefix + "f" + std::to_string(family));
    tax.order.push_back(with_order ? prefix + "o" + std::to_string(order) : "");
  }
  return tax;
}

// Covariate bank from a matrix normal: cross-species covariance C, constant
// cross-covariate correlation.
MatrixXd covariate_bank(const MatrixXd& C, int k, double cov_corr, Rng& rng) {
  int n = static_cast<int>(C.rows());
  MatrixXd z(n, k);
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < n; ++i) z(i, c) = rng.normal();
  Eigen::LLT<MatrixXd> species_chol(C);
  MatrixXd R = MatrixXd::Constant(k, k, cov_corr);
  R.diagonal().setOnes();
  Eigen::LLT<MatrixXd> cov_chol(R);
  return species_chol.matrixL() * z * MatrixXd(cov_chol.matrixL()).transpose();
}

VectorXd median_center(const VectorXd& v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::nth_element(s.begin(), s.begin() + s.size() / 2, s.end());
  double med = s[s.size() / 2];
  return v.array() - med;
}

}  // namespace

SimulatedData generate_dataset(const SimOptions& opt, std::uint64_t seed) {
  if (opt.dgm < 1 || opt.dgm > 3) throw std::invalid_argument("dgm must be 1..3");
  Rng rng = Rng::child(seed, {0x73696dULL, static_cast<std::uint64_t>(opt.dgm)});

  SimulatedData out;
  int nb = opt.n_rows, np = opt.n_cols;

  out.tax_rows = synth_taxonomy(nb, "b", true, rng);
  out.tax_cols = synth_taxonomy(np, "p", false, rng);
  std::vector<std::string> row_ids = out.tax_rows.species_ids;
  std::vector<std::string> col_ids = out.tax_cols.species_ids;
  MatrixXd C_rows = build_taxonomy_correlation(out.tax_rows, row_ids).C;
  MatrixXd C_cols = build_taxonomy_correlation(out.tax_cols, col_ids).C;

  // Observed trait layout: birds 2 continuous + 3 binary, plants 4 continuous
  // + 8 binary; one unobserved continuous and one unobserved binary per side.
  const int pB_obs = 5, pP_obs = 12;
  MatrixXd bank_b = covariate_bank(C_rows, pB_obs + 2, opt.cov_correlation, rng);
  MatrixXd bank_p = covariate_bank(C_cols, pP_obs + 2, opt.cov_correlation, rng);

  auto realize = [&](MatrixXd& bank, int n_cont_obs, int p_obs) {
    // observed continuous columns stay Gaussian; the rest become Bernoulli
    // through a logistic link; the two trailing columns are the unobserved
    // continuous / binary pair
    int k = static_cast<int>(bank.cols());
    for (int c = 0; c < k; ++c) {
      bool cont = (c < n_cont_obs) || (c == p_obs);
      if (cont) continue;
      for (int i = 0; i < bank.rows(); ++i)
        bank(i, c) = rng.bernoulli(expit(bank(i, c))) ? 1.0 : 0.0;
    }
  };
  realize(bank_b, 2, pB_obs);
  realize(bank_p, 4, pP_obs);

  // Detection probabilities (deterministic in the covariates).
  VectorXd det_lp_rows, det_lp_cols;
  if (opt.dgm == 3) {
    det_lp_rows = opt.detection_slope * (bank_b.col(pB_obs) + bank_b.col(pB_obs + 1));
    det_lp_cols = opt.detection_slope * (bank_p.col(pP_obs) + bank_p.col(pP_obs + 1));
  } else {
    det_lp_rows = opt.detection_slope *
                  (bank_b.col(0) + bank_b.col(2) + bank_b.col(3));
    det_lp_cols = opt.detection_slope *
                  (bank_p.col(0) + bank_p.col(1) + bank_p.col(4) + bank_p.col(5));
  }
  double det_intercept = logit(opt.median_detection);
  det_lp_rows = median_center(det_lp_rows).array() + det_intercept;
  det_lp_cols = median_center(det_lp_cols).array() + det_intercept;

  SyntheticTruth& truth = out.truth;
  truth.p_rows_true = det_lp_rows.unaryExpr([](double v) { return expit(v); });
  truth.p_cols_true = det_lp_cols.unaryExpr([](double v) { return expit(v); });

  // Study overlap counts from per-study species inclusion with heterogeneous
  // propensities (heavy right tail of observational effort).
  VectorXd q_rows(nb), q_cols(np);
  double fl = opt.inclusion_floor;
  for (int i = 0; i < nb; ++i) q_rows(i) = fl + (1.0 - fl) * rng.beta(0.4, 2.6);
  for (int j = 0; j < np; ++j) q_cols(j) = fl + (1.0 - fl) * rng.beta(0.4, 2.6);

  MatrixXi overlap = MatrixXi::Zero(nb, np);
  std::vector<int> in_rows, in_cols;
  for (int s = 0; s < opt.n_studies; ++s) {
    in_rows.clear();
    in_cols.clear();
    for (int i = 0; i < nb; ++i)
      if (rng.bernoulli(q_rows(i))) in_rows.push_back(i);
    for (int j = 0; j < np; ++j)
      if (rng.bernoulli(q_cols(j))) in_cols.push_back(j);
    for (int i : in_rows)
      for (int j : in_cols) overlap(i, j) += 1;
  }

  // Designated out-of-sample species: all their overlap counts forced to 0.
  // The count is capped at a third of the side so tiny instances keep enough
  // observable cells for the density calibration.
  auto pick_heldout = [&](int n, int count) {
    count = std::min(count, n / 3);
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    for (int i = 0; i < n; ++i)
      std::swap(all[i], all[static_cast<int>(rng.integer(n))]);
    all.resize(static_cast<std::size_t>(std::max(count, 0)));
    std::sort(all.begin(), all.end());
    return all;
  };
  truth.heldout_rows = pick_heldout(nb, opt.n_heldout_rows);
  truth.heldout_cols = pick_heldout(np, opt.n_heldout_cols);
  for (int i : truth.heldout_rows) overlap.row(i).setZero();
  for (int j : truth.heldout_cols) overlap.col(j).setZero();

  // Interaction-model linear predictor without the intercept.
  MatrixXd slope_lp(nb, np);
  truth.kappa = VectorXd::Constant(5, opt.slope);
  if (opt.dgm == 1) {
    slope_lp.setZero();
    for (int l = 0; l < 5; ++l)
      slope_lp += opt.slope * bank_b.col(l) * bank_p.col(l).transpose();
  } else if (opt.dgm == 2) {
    slope_lp = opt.slope * (bank_b.col(1) + bank_b.col(2) + bank_b.col(4)) *
               VectorXd::Ones(np).transpose();
    slope_lp += VectorXd::Ones(nb) *
                (opt.slope * (bank_p.col(1) + bank_p.col(9))).transpose();
  } else {
    truth.kappa = VectorXd::Constant(2, opt.slope);
    slope_lp = opt.slope * bank_b.col(pB_obs) * bank_p.col(pP_obs).transpose();
    slope_lp +=
        opt.slope * bank_b.col(pB_obs + 1) * bank_p.col(pP_obs + 1).transpose();
  }

  // Bisection on the intercept to hit the target recorded density in
  // expectation.
  auto expected_density = [&](double k0) {
    double acc = 0.0;
    for (int j = 0; j < np; ++j)
      for (int i = 0; i < nb; ++i) {
        if (overlap(i, j) == 0) continue;
        double pl = expit(k0 + slope_lp(i, j));
        double pd = -std::expm1(overlap(i, j) *
                                std::log1p(-truth.p_rows_true(i) *
                                           truth.p_cols_true(j)));
        acc += pl * pd;
      }
    return acc / (static_cast<double>(nb) * np);
  };
  double lo = -30.0, hi = 30.0;
  if (expected_density(lo) > opt.target_density ||
      expected_density(hi) < opt.target_density)
    throw std::runtime_error("density calibration failed: target out of range");
  double k0 = 0.0;
  bool converged = false;
  for (int step = 0; step < 100; ++step) {
    k0 = 0.5 * (lo + hi);
    double d = expected_density(k0);
    if (std::abs(d - opt.target_density) < 1e-5) {
      converged = true;
      break;
    }
    (d < opt.target_density ? lo : hi) = k0;
  }
  if (!converged && std::abs(expected_density(k0) - opt.target_density) > 1e-3)
    throw std::runtime_error("density calibration failed after 100 bisection steps");
  truth.kappa0 = k0;

  // Draw the truth and push it through the detection mechanism.
  truth.L_true.resize(nb, np);
  truth.prob_true.resize(nb, np);
  MatrixXi adjacency = MatrixXi::Zero(nb, np);
  long recorded = 0;
  for (int j = 0; j < np; ++j)
    for (int i = 0; i < nb; ++i) {
      double pl = expit(k0 + slope_lp(i, j));
      truth.prob_true(i, j) = pl;
      bool possible = rng.bernoulli(pl);
      truth.L_true(i, j) = possible ? 1 : 0;
      if (possible && overlap(i, j) > 0) {
        double pd = -std::expm1(overlap(i, j) *
                                std::log1p(-truth.p_rows_true(i) *
                                           truth.p_cols_true(j)));
        if (rng.bernoulli(pd)) {
          adjacency(i, j) = 1;
          ++recorded;
        }
      }
    }
  truth.achieved_density = static_cast<double>(recorded) / (nb * np);

  out.data.n_rows = nb;
  out.data.n_cols = np;
  out.data.adjacency = adjacency;
  out.data.overlap = overlap;
  out.data.row_ids = row_ids;
  out.data.col_ids = col_ids;
  for (int s = 0; s < opt.n_studies; ++s)
    out.data.study_ids.push_back("s" + std::to_string(s));

  // Observed traits with the study's missingness profile: per-column missing
  // rates ramp from 0 to the side's maximum.
  auto make_traits = [&](const MatrixXd& bank, int p_obs, int n_cont,
                         double max_missing, const std::vector<std::string>& ids,
                         const std::string& prefix) {
    TraitMatrix tm;
    tm.n = static_cast<int>(bank.rows());
    tm.p = p_obs;
    tm.values = bank.leftCols(p_obs);
    tm.missing.setConstant(tm.n, p_obs, false);
    tm.center = VectorXd::Zero(p_obs);
    tm.scale = VectorXd::Ones(p_obs);
    tm.species_ids = ids;
    for (int m = 0; m < p_obs; ++m) {
      tm.kind.push_back(m < n_cont ? TraitKind::kContinuous : TraitKind::kBinary);
      tm.names.push_back(prefix + (m < n_cont ? "c" : "b") + std::to_string(m));
      double rate = p_obs > 1 ? max_missing * m / (p_obs - 1) : 0.0;
      for (int i = 0; i < tm.n; ++i)
        if (rng.bernoulli(rate)) {
          tm.missing(i, m) = true;
          tm.values(i, m) = 0.0;
        }
    }
    // standardize continuous columns over observed cells, as the loader does
    for (int m = 0; m < n_cont; ++m) {
      double sum = 0.0;
      int cnt = 0;
      for (int i = 0; i < tm.n; ++i)
        if (!tm.missing(i, m)) {
          sum += tm.values(i, m);
          ++cnt;
        }
      double mean = cnt > 0 ? sum / cnt : 0.0;
      double ss = 0.0;
      for (int i = 0; i < tm.n; ++i)
        if (!tm.missing(i, m)) ss += (tm.values(i, m) - mean) * (tm.values(i, m) - mean);
      double sd = cnt > 1 ? std::sqrt(ss / (cnt - 1)) : 1.0;
      if (sd <= 0.0) sd = 1.0;
      tm.center(m) = mean;
      tm.scale(m) = sd;
      for (int i = 0; i < tm.n; ++i)
        tm.values(i, m) = tm.missing(i, m) ? 0.0 : (tm.values(i, m) - mean) / sd;
    }
    return tm;
  };
  out.traits_rows =
      make_traits(bank_b, pB_obs, 2, opt.max_missing_rows, row_ids, "x");
  out.traits_cols =
      make_traits(bank_p, pP_obs, 4, opt.max_missing_cols, col_ids, "w");

  return out;
}

double auroc(const VectorXd& scores, const std::vector<int>& labels) {
  if (scores.size() != static_cast<Eigen::Index>(labels.size()))
    throw std::invalid_argument("auroc: size mismatch");
  long n_pos = 0, n_neg = 0;
  for (int l : labels) (l ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("auroc: needs both classes");

  // average ranks with midranks for ties
  std::vector<int> idx(labels.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return scores(a) < scores(b); });
  double rank_sum_pos = 0.0;
  std::size_t k = 0;
  while (k < idx.size()) {
    std::size_t k2 = k;
    while (k2 + 1 < idx.size() && scores(idx[k2 + 1]) == scores(idx[k])) ++k2;
    double avg_rank = 0.5 * (static_cast<double>(k + 1) + static_cast<double>(k2 + 1));
    for (std::size_t t = k; t <= k2; ++t)
      if (labels[idx[t]]) rank_sum_pos += avg_rank;
    k = k2 + 1;
  }
  return (rank_sum_pos - 0.5 * n_pos * (n_pos + 1)) /
         (static_cast<double>(n_pos) * n_neg);
}

const EvalRow* EvalTable::find(const std::string& category,
                               const std::string& axis, int bin) const {
  for (const auto& r : rows)
    if (r.category == category && r.axis == axis && r.bin == bin) return &r;
  return nullptr;
}

namespace {

EvalRow score_cells(const std::string& category, const std::string& axis, int bin,
                    const MatrixXd& predictions, const SimulatedData& sim,
                    const std::vector<std::pair<int, int>>& cells) {
  EvalRow row;
  row.category = category;
  row.axis = axis;
  row.bin = bin;
  VectorXd scores(cells.size()), oracle(cells.size());
  std::vector<int> labels(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    auto [i, j] = cells[k];
    scores(k) = predictions(i, j);
    oracle(k) = sim.truth.prob_true(i, j);
    labels[k] = sim.truth.L_true(i, j);
    (labels[k] ? row.n_positive : row.n_negative)++;
  }
  if (row.n_positive > 0 && row.n_negative > 0) {
    row.auroc_value = auroc(scores, labels);
    row.oracle_auroc = auroc(oracle, labels);
  }
  return row;
}

}  // namespace

EvalTable evaluate_stratified(const MatrixXd& predictions,
                              const SimulatedData& sim,
                              const EffortSummary& effort) {
  const auto& data = sim.data;
  EvalTable table;

  auto in_sample_row = [&](int i) { return effort.row_effort(i) > 0; };
  auto in_sample_col = [&](int j) { return effort.col_effort(j) > 0; };

  std::vector<std::pair<int, int>> cells;
  auto collect = [&](auto&& keep) {
    cells.clear();
    for (int j = 0; j < data.n_cols; ++j)
      for (int i = 0; i < data.n_rows; ++i)
        if (data.adjacency(i, j) == 0 && keep(i, j)) cells.emplace_back(i, j);
    return cells;
  };

  auto push = [&](const std::string& cat, const std::string& axis, int bin) {
    table.rows.push_back(score_cells(cat, axis, bin, predictions, sim, cells));
  };

  collect([&](int i, int j) { return in_sample_row(i) && in_sample_col(j); });
  push("unrecorded", "", -1);

  collect([&](int i, int j) {
    return in_sample_row(i) && in_sample_col(j) && sim.truth.L_true(i, j) == 1;
  });
  push("unrecorded-true", "", -1);

  collect([&](int i, int j) {
    return in_sample_row(i) && in_sample_col(j) && data.overlap(i, j) > 0;
  });
  push("co-existing", "", -1);

  collect([&](int i, int j) {
    return in_sample_row(i) && in_sample_col(j) && data.overlap(i, j) == 0;
  });
  push("never-co-existing", "", -1);

  collect([&](int i, int j) { return in_sample_row(i) != in_sample_col(j); });
  push("half-in-sample", "", -1);

  collect([&](int i, int j) { return !in_sample_row(i) && !in_sample_col(j); });
  push("out-of-sample", "", -1);

  for (int bin = 1; bin <= 3; ++bin) {
    collect([&](int i, int j) {
      return effort.row_bin(i) == bin && in_sample_col(j);
    });
    push("unrecorded", "row", bin);
  }
  for (int bin = 1; bin <= 3; ++bin) {
    collect([&](int i, int j) {
      return effort.col_bin(j) == bin && in_sample_row(i);
    });
    push("unrecorded", "col", bin);
  }
  return table;
}

std::vector<HoldoutRep> holdout_cv(const InteractionData& data, int k, int reps,
                                   Rng& rng) {
  if (k < 1) throw std::invalid_argument("holdout_cv: k must be >= 1");
  if (reps < 1) throw std::invalid_argument("holdout_cv: reps must be >= 1");
  std::vector<std::pair<int, int>> recorded;
  for (int j = 0; j < data.n_cols; ++j)
    for (int i = 0; i < data.n_rows; ++i)
      if (data.adjacency(i, j) == 1) recorded.emplace_back(i, j);
  if (static_cast<int>(recorded.size()) < k)
    throw std::invalid_argument("holdout_cv: k exceeds recorded interactions");

  std::vector<HoldoutRep> reps_out;
  reps_out.reserve(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    for (std::size_t t = 0; t < recorded.size(); ++t)
      std::swap(recorded[t],
                recorded[static_cast<std::size_t>(rng.integer(recorded.size()))]);
    HoldoutRep rep;
    rep.masked = data;
    rep.cells.assign(recorded.begin(), recorded.begin() + k);
    for (auto [i, j] : rep.cells) rep.masked.adjacency(i, j) = 0;
    reps_out.push_back(std::move(rep));
  }
  return reps_out;
}

HoldoutRatio holdout_ratio(const MatrixXd& prob, const HoldoutRep& rep) {
  std::vector<double> held, unrecorded;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> is_held;
  is_held.setConstant(rep.masked.n_rows, rep.masked.n_cols, false);
  for (auto [i, j] : rep.cells) is_held(i, j) = true;
  for (int j = 0; j < rep.masked.n_cols; ++j)
    for (int i = 0; i < rep.masked.n_rows; ++i) {
      if (rep.masked.adjacency(i, j) == 1) continue;
      unrecorded.push_back(prob(i, j));
      if (is_held(i, j)) held.push_back(prob(i, j));
    }
  if (held.empty() || unrecorded.empty())
    throw std::invalid_argument("holdout_ratio: nothing held out");

  auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  HoldoutRatio out;
  double denom_mean = mean(unrecorded);
  double denom_median = median(unrecorded);
  out.mean_ratio = denom_mean > 0 ? mean(held) / denom_mean : 0.0;
  out.median_ratio = denom_median > 0 ? median(held) / denom_median
                                      : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace lgi
