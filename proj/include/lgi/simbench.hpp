#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lgi/config.hpp"
#include "lgi/network_data.hpp"
#include "lgi/rng.hpp"

namespace lgi {

// Synthetic-data generator knobs. The defaults mirror the study scale; the
// desk preset shrinks everything to laptop size.
struct SimOptions {
  int dgm = 1;                    // 1 multiplicative, 2 additive, 3 unobserved drivers
  int n_rows = 242;
  int n_cols = 511;
  int n_studies = 85;
  double target_density = 0.031;  // recorded interactions / all pairs
  double cov_correlation = 0.3;   // cross-covariate correlation of the bank
  double slope = 1.0;             // interaction-model slopes
  double detection_slope = 0.5;
  double median_detection = 0.3;
  double inclusion_floor = 0.02;  // lower bound of per-study inclusion odds
  int n_heldout_rows = 10;        // species forced to n_ij = 0 everywhere
  int n_heldout_cols = 10;
  double max_missing_rows = 0.32;
  double max_missing_cols = 0.80;
};

SimOptions desk_preset(int dgm);   // 60 x 100 species, 40 studies
SimOptions paper_preset(int dgm);

ChainConfig desk_chain_config();   // 3 chains x 3000, burn-in 1500, thin 5

struct SyntheticTruth {
  Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> L_true;
  MatrixXd prob_true;              // generative P(L=1): the oracle score
  VectorXd p_rows_true, p_cols_true;
  std::vector<int> heldout_rows, heldout_cols;
  double kappa0 = 0.0;
  VectorXd kappa;
  double achieved_density = 0.0;
};

struct SimulatedData {
  InteractionData data;
  TraitMatrix traits_rows, traits_cols;
  TaxonomyTable tax_rows, tax_cols;
  SyntheticTruth truth;
};

// Deterministic in (options, seed): regenerating reproduces A and L_true
// bit for bit. The intercept kappa0 is calibrated by bisection so that the
// expected recorded density hits the target.
SimulatedData generate_dataset(const SimOptions& opt, std::uint64_t seed);

// Probability that a random positive outranks a random negative; ties count
// half. Throws when labels are single-class.
double auroc(const VectorXd& scores, const std::vector<int>& labels);

enum class PairCategory {
  kUnrecorded,
  kUnrecordedTrue,
  kCoexisting,
  kNeverCoexisting,
  kHalfInSample,
  kOutOfSample,
};

struct EvalRow {
  std::string category;
  std::string axis;   // "", "row", "col"
  int bin = -1;       // 1..3 = 25-50, 50-75, 75-100 effort percentile
  double auroc_value = std::numeric_limits<double>::quiet_NaN();
  double oracle_auroc = std::numeric_limits<double>::quiet_NaN();
  int n_positive = 0;
  int n_negative = 0;
  bool defined() const { return !std::isnan(auroc_value); }
};

struct EvalTable {
  std::vector<EvalRow> rows;
  const EvalRow* find(const std::string& category, const std::string& axis,
                      int bin) const;
};

// AUROC of `predictions` against L_true over unrecorded cells, overall per
// category and stratified by effort quartiles on each axis. Single-class
// strata are reported with NaN, not an error. The oracle column scores with
// the true generative probabilities.
EvalTable evaluate_stratified(const MatrixXd& predictions,
                              const SimulatedData& sim,
                              const EffortSummary& effort);

// k recorded cells masked to A = 0 (overlap counts untouched) per repetition.
struct HoldoutRep {
  InteractionData masked;
  std::vector<std::pair<int, int>> cells;
};

std::vector<HoldoutRep> holdout_cv(const InteractionData& data, int k, int reps,
                                   Rng& rng);

// Held-out vs all-unrecorded summary of a fitted probability matrix.
struct HoldoutRatio {
  double mean_ratio = 0.0;
  double median_ratio = 0.0;
};

HoldoutRatio holdout_ratio(const MatrixXd& prob, const HoldoutRep& rep);

}  // namespace lgi
