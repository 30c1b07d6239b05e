#pragma once

#include <Eigen/Dense>
#include <istream>
#include <string>
#include <vector>

namespace lgi {

using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXd;
using Eigen::VectorXi;

// Recorded interaction evidence: the collapsed adjacency A and the per-pair
// study-overlap counts n_ij (number of studies that recorded at least one
// interaction for both species of the pair). A_ij = 1 implies n_ij >= 1.
struct InteractionData {
  int n_rows = 0;  // bird species
  int n_cols = 0;  // plant species
  MatrixXi adjacency;       // n_rows x n_cols, {0,1}
  MatrixXi overlap;         // n_rows x n_cols, n_ij >= 0
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  std::vector<std::string> study_ids;
};

enum class TraitKind { kContinuous, kBinary };

// Species-by-trait matrix with a missingness mask. Continuous columns are
// standardized over their observed cells at load time so that a shared prior
// scale is meaningful across traits; the original location/scale are kept so
// new species can be mapped into the same units. Missing cells hold 0 and
// must never be read without consulting the mask.
struct TraitMatrix {
  int n = 0;
  int p = 0;
  MatrixXd values;                       // n x p
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> missing;  // n x p
  std::vector<TraitKind> kind;           // per column
  std::vector<std::string> names;        // per column
  std::vector<std::string> species_ids;  // row order matches InteractionData
  VectorXd center;                       // per column (0 for binary)
  VectorXd scale;                        // per column (1 for binary)

  int n_continuous() const;
  int n_binary() const;
};

// Per-species taxonomic labels. `order` may be empty (plants carry only
// genus and family).
struct TaxonomyTable {
  std::vector<std::string> species_ids;
  std::vector<std::string> genus;
  std::vector<std::string> family;
  std::vector<std::string> order;  // empty strings when the rank is absent
};

// Correlation from shared taxonomic ranks: 1 on the diagonal, then the weight
// of the finest shared rank (genus > family > order), 0 for unrelated pairs.
struct TaxonomyCorrelation {
  MatrixXd C;
  TaxonomyTable levels;
  double w_genus = 0.75;
  double w_family = 0.5;
  double w_order = 0.25;
};

// Row/column sums of the overlap counts and the quartile binning used for
// effort-stratified evaluation. Bin index: -1 = zero effort (out of sample),
// 0..3 = quartile of the positive-effort distribution on that margin.
struct EffortSummary {
  VectorXd row_effort;
  VectorXd col_effort;
  VectorXi row_bin;
  VectorXi col_bin;
};

// One interaction event as recorded by a study.
struct Event {
  std::string study;
  std::string row_species;
  std::string col_species;
};

// Builds A and n_ij from an event stream. Species are indexed in order of
// first appearance; duplicate events within a study collapse to one.
InteractionData build_interactions(const std::vector<Event>& events);

// Reads events.csv (study_id,row_species,col_species). Malformed rows raise
// with the line number; an empty stream is an error.
InteractionData load_events(std::istream& in, const std::string& source_name);
InteractionData load_events_file(const std::string& path);

// Reads a trait table (species_id + one column per trait, "NA" for missing)
// and standardizes continuous columns. `kinds` must match the trait columns
// in file order. The result rows follow `species_order`; species missing from
// the file is an error.
TraitMatrix load_traits(std::istream& in, const std::string& source_name,
                        const std::vector<TraitKind>& kinds,
                        const std::vector<std::string>& species_order);
TraitMatrix load_traits_file(const std::string& path,
                             const std::vector<TraitKind>& kinds,
                             const std::vector<std::string>& species_order);

// Infers column kinds for a trait file: a column whose observed values are
// all 0/1 is binary, anything else continuous.
std::vector<TraitKind> infer_trait_kinds(const std::string& path);

TaxonomyTable load_taxonomy(std::istream& in, const std::string& source_name);
TaxonomyTable load_taxonomy_file(const std::string& path);

// `species_order` lists the species the correlation matrix must cover, in
// matrix order; every one of them must appear in `tax`.
TaxonomyCorrelation build_taxonomy_correlation(
    const TaxonomyTable& tax, const std::vector<std::string>& species_order,
    double w_genus = 0.75, double w_family = 0.5, double w_order = 0.25);

// Correlation of a new species against each fitted species, at the finest
// shared rank; unseen genera/families correlate 0 with everything.
VectorXd taxonomy_cross_correlation(const TaxonomyCorrelation& fitted,
                                    const std::string& genus,
                                    const std::string& family,
                                    const std::string& order);

// Sigma = rho * C + (1 - rho) * I. Requires rho in [0, 1].
MatrixXd blend_correlation(const MatrixXd& C, double rho);

EffortSummary compute_effort(const InteractionData& data);

}  // namespace lgi
