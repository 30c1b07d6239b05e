#pragma once

#include <map>
#include <string>
#include <vector>

#include "lgi/diagnostics.hpp"
#include "lgi/draws.hpp"
#include "lgi/simbench.hpp"
#include "lgi/varimp.hpp"

namespace lgi {

// FNV-1a over the file bytes; stable fingerprint for the run manifest.
std::string file_digest(const std::string& path);

struct RunManifest {
  std::string command;
  std::string config_json;
  std::map<std::string, std::string> input_digests;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  std::string version = "lgi 0.1.0";

  std::string to_json() const;
};

// Creates `dir` (parents included). When it already exists and `force` is
// false this throws; the CLI maps that to a validation failure.
void prepare_out_dir(const std::string& dir, bool force);

void write_manifest(const std::string& dir, const RunManifest& manifest);

// posterior_L_mean.csv: matrix layout, column ids in the header row, row ids
// in the first column.
void write_matrix_csv(const std::string& path, const MatrixXd& m,
                      const std::vector<std::string>& row_ids,
                      const std::vector<std::string>& col_ids);

// One CSV per tracked scalar series under <dir>/draws/.
void write_series_csv(const std::string& dir, const PosteriorDraws& draws);

// diagnostics/: trace_<name>.csv, running_means.csv, rhat.csv.
void write_diagnostics_dir(const std::string& dir, const PosteriorDraws& draws,
                           const InteractionData& data);

void write_importance_csv(const std::string& path,
                          const std::vector<ImportanceRow>& rows);

void write_eval_table_csv(const std::string& path, const EvalTable& table);

// Dataset directory for simulated data: A.csv, n_overlap.csv, trait and
// taxonomy tables (raw units), truth.json.
void write_dataset_dir(const std::string& dir, const SimulatedData& sim,
                       bool force);

struct LoadedDataset {
  InteractionData data;
  TraitMatrix traits_rows, traits_cols;
  TaxonomyTable tax_rows, tax_cols;
};

LoadedDataset load_dataset_dir(const std::string& dir);
SyntheticTruth load_truth_json(const std::string& path);

}  // namespace lgi
