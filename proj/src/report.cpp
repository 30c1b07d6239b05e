#include "lgi/report.hpp"

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "lgi/csv.hpp"

namespace lgi {

namespace fs = std::filesystem;
using nlohmann::json;

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[8192];
  while (in) {
    in.read(buf, sizeof(buf));
    std::streamsize n = in.gcount();
    for (std::streamsize k = 0; k < n; ++k) {
      h ^= static_cast<unsigned char>(buf[k]);
      h *= 0x100000001b3ULL;
    }
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

std::string RunManifest::to_json() const {
  json j;
  j["command"] = command;
  j["config"] = config_json.empty() ? json::object() : json::parse(config_json);
  j["input_digests"] = input_digests;
  j["seed"] = seed;
  j["wall_time_s"] = wall_time_s;
  j["version"] = version;
  return j.dump(2) + "\n";
}

void prepare_out_dir(const std::string& dir, bool force) {
  fs::path p(dir);
  if (fs::exists(p)) {
    if (!force)
      throw std::invalid_argument("output directory '" + dir +
                                  "' exists (use --force to overwrite)");
  } else {
    fs::create_directories(p);
  }
}

void write_manifest(const std::string& dir, const RunManifest& manifest) {
  std::ofstream out(fs::path(dir) / "manifest.json");
  out << manifest.to_json();
}

void write_matrix_csv(const std::string& path, const MatrixXd& m,
                      const std::vector<std::string>& row_ids,
                      const std::vector<std::string>& col_ids) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "species";
  for (const auto& c : col_ids) out << "," << c;
  out << "\n";
  for (int i = 0; i < m.rows(); ++i) {
    out << row_ids[static_cast<std::size_t>(i)];
    for (int j = 0; j < m.cols(); ++j) out << "," << format_double(m(i, j));
    out << "\n";
  }
}

void write_series_csv(const std::string& dir, const PosteriorDraws& draws) {
  fs::path base = fs::path(dir) / "draws";
  fs::create_directories(base);
  if (draws.series.empty()) return;
  for (const auto& [name, first] : draws.series.front()) {
    (void)first;
    std::ofstream out(base / (name + ".csv"));
    out << "chain,draw,value\n";
    for (std::size_t c = 0; c < draws.series.size(); ++c) {
      auto it = draws.series[c].find(name);
      if (it == draws.series[c].end()) continue;
      for (std::size_t r = 0; r < it->second.size(); ++r)
        out << c << "," << r << "," << format_double(it->second[r]) << "\n";
    }
  }
}

void write_diagnostics_dir(const std::string& dir, const PosteriorDraws& draws,
                           const InteractionData& data) {
  fs::path base = fs::path(dir) / "diagnostics";
  fs::create_directories(base);

  if (!draws.series.empty()) {
    for (const auto& [name, first] : draws.series.front()) {
      (void)first;
      std::ofstream out(base / ("trace_" + name + ".csv"));
      out << "chain,draw,value\n";
      for (std::size_t c = 0; c < draws.series.size(); ++c) {
        auto it = draws.series[c].find(name);
        if (it == draws.series[c].end()) continue;
        for (std::size_t r = 0; r < it->second.size(); ++r)
          out << c << "," << r << "," << format_double(it->second[r]) << "\n";
      }
    }
  }

  if (!draws.l_draws.empty()) {
    auto cells = default_diagnostic_cells(draws, data);
    if (!cells.empty()) {
      auto series = running_means(draws, data, cells);
      std::ofstream out(base / "running_means.csv");
      out << "row_species,col_species,chain,draw,running_mean\n";
      for (const auto& s : series)
        for (std::size_t c = 0; c < s.per_chain.size(); ++c)
          for (std::size_t r = 0; r < s.per_chain[c].size(); ++r)
            out << data.row_ids[static_cast<std::size_t>(s.row)] << ","
                << data.col_ids[static_cast<std::size_t>(s.col)] << "," << c
                << "," << r << "," << format_double(s.per_chain[c][r]) << "\n";
    }
  }

  if (draws.series.size() >= 2) {
    auto rhat = chain_agreement(draws);
    std::ofstream out(base / "rhat.csv");
    out << "quantity,ratio\n";
    for (const auto& [name, ratio] : rhat)
      out << name << "," << format_double(ratio) << "\n";
  }
}

void write_importance_csv(const std::string& path,
                          const std::vector<ImportanceRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "trait,group,t_obs,perm_mean,perm_sd,z\n";
  for (const auto& r : rows)
    out << r.trait << ","
        << (r.group == TraitKind::kContinuous ? "continuous" : "binary") << ","
        << format_double(r.t_obs) << "," << format_double(r.perm_mean) << ","
        << format_double(r.perm_sd) << "," << format_double(r.z) << "\n";
}

void write_eval_table_csv(const std::string& path, const EvalTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "category,axis,bin,auroc,oracle_auroc,n_positive,n_negative\n";
  for (const auto& r : table.rows) {
    out << r.category << "," << r.axis << "," << r.bin << ",";
    out << (r.defined() ? format_double(r.auroc_value) : std::string("NA")) << ",";
    out << (std::isnan(r.oracle_auroc) ? std::string("NA")
                                       : format_double(r.oracle_auroc));
    out << "," << r.n_positive << "," << r.n_negative << "\n";
  }
}

namespace {

void write_int_matrix_csv(const fs::path& path, const MatrixXi& m,
                          const std::vector<std::string>& row_ids,
                          const std::vector<std::string>& col_ids) {
  std::ofstream out(path);
  out << "species";
  for (const auto& c : col_ids) out << "," << c;
  out << "\n";
  for (int i = 0; i < m.rows(); ++i) {
    out << row_ids[static_cast<std::size_t>(i)];
    for (int j = 0; j < m.cols(); ++j) out << "," << m(i, j);
    out << "\n";
  }
}

MatrixXi read_int_matrix_csv(const std::string& path,
                             std::vector<std::string>* row_ids,
                             std::vector<std::string>* col_ids) {
  CsvTable t = read_csv_file(path);
  int rows = static_cast<int>(t.rows.size());
  int cols = static_cast<int>(t.header.size()) - 1;
  MatrixXi m(rows, cols);
  col_ids->assign(t.header.begin() + 1, t.header.end());
  row_ids->clear();
  for (int i = 0; i < rows; ++i) {
    row_ids->push_back(t.rows[static_cast<std::size_t>(i)][0]);
    for (int j = 0; j < cols; ++j)
      m(i, j) = std::stoi(t.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j) + 1]);
  }
  return m;
}

void write_trait_csv(const fs::path& path, const TraitMatrix& tm) {
  std::ofstream out(path);
  out << "species_id";
  for (const auto& n : tm.names) out << "," << n;
  out << "\n";
  for (int i = 0; i < tm.n; ++i) {
    out << tm.species_ids[static_cast<std::size_t>(i)];
    for (int m = 0; m < tm.p; ++m) {
      if (tm.missing(i, m)) {
        out << ",NA";
      } else {
        // back to original units so the file round-trips through the loader
        double v = tm.values(i, m) * tm.scale(m) + tm.center(m);
        out << "," << format_double(v);
      }
    }
    out << "\n";
  }
}

void write_taxonomy_csv(const fs::path& path, const TaxonomyTable& tax) {
  bool with_order = false;
  for (const auto& o : tax.order)
    if (!o.empty()) with_order = true;
  std::ofstream out(path);
  out << "species_id,genus,family";
  if (with_order) out << ",order";
  out << "\n";
  for (std::size_t i = 0; i < tax.species_ids.size(); ++i) {
    out << tax.species_ids[i] << "," << tax.genus[i] << "," << tax.family[i];
    if (with_order) out << "," << tax.order[i];
    out << "\n";
  }
}

}  // namespace

void write_dataset_dir(const std::string& dir, const SimulatedData& sim,
                       bool force) {
  prepare_out_dir(dir, force);
  fs::path base(dir);
  write_int_matrix_csv(base / "A.csv", sim.data.adjacency, sim.data.row_ids,
                       sim.data.col_ids);
  write_int_matrix_csv(base / "n_overlap.csv", sim.data.overlap, sim.data.row_ids,
                       sim.data.col_ids);
  write_trait_csv(base / "traits_rows.csv", sim.traits_rows);
  write_trait_csv(base / "traits_cols.csv", sim.traits_cols);
  write_taxonomy_csv(base / "taxonomy_rows.csv", sim.tax_rows);
  write_taxonomy_csv(base / "taxonomy_cols.csv", sim.tax_cols);

  json truth;
  truth["kappa0"] = sim.truth.kappa0;
  truth["kappa"] = std::vector<double>(sim.truth.kappa.data(),
                                       sim.truth.kappa.data() + sim.truth.kappa.size());
  truth["achieved_density"] = sim.truth.achieved_density;
  truth["heldout_rows"] = sim.truth.heldout_rows;
  truth["heldout_cols"] = sim.truth.heldout_cols;
  std::vector<std::string> l_rows;
  for (int i = 0; i < sim.truth.L_true.rows(); ++i) {
    std::string row(static_cast<std::size_t>(sim.truth.L_true.cols()), '0');
    for (int j = 0; j < sim.truth.L_true.cols(); ++j)
      if (sim.truth.L_true(i, j)) row[static_cast<std::size_t>(j)] = '1';
    l_rows.push_back(std::move(row));
  }
  truth["L_true"] = l_rows;
  std::vector<std::vector<double>> probs;
  for (int i = 0; i < sim.truth.prob_true.rows(); ++i)
    probs.emplace_back(sim.truth.prob_true.row(i).begin(),
                       sim.truth.prob_true.row(i).end());
  truth["prob_true"] = probs;
  truth["p_rows_true"] = std::vector<double>(
      sim.truth.p_rows_true.data(),
      sim.truth.p_rows_true.data() + sim.truth.p_rows_true.size());
  truth["p_cols_true"] = std::vector<double>(
      sim.truth.p_cols_true.data(),
      sim.truth.p_cols_true.data() + sim.truth.p_cols_true.size());
  std::ofstream out(base / "truth.json");
  out << truth.dump() << "\n";
}

LoadedDataset load_dataset_dir(const std::string& dir) {
  fs::path base(dir);
  LoadedDataset out;
  std::vector<std::string> row_ids, col_ids, r2, c2;
  out.data.adjacency = read_int_matrix_csv((base / "A.csv").string(), &row_ids,
                                           &col_ids);
  out.data.overlap =
      read_int_matrix_csv((base / "n_overlap.csv").string(), &r2, &c2);
  if (row_ids != r2 || col_ids != c2)
    throw std::runtime_error(dir + ": A.csv and n_overlap.csv disagree on species");
  out.data.n_rows = static_cast<int>(row_ids.size());
  out.data.n_cols = static_cast<int>(col_ids.size());
  out.data.row_ids = row_ids;
  out.data.col_ids = col_ids;

  for (int j = 0; j < out.data.n_cols; ++j)
    for (int i = 0; i < out.data.n_rows; ++i) {
      if (out.data.adjacency(i, j) == 1 && out.data.overlap(i, j) < 1)
        throw std::runtime_error(dir + ": recorded cell with zero overlap");
    }

  auto kinds_rows = infer_trait_kinds((base / "traits_rows.csv").string());
  auto kinds_cols = infer_trait_kinds((base / "traits_cols.csv").string());
  out.traits_rows =
      load_traits_file((base / "traits_rows.csv").string(), kinds_rows, row_ids);
  out.traits_cols =
      load_traits_file((base / "traits_cols.csv").string(), kinds_cols, col_ids);
  out.tax_rows = load_taxonomy_file((base / "taxonomy_rows.csv").string());
  out.tax_cols = load_taxonomy_file((base / "taxonomy_cols.csv").string());
  return out;
}

SyntheticTruth load_truth_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j = json::parse(in);
  SyntheticTruth t;
  t.kappa0 = j.at("kappa0").get<double>();
  auto kappa = j.at("kappa").get<std::vector<double>>();
  t.kappa = Eigen::Map<VectorXd>(kappa.data(), static_cast<Eigen::Index>(kappa.size()));
  t.achieved_density = j.at("achieved_density").get<double>();
  t.heldout_rows = j.at("heldout_rows").get<std::vector<int>>();
  t.heldout_cols = j.at("heldout_cols").get<std::vector<int>>();
  auto l_rows = j.at("L_true").get<std::vector<std::string>>();
  int nb = static_cast<int>(l_rows.size());
  int np = nb > 0 ? static_cast<int>(l_rows[0].size()) : 0;
  t.L_true.resize(nb, np);
  for (int i = 0; i < nb; ++i)
    for (int j2 = 0; j2 < np; ++j2)
      t.L_true(i, j2) = l_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j2)] == '1' ? 1 : 0;
  auto probs = j.at("prob_true").get<std::vector<std::vector<double>>>();
  t.prob_true.resize(nb, np);
  for (int i = 0; i < nb; ++i)
    for (int j2 = 0; j2 < np; ++j2)
      t.prob_true(i, j2) = probs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j2)];
  auto pr = j.at("p_rows_true").get<std::vector<double>>();
  auto pc = j.at("p_cols_true").get<std::vector<double>>();
  t.p_rows_true = Eigen::Map<VectorXd>(pr.data(), static_cast<Eigen::Index>(pr.size()));
  t.p_cols_true = Eigen::Map<VectorXd>(pc.data(), static_cast<Eigen::Index>(pc.size()));
  return t;
}

}  // namespace lgi
