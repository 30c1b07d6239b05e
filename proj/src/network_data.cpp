#include "lgi/network_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "lgi/csv.hpp"

namespace lgi {

int TraitMatrix::n_continuous() const {
  int c = 0;
  for (auto k : kind) c += (k == TraitKind::kContinuous);
  return c;
}

int TraitMatrix::n_binary() const { return p - n_continuous(); }

namespace {

double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": not a number: '" + s + "'");
  }
}

}  // namespace

InteractionData build_interactions(const std::vector<Event>& events) {
  if (events.empty()) throw std::runtime_error("no events");

  InteractionData data;
  std::map<std::string, int> row_index, col_index;
  auto intern = [](std::map<std::string, int>& idx, std::vector<std::string>& ids,
                   const std::string& name) {
    auto it = idx.find(name);
    if (it != idx.end()) return it->second;
    int i = static_cast<int>(ids.size());
    idx.emplace(name, i);
    ids.push_back(name);
    return i;
  };

  // First pass interns species in first-appearance order and groups events
  // by study; the second pass materializes A and the overlap counts.
  std::map<std::string, std::pair<std::set<int>, std::set<int>>> per_study;
  std::vector<std::pair<int, int>> pairs;
  for (const auto& ev : events) {
    int i = intern(row_index, data.row_ids, ev.row_species);
    int j = intern(col_index, data.col_ids, ev.col_species);
    pairs.emplace_back(i, j);
    auto& sets = per_study[ev.study];
    if (sets.first.empty() && sets.second.empty()) data.study_ids.push_back(ev.study);
    sets.first.insert(i);
    sets.second.insert(j);
  }

  data.n_rows = static_cast<int>(data.row_ids.size());
  data.n_cols = static_cast<int>(data.col_ids.size());
  data.adjacency = MatrixXi::Zero(data.n_rows, data.n_cols);
  data.overlap = MatrixXi::Zero(data.n_rows, data.n_cols);

  for (const auto& [i, j] : pairs) data.adjacency(i, j) = 1;
  for (const auto& [study, sets] : per_study) {
    (void)study;
    for (int i : sets.first)
      for (int j : sets.second) data.overlap(i, j) += 1;
  }
  return data;
}

InteractionData load_events(std::istream& in, const std::string& source_name) {
  CsvTable table = read_csv(in, source_name);
  int cs = table.column("study_id");
  int cr = table.column("row_species");
  int cc = table.column("col_species");
  if (cs < 0 || cr < 0 || cc < 0)
    throw std::runtime_error(source_name +
                             ": header must contain study_id,row_species,col_species");
  std::vector<Event> events;
  events.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row[cs].empty() || row[cr].empty() || row[cc].empty())
      throw std::runtime_error(source_name + ":" + std::to_string(r + 2) +
                               ": empty field");
    events.push_back({row[cs], row[cr], row[cc]});
  }
  return build_interactions(events);
}

InteractionData load_events_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_events(in, path);
}

TraitMatrix load_traits(std::istream& in, const std::string& source_name,
                        const std::vector<TraitKind>& kinds,
                        const std::vector<std::string>& species_order) {
  CsvTable table = read_csv(in, source_name);
  int id_col = table.column("species_id");
  if (id_col != 0)
    throw std::runtime_error(source_name + ": first column must be species_id");
  int p = static_cast<int>(table.header.size()) - 1;
  if (p != static_cast<int>(kinds.size()))
    throw std::runtime_error(source_name + ": " + std::to_string(p) +
                             " trait columns but " + std::to_string(kinds.size()) +
                             " kinds declared");

  std::map<std::string, std::size_t> file_row;
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    file_row[table.rows[r][0]] = r;

  TraitMatrix tm;
  tm.n = static_cast<int>(species_order.size());
  tm.p = p;
  tm.kind = kinds;
  tm.species_ids = species_order;
  tm.names.assign(table.header.begin() + 1, table.header.end());
  tm.values = MatrixXd::Zero(tm.n, p);
  tm.missing.setConstant(tm.n, p, false);
  tm.center = VectorXd::Zero(p);
  tm.scale = VectorXd::Ones(p);

  for (int i = 0; i < tm.n; ++i) {
    auto it = file_row.find(species_order[i]);
    if (it == file_row.end())
      throw std::runtime_error(source_name + ": species '" + species_order[i] +
                               "' not found");
    const auto& row = table.rows[it->second];
    for (int m = 0; m < p; ++m) {
      const std::string& cell = row[m + 1];
      if (cell == "NA" || cell.empty()) {
        tm.missing(i, m) = true;
        continue;
      }
      double v = parse_number(cell, source_name + " " + species_order[i] + "/" +
                                        tm.names[m]);
      if (kinds[m] == TraitKind::kBinary && v != 0.0 && v != 1.0)
        throw std::runtime_error(source_name + ": binary trait '" + tm.names[m] +
                                 "' has value " + cell + " for species '" +
                                 species_order[i] + "'");
      tm.values(i, m) = v;
    }
  }

  // Standardize continuous columns over observed cells (mean 0, sd 1 with the
  // n-1 denominator); a single observed value keeps scale 1.
  for (int m = 0; m < p; ++m) {
    if (kinds[m] != TraitKind::kContinuous) continue;
    double sum = 0.0;
    int cnt = 0;
    for (int i = 0; i < tm.n; ++i)
      if (!tm.missing(i, m)) {
        sum += tm.values(i, m);
        ++cnt;
      }
    if (cnt == 0) continue;
    double mean = sum / cnt;
    double ss = 0.0;
    for (int i = 0; i < tm.n; ++i)
      if (!tm.missing(i, m)) ss += (tm.values(i, m) - mean) * (tm.values(i, m) - mean);
    double sd = cnt > 1 ? std::sqrt(ss / (cnt - 1)) : 1.0;
    if (sd <= 0.0) sd = 1.0;
    tm.center(m) = mean;
    tm.scale(m) = sd;
    for (int i = 0; i < tm.n; ++i) {
      if (tm.missing(i, m))
        tm.values(i, m) = 0.0;
      else
        tm.values(i, m) = (tm.values(i, m) - mean) / sd;
    }
  }
  return tm;
}

TraitMatrix load_traits_file(const std::string& path,
                             const std::vector<TraitKind>& kinds,
                             const std::vector<std::string>& species_order) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_traits(in, path, kinds, species_order);
}

std::vector<TraitKind> infer_trait_kinds(const std::string& path) {
  CsvTable table = read_csv_file(path);
  int p = static_cast<int>(table.header.size()) - 1;
  std::vector<TraitKind> kinds(p, TraitKind::kBinary);
  for (int m = 0; m < p; ++m) {
    for (const auto& row : table.rows) {
      const std::string& cell = row[m + 1];
      if (cell == "NA" || cell.empty()) continue;
      if (cell != "0" && cell != "1") {
        kinds[m] = TraitKind::kContinuous;
        break;
      }
    }
  }
  return kinds;
}

TaxonomyTable load_taxonomy(std::istream& in, const std::string& source_name) {
  CsvTable table = read_csv(in, source_name);
  int ci = table.column("species_id");
  int cg = table.column("genus");
  int cf = table.column("family");
  int co = table.column("order");  // optional
  if (ci < 0 || cg < 0 || cf < 0)
    throw std::runtime_error(source_name +
                             ": header must contain species_id,genus,family[,order]");
  TaxonomyTable tax;
  for (const auto& row : table.rows) {
    tax.species_ids.push_back(row[ci]);
    tax.genus.push_back(row[cg]);
    tax.family.push_back(row[cf]);
    tax.order.push_back(co >= 0 ? row[co] : "");
  }
  return tax;
}

TaxonomyTable load_taxonomy_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_taxonomy(in, path);
}

TaxonomyCorrelation build_taxonomy_correlation(
    const TaxonomyTable& tax, const std::vector<std::string>& species_order,
    double w_genus, double w_family, double w_order) {
  std::map<std::string, std::size_t> where;
  for (std::size_t r = 0; r < tax.species_ids.size(); ++r)
    where[tax.species_ids[r]] = r;

  std::vector<std::string> absent;
  std::vector<std::size_t> loc(species_order.size());
  for (std::size_t i = 0; i < species_order.size(); ++i) {
    auto it = where.find(species_order[i]);
    if (it == where.end())
      absent.push_back(species_order[i]);
    else
      loc[i] = it->second;
  }
  if (!absent.empty()) {
    std::string msg = "species missing from taxonomy:";
    for (const auto& s : absent) msg += " " + s;
    throw std::runtime_error(msg);
  }

  int n = static_cast<int>(species_order.size());
  TaxonomyCorrelation out;
  out.w_genus = w_genus;
  out.w_family = w_family;
  out.w_order = w_order;
  out.levels.species_ids = species_order;
  out.levels.genus.resize(n);
  out.levels.family.resize(n);
  out.levels.order.resize(n);
  for (int i = 0; i < n; ++i) {
    out.levels.genus[i] = tax.genus[loc[i]];
    out.levels.family[i] = tax.family[loc[i]];
    out.levels.order[i] = tax.order[loc[i]];
    if (out.levels.genus[i].empty() || out.levels.family[i].empty())
      throw std::runtime_error("species '" + species_order[i] +
                               "' lacks genus or family");
  }

  out.C = MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double c = 0.0;
      if (out.levels.genus[i] == out.levels.genus[j])
        c = w_genus;
      else if (out.levels.family[i] == out.levels.family[j])
        c = w_family;
      else if (!out.levels.order[i].empty() &&
               out.levels.order[i] == out.levels.order[j])
        c = w_order;
      out.C(i, j) = out.C(j, i) = c;
    }
  }
  return out;
}

VectorXd taxonomy_cross_correlation(const TaxonomyCorrelation& fitted,
                                    const std::string& genus,
                                    const std::string& family,
                                    const std::string& order) {
  int n = static_cast<int>(fitted.levels.species_ids.size());
  VectorXd c = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (!genus.empty() && fitted.levels.genus[i] == genus)
      c(i) = fitted.w_genus;
    else if (!family.empty() && fitted.levels.family[i] == family)
      c(i) = fitted.w_family;
    else if (!order.empty() && !fitted.levels.order[i].empty() &&
             fitted.levels.order[i] == order)
      c(i) = fitted.w_order;
  }
  return c;
}

MatrixXd blend_correlation(const MatrixXd& C, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::domain_error("blend_correlation: rho must be in [0,1]");
  int n = static_cast<int>(C.rows());
  return rho * C + (1.0 - rho) * MatrixXd::Identity(n, n);
}

namespace {

// type-7 quantile of a sorted sample
double quantile_sorted(const std::vector<double>& x, double q) {
  if (x.empty()) return 0.0;
  double h = q * (static_cast<double>(x.size()) - 1.0);
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - lo) * (x[hi] - x[lo]);
}

VectorXi bin_by_quartile(const VectorXd& effort) {
  std::vector<double> positive;
  for (int i = 0; i < effort.size(); ++i)
    if (effort(i) > 0) positive.push_back(effort(i));
  std::sort(positive.begin(), positive.end());
  double q25 = quantile_sorted(positive, 0.25);
  double q50 = quantile_sorted(positive, 0.50);
  double q75 = quantile_sorted(positive, 0.75);

  VectorXi bin(effort.size());
  for (int i = 0; i < effort.size(); ++i) {
    double e = effort(i);
    if (e <= 0)
      bin(i) = -1;
    else if (e <= q25)
      bin(i) = 0;
    else if (e <= q50)
      bin(i) = 1;
    else if (e <= q75)
      bin(i) = 2;
    else
      bin(i) = 3;
  }
  return bin;
}

}  // namespace

EffortSummary compute_effort(const InteractionData& data) {
  EffortSummary eff;
  eff.row_effort = data.overlap.cast<double>().rowwise().sum();
  eff.col_effort = data.overlap.cast<double>().colwise().sum().transpose();
  eff.row_bin = bin_by_quartile(eff.row_effort);
  eff.col_bin = bin_by_quartile(eff.col_effort);
  return eff;
}

}  // namespace lgi
