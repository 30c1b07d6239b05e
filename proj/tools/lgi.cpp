// Command-line front end: ingestion, fitting, prediction, importance,
// simulation, cross-validation, and diagnostics as reproducible batch runs.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "lgi/baselines.hpp"
#include "lgi/csv.hpp"
#include "lgi/diagnostics.hpp"
#include "lgi/gibbs.hpp"
#include "lgi/predict.hpp"
#include "lgi/report.hpp"
#include "lgi/simbench.hpp"
#include "lgi/varimp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lgi;

namespace {

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_dir;
  bool force = false;
  int threads = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  bool seed_given() const { return seed_opt && seed_opt->count() > 0; }
  bool threads_given() const { return threads_opt && threads_opt->count() > 0; }
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_out = true) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  args.seed_opt = cmd->add_option("--seed", args.seed, "master seed");
  if (with_out)
    cmd->add_option("--out", args.out_dir, "output directory")->required();
  cmd->add_flag("--force", args.force, "overwrite an existing output directory");
  args.threads_opt = cmd->add_option(
      "--threads", args.threads,
      "worker threads (default: LGI_THREADS or all cores)");
}

// Optional taxonomy level weights in the config document.
struct TaxWeights {
  double genus = 0.75, family = 0.5, order = 0.25;
};

TaxWeights taxonomy_weights_from_config(const std::string& config_text) {
  TaxWeights w;
  if (config_text.empty()) return w;
  json j = json::parse(config_text);
  if (j.contains("taxonomy")) {
    const json& t = j.at("taxonomy");
    if (t.contains("genus")) w.genus = t.at("genus").get<double>();
    if (t.contains("family")) w.family = t.at("family").get<double>();
    if (t.contains("order")) w.order = t.at("order").get<double>();
  }
  return w;
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("LGI_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0;  // library default: hardware concurrency
}

void require_file(const std::string& path) {
  if (path.empty() || !fs::exists(path))
    throw CLI::ValidationError("file not found: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::string s((std::istreambuf_iterator<char>(in)),
                std::istreambuf_iterator<char>());
  return s;
}

struct FitInputs {
  std::string events, data_dir;
  std::string traits_rows, traits_cols, taxonomy_rows, taxonomy_cols;
};

void add_fit_inputs(CLI::App* cmd, FitInputs& in) {
  cmd->add_option("--events", in.events, "events.csv (study_id,row_species,col_species)");
  cmd->add_option("--data-dir", in.data_dir,
                  "dataset directory (A.csv, n_overlap.csv, traits, taxonomy)");
  cmd->add_option("--traits-rows", in.traits_rows, "row-species trait table");
  cmd->add_option("--traits-cols", in.traits_cols, "column-species trait table");
  cmd->add_option("--taxonomy-rows", in.taxonomy_rows, "row-species taxonomy");
  cmd->add_option("--taxonomy-cols", in.taxonomy_cols, "column-species taxonomy");
}

LoadedDataset load_inputs(const FitInputs& in,
                          std::map<std::string, std::string>* digests) {
  LoadedDataset ds;
  if (!in.data_dir.empty()) {
    require_file(in.data_dir);
    ds = load_dataset_dir(in.data_dir);
    for (const char* f : {"A.csv", "n_overlap.csv", "traits_rows.csv",
                          "traits_cols.csv", "taxonomy_rows.csv",
                          "taxonomy_cols.csv"}) {
      std::string p = (fs::path(in.data_dir) / f).string();
      if (fs::exists(p)) (*digests)[f] = file_digest(p);
    }
    return ds;
  }
  require_file(in.events);
  require_file(in.traits_rows);
  require_file(in.traits_cols);
  require_file(in.taxonomy_rows);
  require_file(in.taxonomy_cols);
  ds.data = load_events_file(in.events);
  ds.traits_rows = load_traits_file(in.traits_rows,
                                    infer_trait_kinds(in.traits_rows),
                                    ds.data.row_ids);
  ds.traits_cols = load_traits_file(in.traits_cols,
                                    infer_trait_kinds(in.traits_cols),
                                    ds.data.col_ids);
  ds.tax_rows = load_taxonomy_file(in.taxonomy_rows);
  ds.tax_cols = load_taxonomy_file(in.taxonomy_cols);
  for (const auto& p : {in.events, in.traits_rows, in.traits_cols,
                        in.taxonomy_rows, in.taxonomy_cols})
    (*digests)[fs::path(p).filename().string()] = file_digest(p);
  return ds;
}

PosteriorDraws dispatch_fit(ModelKind kind, const LoadedDataset& ds,
                            const PriorConfig& prior, const ChainConfig& cfg,
                            const TaxonomyCorrelation& cu,
                            const TaxonomyCorrelation& cv) {
  switch (kind) {
    case ModelKind::kLatentBiasCorrected:
      return run_chain(cfg, prior, ds.data, ds.traits_rows, ds.traits_cols, cu.C,
                       cv.C, kind);
    case ModelKind::kLatentObserved:
      return fit_latent_observed(ds.data, ds.traits_rows, ds.traits_cols, cu.C,
                                 cv.C, prior, cfg);
    case ModelKind::kCovBiasCorrected:
      return fit_cov_bias_corrected(ds.data, ds.traits_rows, ds.traits_cols,
                                    prior, cfg);
    case ModelKind::kCovObserved:
      return fit_cov_observed(ds.data, ds.traits_rows, ds.traits_cols, prior, cfg);
  }
  throw std::invalid_argument("unknown model");
}

void write_meta(const std::string& dir, const PosteriorDraws& draws,
                double wall_s) {
  json j;
  j["model"] = model_kind_name(draws.model);
  j["prior"] = json::parse(draws.prior.to_json());
  j["chain"] = json::parse(draws.chain_config.to_json());
  j["n_rows"] = draws.n_rows;
  j["n_cols"] = draws.n_cols;
  j["kept_draws"] = draws.total_kept();
  j["wall_time_s"] = wall_s;
  std::ofstream out(fs::path(dir) / "meta.json");
  out << j.dump(2) << "\n";
}

int cmd_fit(const CommonArgs& common, const FitInputs& inputs,
            const std::string& model_name, bool save_bundle) {
  auto t0 = std::chrono::steady_clock::now();
  ModelKind kind = model_kind_from_name(model_name);

  PriorConfig prior;
  ChainConfig cfg;
  std::string config_text;
  if (!common.config_path.empty()) {
    require_file(common.config_path);
    config_text = read_file(common.config_path);
    parse_config_document(config_text, &prior, &cfg);
  }
  if (common.seed_given() || cfg.seed == 0) cfg.seed = common.seed;
  cfg.threads = resolve_threads(common.threads_given() ? common.threads : cfg.threads);

  std::map<std::string, std::string> digests;
  LoadedDataset ds = load_inputs(inputs, &digests);

  TaxonomyCorrelation cu, cv;
  bool latent = kind == ModelKind::kLatentBiasCorrected ||
                kind == ModelKind::kLatentObserved;
  if (latent) {
    TaxWeights w = taxonomy_weights_from_config(config_text);
    cu = build_taxonomy_correlation(ds.tax_rows, ds.data.row_ids, w.genus,
                                    w.family, w.order);
    cv = build_taxonomy_correlation(ds.tax_cols, ds.data.col_ids, w.genus,
                                    w.family, w.order);
  }

  prepare_out_dir(common.out_dir, common.force);
  PosteriorDraws draws = dispatch_fit(kind, ds, prior, cfg, cu, cv);

  MatrixXd prob = (kind == ModelKind::kLatentBiasCorrected ||
                   kind == ModelKind::kCovBiasCorrected)
                      ? draws.l_mean()
                      : draws.model_prob_mean();
  write_matrix_csv((fs::path(common.out_dir) / "posterior_L_mean.csv").string(),
                   prob, ds.data.row_ids, ds.data.col_ids);
  write_series_csv(common.out_dir, draws);
  write_diagnostics_dir(common.out_dir, draws, ds.data);

  double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_meta(common.out_dir, draws, wall);

  if (save_bundle) {
    FitBundle bundle{std::move(draws), ds.data, ds.traits_rows, ds.traits_cols,
                     cu, cv};
    save_fit_bundle(bundle, (fs::path(common.out_dir) / "fit.bin").string());
  }

  RunManifest manifest;
  manifest.command = "fit --model " + model_name;
  manifest.config_json = config_text;
  manifest.input_digests = digests;
  manifest.seed = common.seed;
  manifest.wall_time_s = wall;
  write_manifest(common.out_dir, manifest);
  std::cout << "fit written to " << common.out_dir << " (" << wall << " s)\n";
  return 0;
}

std::vector<NewSpecies> load_new_species(const std::string& path,
                                         const TraitMatrix& fitted,
                                         bool row_side) {
  CsvTable t = read_csv_file(path);
  int ci = t.column("species_id");
  int cg = t.column("genus");
  int cf = t.column("family");
  int co = t.column("order");
  if (ci < 0 || cg < 0 || cf < 0)
    throw std::invalid_argument(path + ": header needs species_id,genus,family");
  std::vector<int> trait_cols;
  for (const auto& name : fitted.names) {
    int c = t.column(name);
    if (c < 0)
      throw std::invalid_argument(path + ": missing trait column '" + name + "'");
    trait_cols.push_back(c);
  }
  std::vector<NewSpecies> out;
  for (const auto& row : t.rows) {
    NewSpecies sp;
    sp.id = row[static_cast<std::size_t>(ci)];
    sp.row_side = row_side;
    sp.genus = row[static_cast<std::size_t>(cg)];
    sp.family = row[static_cast<std::size_t>(cf)];
    sp.order = co >= 0 ? row[static_cast<std::size_t>(co)] : "";
    sp.traits = VectorXd::Zero(fitted.p);
    sp.missing.assign(static_cast<std::size_t>(fitted.p), false);
    for (int m = 0; m < fitted.p; ++m) {
      const std::string& cell = row[static_cast<std::size_t>(trait_cols[m])];
      if (cell == "NA" || cell.empty())
        sp.missing[static_cast<std::size_t>(m)] = true;
      else
        sp.traits(m) = std::stod(cell);
    }
    out.push_back(std::move(sp));
  }
  return out;
}

int cmd_predict(const CommonArgs& common, const std::string& fit_path,
                const std::string& new_rows_path,
                const std::string& new_cols_path) {
  require_file(fit_path);
  FitBundle fit = load_fit_bundle(fit_path);
  prepare_out_dir(common.out_dir, common.force);
  Rng rng = Rng::child(common.seed, {0x707265646963ULL});

  auto posterior = posterior_interaction_matrix(fit.draws, fit.data);
  std::ofstream out(fs::path(common.out_dir) / "predictions.csv");
  out << "row_species,col_species,prob,mcse,ess_weights,flag\n";
  for (int j = 0; j < fit.data.n_cols; ++j)
    for (int i = 0; i < fit.data.n_rows; ++i)
      out << fit.data.row_ids[static_cast<std::size_t>(i)] << ","
          << fit.data.col_ids[static_cast<std::size_t>(j)] << ","
          << format_double(posterior.prob(i, j)) << ","
          << format_double(posterior.mcse(i, j)) << ",NA,"
          << (posterior.recorded(i, j) ? "recorded" : "unrecorded") << "\n";

  std::vector<NewSpecies> new_rows, new_cols;
  if (!new_rows_path.empty()) {
    require_file(new_rows_path);
    new_rows = load_new_species(new_rows_path, fit.traits_rows, true);
  }
  if (!new_cols_path.empty()) {
    require_file(new_cols_path);
    new_cols = load_new_species(new_cols_path, fit.traits_cols, false);
  }

  for (const auto& nr : new_rows) {
    for (int j = 0; j < fit.data.n_cols; ++j) {
      auto pred = predict_out_of_sample(fit, &nr, -1, nullptr, j, rng);
      out << nr.id << "," << fit.data.col_ids[static_cast<std::size_t>(j)] << ","
          << format_double(pred.prob) << ",NA," << format_double(pred.ess)
          << ",half-in-sample\n";
    }
  }
  for (const auto& nc : new_cols) {
    for (int i = 0; i < fit.data.n_rows; ++i) {
      auto pred = predict_out_of_sample(fit, nullptr, i, &nc, -1, rng);
      out << fit.data.row_ids[static_cast<std::size_t>(i)] << "," << nc.id << ","
          << format_double(pred.prob) << ",NA," << format_double(pred.ess)
          << ",half-in-sample\n";
    }
  }
  for (const auto& nr : new_rows)
    for (const auto& nc : new_cols) {
      auto pred = predict_out_of_sample(fit, &nr, -1, &nc, -1, rng);
      out << nr.id << "," << nc.id << "," << format_double(pred.prob) << ",NA,"
          << format_double(pred.ess) << ",out-of-sample\n";
    }

  std::cout << "predictions written to " << common.out_dir << "\n";
  return 0;
}

int cmd_importance(const CommonArgs& common, const std::string& fit_path, int B) {
  require_file(fit_path);
  FitBundle fit = load_fit_bundle(fit_path);
  prepare_out_dir(common.out_dir, common.force);
  Rng rng = Rng::child(common.seed, {0x696d70ULL});
  std::vector<ImportanceRow> rows =
      variable_importance_all(fit.draws, fit.traits_rows, true, B, rng);
  auto cols = variable_importance_all(fit.draws, fit.traits_cols, false, B, rng);
  rows.insert(rows.end(), cols.begin(), cols.end());
  write_importance_csv((fs::path(common.out_dir) / "importance.csv").string(),
                       rows);
  std::cout << "importance written to " << common.out_dir << "\n";
  return 0;
}

int cmd_simulate(const CommonArgs& common, int dgm, const std::string& preset,
                 int rows, int cols, int heldout_rows, int heldout_cols) {
  SimOptions opt = preset == "paper" ? paper_preset(dgm) : desk_preset(dgm);
  if (rows > 0) opt.n_rows = rows;
  if (cols > 0) opt.n_cols = cols;
  if (heldout_rows >= 0) opt.n_heldout_rows = heldout_rows;
  if (heldout_cols >= 0) opt.n_heldout_cols = heldout_cols;
  SimulatedData sim = generate_dataset(opt, common.seed);
  write_dataset_dir(common.out_dir, sim, common.force);
  std::cout << "dataset written to " << common.out_dir
            << " (recorded density " << sim.truth.achieved_density << ")\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& common, const std::string& fit_path,
                 const std::string& truth_path, const std::string& data_dir) {
  require_file(fit_path);
  require_file(truth_path);
  FitBundle fit = load_fit_bundle(fit_path);

  SimulatedData sim;
  if (!data_dir.empty()) {
    LoadedDataset ds = load_dataset_dir(data_dir);
    sim.data = ds.data;
  } else {
    sim.data = fit.data;
  }
  sim.truth = load_truth_json(truth_path);

  prepare_out_dir(common.out_dir, common.force);
  EffortSummary effort = compute_effort(sim.data);
  bool bias = fit.draws.model == ModelKind::kLatentBiasCorrected ||
              fit.draws.model == ModelKind::kCovBiasCorrected;
  MatrixXd scores = bias ? fit.draws.l_mean() : fit.draws.model_prob_mean();
  EvalTable table = evaluate_stratified(scores, sim, effort);
  write_eval_table_csv((fs::path(common.out_dir) / "eval_table.csv").string(),
                       table);
  std::cout << "evaluation written to " << common.out_dir << "\n";
  return 0;
}

int cmd_cv(const CommonArgs& common, const FitInputs& inputs,
           const std::string& model_name, int k, int reps) {
  ModelKind kind = model_kind_from_name(model_name);
  PriorConfig prior;
  ChainConfig cfg;
  std::string config_text;
  if (!common.config_path.empty()) {
    require_file(common.config_path);
    config_text = read_file(common.config_path);
    parse_config_document(config_text, &prior, &cfg);
  }
  if (common.seed_given() || cfg.seed == 0) cfg.seed = common.seed;
  cfg.threads = resolve_threads(common.threads_given() ? common.threads : cfg.threads);
  cfg.keep_l_draws = false;

  std::map<std::string, std::string> digests;
  LoadedDataset ds = load_inputs(inputs, &digests);
  TaxonomyCorrelation cu, cv;
  if (kind == ModelKind::kLatentBiasCorrected || kind == ModelKind::kLatentObserved) {
    TaxWeights w = taxonomy_weights_from_config(config_text);
    cu = build_taxonomy_correlation(ds.tax_rows, ds.data.row_ids, w.genus,
                                    w.family, w.order);
    cv = build_taxonomy_correlation(ds.tax_cols, ds.data.col_ids, w.genus,
                                    w.family, w.order);
  }

  prepare_out_dir(common.out_dir, common.force);
  Rng rng = Rng::child(common.seed, {0x6376ULL});
  auto reps_list = holdout_cv(ds.data, k, reps, rng);

  std::ofstream out(fs::path(common.out_dir) / "cv_results.csv");
  out << "rep,mean_ratio,median_ratio\n";
  for (std::size_t r = 0; r < reps_list.size(); ++r) {
    LoadedDataset masked = ds;
    masked.data = reps_list[r].masked;
    ChainConfig rep_cfg = cfg;
    rep_cfg.seed = Rng::derive(common.seed, {0x637665ULL, r});
    PosteriorDraws draws = dispatch_fit(kind, masked, prior, rep_cfg, cu, cv);
    bool bias = kind == ModelKind::kLatentBiasCorrected ||
                kind == ModelKind::kCovBiasCorrected;
    MatrixXd prob = bias ? draws.l_mean() : draws.model_prob_mean();
    HoldoutRatio ratio = holdout_ratio(prob, reps_list[r]);
    out << r << "," << format_double(ratio.mean_ratio) << ","
        << format_double(ratio.median_ratio) << "\n";
    out.flush();
  }
  std::cout << "cv results written to " << common.out_dir << "\n";
  return 0;
}

int cmd_diagnose(const CommonArgs& common, const std::string& fit_path) {
  require_file(fit_path);
  FitBundle fit = load_fit_bundle(fit_path);
  prepare_out_dir(common.out_dir, common.force);
  write_diagnostics_dir(common.out_dir, fit.draws, fit.data);
  std::cout << "diagnostics written to " << common.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latent interaction graph inference"};
  app.require_subcommand(1);

  CommonArgs common;
  FitInputs inputs;
  std::string model_name = "latent-bc";
  bool no_bundle = false;

  auto* fit = app.add_subcommand("fit", "fit a model to interaction data");
  add_common(fit, common);
  add_fit_inputs(fit, inputs);
  fit->add_option("--model", model_name,
                  "latent-bc | latent-obs | cov-bc | cov-obs");
  fit->add_flag("--no-save-draws", no_bundle, "skip writing fit.bin");

  std::string fit_path, new_rows_path, new_cols_path;
  auto* predict = app.add_subcommand("predict", "posterior interaction summaries");
  add_common(predict, common);
  predict->add_option("--fit", fit_path, "fit.bin from a fit run")->required();
  predict->add_option("--new-rows", new_rows_path, "new row-species table");
  predict->add_option("--new-cols", new_cols_path, "new column-species table");

  int B = 500;
  auto* importance = app.add_subcommand("importance", "permutation trait importance");
  add_common(importance, common);
  importance->add_option("--fit", fit_path, "fit.bin from a fit run")->required();
  importance->add_option("--B", B, "number of permutations");

  int dgm = 1, sim_rows = 0, sim_cols = 0;
  int sim_heldout_rows = -1, sim_heldout_cols = -1;
  std::string preset = "desk";
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset");
  add_common(simulate, common);
  simulate->add_option("--dgm", dgm, "generative mechanism 1|2|3")->required();
  simulate->add_option("--preset", preset, "desk | paper");
  simulate->add_option("--rows", sim_rows, "override row-species count");
  simulate->add_option("--cols", sim_cols, "override column-species count");
  simulate->add_option("--heldout-rows", sim_heldout_rows,
                       "out-of-sample row species (default 10)");
  simulate->add_option("--heldout-cols", sim_heldout_cols,
                       "out-of-sample column species (default 10)");

  std::string truth_path, eval_data_dir;
  auto* evaluate = app.add_subcommand("evaluate", "effort-stratified AUROC table");
  add_common(evaluate, common);
  evaluate->add_option("--fit", fit_path, "fit.bin")->required();
  evaluate->add_option("--truth", truth_path, "truth.json")->required();
  evaluate->add_option("--data-dir", eval_data_dir, "dataset directory");

  int cv_k = 100, cv_reps = 20;
  auto* cv = app.add_subcommand("cv", "hold-out cross-validation");
  add_common(cv, common);
  add_fit_inputs(cv, inputs);
  cv->add_option("--model", model_name, "model to refit per repetition");
  cv->add_option("--k", cv_k, "recorded interactions masked per repetition");
  cv->add_option("--reps", cv_reps, "repetitions");

  auto* diagnose = app.add_subcommand("diagnose", "convergence exports");
  add_common(diagnose, common);
  diagnose->add_option("--fit", fit_path, "fit.bin")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (fit->parsed()) return cmd_fit(common, inputs, model_name, !no_bundle);
    if (predict->parsed())
      return cmd_predict(common, fit_path, new_rows_path, new_cols_path);
    if (importance->parsed()) return cmd_importance(common, fit_path, B);
    if (simulate->parsed())
      return cmd_simulate(common, dgm, preset, sim_rows, sim_cols,
                          sim_heldout_rows, sim_heldout_cols);
    if (evaluate->parsed())
      return cmd_evaluate(common, fit_path, truth_path, eval_data_dir);
    if (cv->parsed()) return cmd_cv(common, inputs, model_name, cv_k, cv_reps);
    if (diagnose->parsed()) return cmd_diagnose(common, fit_path);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
