#include "lgi/draws.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace lgi {

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLatentBiasCorrected: return "latent-bc";
    case ModelKind::kLatentObserved: return "latent-obs";
    case ModelKind::kCovBiasCorrected: return "cov-bc";
    case ModelKind::kCovObserved: return "cov-obs";
  }
  return "unknown";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "latent-bc") return ModelKind::kLatentBiasCorrected;
  if (name == "latent-obs") return ModelKind::kLatentObserved;
  if (name == "cov-bc") return ModelKind::kCovBiasCorrected;
  if (name == "cov-obs") return ModelKind::kCovObserved;
  throw std::invalid_argument("unknown model '" + name +
                              "' (expected latent-bc, latent-obs, cov-bc, cov-obs)");
}

MatrixXd PosteriorDraws::l_mean() const {
  int n = total_kept();
  if (n == 0) throw std::runtime_error("no kept draws");
  return l_sum / static_cast<double>(n);
}

MatrixXd PosteriorDraws::model_prob_mean() const {
  int n = total_kept();
  if (n == 0) throw std::runtime_error("no kept draws");
  return prob_sum / static_cast<double>(n);
}

namespace {

constexpr char kMagic[8] = {'L', 'G', 'I', 'F', 'I', 'T', 'B', '1'};

struct Writer {
  std::ofstream out;
  explicit Writer(const std::string& path) : out(path, std::ios::binary) {
    if (!out) throw std::runtime_error("cannot write " + path);
  }
  void raw(const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void u8(std::uint8_t v) { raw(&v, 1); }
  void i32(std::int32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
  void str(const std::string& s) {
    i32(static_cast<std::int32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void strings(const std::vector<std::string>& v) {
    i32(static_cast<std::int32_t>(v.size()));
    for (const auto& s : v) str(s);
  }
  void vec(const VectorXd& v) {
    i32(static_cast<std::int32_t>(v.size()));
    raw(v.data(), sizeof(double) * v.size());
  }
  void mat(const MatrixXd& m) {
    i32(static_cast<std::int32_t>(m.rows()));
    i32(static_cast<std::int32_t>(m.cols()));
    raw(m.data(), sizeof(double) * m.size());
  }
  void imat(const MatrixXi& m) {
    i32(static_cast<std::int32_t>(m.rows()));
    i32(static_cast<std::int32_t>(m.cols()));
    raw(m.data(), sizeof(std::int32_t) * m.size());
  }
};

struct Reader {
  std::ifstream in;
  explicit Reader(const std::string& path) : in(path, std::ios::binary) {
    if (!in) throw std::runtime_error("cannot open " + path);
  }
  void raw(void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("truncated fit bundle");
  }
  std::uint8_t u8() { std::uint8_t v; raw(&v, 1); return v; }
  std::int32_t i32() { std::int32_t v; raw(&v, 4); return v; }
  std::uint64_t u64() { std::uint64_t v; raw(&v, 8); return v; }
  double f64() { double v; raw(&v, 8); return v; }
  std::string str() {
    std::int32_t n = i32();
    std::string s(static_cast<std::size_t>(n), '\0');
    if (n > 0) raw(s.data(), static_cast<std::size_t>(n));
    return s;
  }
  std::vector<std::string> strings() {
    std::int32_t n = i32();
    std::vector<std::string> v(static_cast<std::size_t>(n));
    for (auto& s : v) s = str();
    return v;
  }
  VectorXd vec() {
    std::int32_t n = i32();
    VectorXd v(n);
    if (n > 0) raw(v.data(), sizeof(double) * static_cast<std::size_t>(n));
    return v;
  }
  MatrixXd mat() {
    std::int32_t r = i32(), c = i32();
    MatrixXd m(r, c);
    if (m.size() > 0) raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
    return m;
  }
  MatrixXi imat() {
    std::int32_t r = i32(), c = i32();
    MatrixXi m(r, c);
    if (m.size() > 0)
      raw(m.data(), sizeof(std::int32_t) * static_cast<std::size_t>(m.size()));
    return m;
  }
};

void write_prior(Writer& w, const PriorConfig& p) {
  w.i32(p.H);
  w.f64(p.nu);
  w.f64(p.alpha);
  w.f64(p.alpha_theta);
  w.f64(p.beta_theta);
  w.f64(p.theta_inf);
  w.f64(p.a_rho);
  w.f64(p.b_rho);
  w.f64(p.a_sigma);
  w.f64(p.b_sigma);
  w.f64(p.mu0);
  w.f64(p.sigma2_0);
  w.f64(p.mh_concentration);
}

PriorConfig read_prior(Reader& r) {
  PriorConfig p;
  p.H = r.i32();
  p.nu = r.f64();
  p.alpha = r.f64();
  p.alpha_theta = r.f64();
  p.beta_theta = r.f64();
  p.theta_inf = r.f64();
  p.a_rho = r.f64();
  p.b_rho = r.f64();
  p.a_sigma = r.f64();
  p.b_sigma = r.f64();
  p.mu0 = r.f64();
  p.sigma2_0 = r.f64();
  p.mh_concentration = r.f64();
  return p;
}

void write_draw(Writer& w, const ParamDraw& d) {
  w.f64(d.lambda0);
  w.vec(d.lambda);
  w.mat(d.U);
  w.mat(d.V);
  w.mat(d.beta);
  w.mat(d.gamma);
  w.vec(d.sigma2_x);
  w.vec(d.sigma2_w);
  w.f64(d.delta0);
  w.vec(d.delta);
  w.f64(d.sigma2_p_rows);
  w.f64(d.zeta0);
  w.vec(d.zeta);
  w.f64(d.sigma2_p_cols);
  w.vec(d.p_rows);
  w.vec(d.p_cols);
  w.f64(d.rho_rows);
  w.f64(d.rho_cols);
  w.vec(d.alpha);
  w.vec(d.mu_x);
  w.vec(d.mu_w);
}

ParamDraw read_draw(Reader& r) {
  ParamDraw d;
  d.lambda0 = r.f64();
  d.lambda = r.vec();
  d.U = r.mat();
  d.V = r.mat();
  d.beta = r.mat();
  d.gamma = r.mat();
  d.sigma2_x = r.vec();
  d.sigma2_w = r.vec();
  d.delta0 = r.f64();
  d.delta = r.vec();
  d.sigma2_p_rows = r.f64();
  d.zeta0 = r.f64();
  d.zeta = r.vec();
  d.sigma2_p_cols = r.f64();
  d.p_rows = r.vec();
  d.p_cols = r.vec();
  d.rho_rows = r.f64();
  d.rho_cols = r.f64();
  d.alpha = r.vec();
  d.mu_x = r.vec();
  d.mu_w = r.vec();
  return d;
}

void write_traits(Writer& w, const TraitMatrix& t) {
  w.i32(t.n);
  w.i32(t.p);
  w.mat(t.values);
  for (int m = 0; m < t.p; ++m)
    for (int i = 0; i < t.n; ++i) w.u8(t.missing(i, m) ? 1 : 0);
  for (auto k : t.kind) w.u8(k == TraitKind::kBinary ? 1 : 0);
  w.strings(t.names);
  w.strings(t.species_ids);
  w.vec(t.center);
  w.vec(t.scale);
}

TraitMatrix read_traits(Reader& r) {
  TraitMatrix t;
  t.n = r.i32();
  t.p = r.i32();
  t.values = r.mat();
  t.missing.resize(t.n, t.p);
  for (int m = 0; m < t.p; ++m)
    for (int i = 0; i < t.n; ++i) t.missing(i, m) = r.u8() != 0;
  t.kind.resize(static_cast<std::size_t>(t.p));
  for (auto& k : t.kind)
    k = r.u8() != 0 ? TraitKind::kBinary : TraitKind::kContinuous;
  t.names = r.strings();
  t.species_ids = r.strings();
  t.center = r.vec();
  t.scale = r.vec();
  return t;
}

void write_taxonomy(Writer& w, const TaxonomyCorrelation& t) {
  w.mat(t.C);
  w.strings(t.levels.species_ids);
  w.strings(t.levels.genus);
  w.strings(t.levels.family);
  w.strings(t.levels.order);
  w.f64(t.w_genus);
  w.f64(t.w_family);
  w.f64(t.w_order);
}

TaxonomyCorrelation read_taxonomy(Reader& r) {
  TaxonomyCorrelation t;
  t.C = r.mat();
  t.levels.species_ids = r.strings();
  t.levels.genus = r.strings();
  t.levels.family = r.strings();
  t.levels.order = r.strings();
  t.w_genus = r.f64();
  t.w_family = r.f64();
  t.w_order = r.f64();
  return t;
}

}  // namespace

void save_fit_bundle(const FitBundle& b, const std::string& path) {
  Writer w(path);
  w.raw(kMagic, sizeof(kMagic));

  const PosteriorDraws& d = b.draws;
  w.u8(static_cast<std::uint8_t>(d.model));
  w.i32(d.n_rows);
  w.i32(d.n_cols);
  w.i32(d.H);
  w.i32(d.p_B);
  w.i32(d.p_P);
  write_prior(w, d.prior);
  w.i32(d.chain_config.n_iter);
  w.i32(d.chain_config.burn_in);
  w.i32(d.chain_config.thin);
  w.i32(d.chain_config.n_chains);
  w.u64(d.chain_config.seed);
  w.i32(d.chain_config.threads);
  w.u8(d.chain_config.keep_l_draws ? 1 : 0);

  w.i32(static_cast<std::int32_t>(d.chains.size()));
  for (const auto& chain : d.chains) {
    w.i32(static_cast<std::int32_t>(chain.size()));
    for (const auto& draw : chain) write_draw(w, draw);
  }

  w.u8(d.l_draws.empty() ? 0 : 1);
  if (!d.l_draws.empty()) {
    for (const auto& chain : d.l_draws) {
      w.i32(static_cast<std::int32_t>(chain.size()));
      for (const auto& snap : chain) {
        w.i32(snap.rows());
        w.i32(snap.cols());
        w.u64(snap.words().size());
        w.raw(snap.words().data(), snap.words().size() * 8);
      }
    }
  }

  w.mat(d.l_sum);
  w.mat(d.prob_sum);
  w.i32(static_cast<std::int32_t>(d.tracked_rows.size()));
  for (int i : d.tracked_rows) w.i32(i);
  w.i32(static_cast<std::int32_t>(d.tracked_cols.size()));
  for (int j : d.tracked_cols) w.i32(j);

  w.i32(static_cast<std::int32_t>(d.series.size()));
  for (const auto& m : d.series) {
    w.i32(static_cast<std::int32_t>(m.size()));
    for (const auto& [name, values] : m) {
      w.str(name);
      w.i32(static_cast<std::int32_t>(values.size()));
      w.raw(values.data(), values.size() * 8);
    }
  }

  // the data the fit consumed
  w.i32(b.data.n_rows);
  w.i32(b.data.n_cols);
  w.imat(b.data.adjacency);
  w.imat(b.data.overlap);
  w.strings(b.data.row_ids);
  w.strings(b.data.col_ids);
  w.strings(b.data.study_ids);
  write_traits(w, b.traits_rows);
  write_traits(w, b.traits_cols);
  write_taxonomy(w, b.tax_rows);
  write_taxonomy(w, b.tax_cols);
}

FitBundle load_fit_bundle(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.raw(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error(path + ": not a fit bundle");

  FitBundle b;
  PosteriorDraws& d = b.draws;
  d.model = static_cast<ModelKind>(r.u8());
  d.n_rows = r.i32();
  d.n_cols = r.i32();
  d.H = r.i32();
  d.p_B = r.i32();
  d.p_P = r.i32();
  d.prior = read_prior(r);
  d.chain_config.n_iter = r.i32();
  d.chain_config.burn_in = r.i32();
  d.chain_config.thin = r.i32();
  d.chain_config.n_chains = r.i32();
  d.chain_config.seed = r.u64();
  d.chain_config.threads = r.i32();
  d.chain_config.keep_l_draws = r.u8() != 0;

  int n_chains = r.i32();
  d.chains.resize(static_cast<std::size_t>(n_chains));
  for (auto& chain : d.chains) {
    int n = r.i32();
    chain.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) chain.push_back(read_draw(r));
  }

  if (r.u8() != 0) {
    d.l_draws.resize(static_cast<std::size_t>(n_chains));
    for (auto& chain : d.l_draws) {
      int n = r.i32();
      chain.reserve(static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k) {
        int rows = r.i32(), cols = r.i32();
        BitMatrix snap(rows, cols);
        std::uint64_t words = r.u64();
        snap.words().resize(words);
        r.raw(snap.words().data(), words * 8);
        chain.push_back(std::move(snap));
      }
    }
  }

  d.l_sum = r.mat();
  d.prob_sum = r.mat();
  int ntr = r.i32();
  d.tracked_rows.resize(ntr);
  for (auto& i : d.tracked_rows) i = r.i32();
  int ntc = r.i32();
  d.tracked_cols.resize(ntc);
  for (auto& j : d.tracked_cols) j = r.i32();

  int n_series = r.i32();
  d.series.resize(static_cast<std::size_t>(n_series));
  for (auto& m : d.series) {
    int n_keys = r.i32();
    for (int k = 0; k < n_keys; ++k) {
      std::string name = r.str();
      int n = r.i32();
      std::vector<double> values(static_cast<std::size_t>(n));
      if (n > 0) r.raw(values.data(), values.size() * 8);
      m.emplace(std::move(name), std::move(values));
    }
  }

  b.data.n_rows = r.i32();
  b.data.n_cols = r.i32();
  b.data.adjacency = r.imat();
  b.data.overlap = r.imat();
  b.data.row_ids = r.strings();
  b.data.col_ids = r.strings();
  b.data.study_ids = r.strings();
  b.traits_rows = read_traits(r);
  b.traits_cols = read_traits(r);
  b.tax_rows = read_taxonomy(r);
  b.tax_cols = read_taxonomy(r);
  return b;
}

}  // namespace lgi
