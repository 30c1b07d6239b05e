#include "lgi/config.hpp"

#include <nlohmann/json.hpp>
#include <stdexcept>

namespace lgi {

using nlohmann::json;

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json prior_to_json(const PriorConfig& c) {
  return json{{"H", c.H},
              {"nu", c.nu},
              {"alpha", c.alpha},
              {"alpha_theta", c.alpha_theta},
              {"beta_theta", c.beta_theta},
              {"theta_inf", c.theta_inf},
              {"a_rho", c.a_rho},
              {"b_rho", c.b_rho},
              {"a_sigma", c.a_sigma},
              {"b_sigma", c.b_sigma},
              {"mu0", c.mu0},
              {"sigma2_0", c.sigma2_0},
              {"mh_concentration", c.mh_concentration}};
}

PriorConfig prior_from_json(const json& j) {
  PriorConfig c;
  maybe(j, "H", c.H);
  maybe(j, "nu", c.nu);
  maybe(j, "alpha", c.alpha);
  maybe(j, "alpha_theta", c.alpha_theta);
  maybe(j, "beta_theta", c.beta_theta);
  maybe(j, "theta_inf", c.theta_inf);
  maybe(j, "a_rho", c.a_rho);
  maybe(j, "b_rho", c.b_rho);
  maybe(j, "a_sigma", c.a_sigma);
  maybe(j, "b_sigma", c.b_sigma);
  maybe(j, "mu0", c.mu0);
  maybe(j, "sigma2_0", c.sigma2_0);
  maybe(j, "mh_concentration", c.mh_concentration);
  c.validate();
  return c;
}

json chain_to_json(const ChainConfig& c) {
  return json{{"n_iter", c.n_iter},   {"burn_in", c.burn_in},
              {"thin", c.thin},       {"n_chains", c.n_chains},
              {"seed", c.seed},       {"threads", c.threads},
              {"keep_l_draws", c.keep_l_draws}};
}

ChainConfig chain_from_json(const json& j) {
  ChainConfig c;
  maybe(j, "n_iter", c.n_iter);
  maybe(j, "burn_in", c.burn_in);
  maybe(j, "thin", c.thin);
  maybe(j, "n_chains", c.n_chains);
  maybe(j, "seed", c.seed);
  maybe(j, "threads", c.threads);
  maybe(j, "keep_l_draws", c.keep_l_draws);
  c.validate();
  return c;
}

}  // namespace

void PriorConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be > 0");
  };
  if (H < 1) throw std::invalid_argument("H must be >= 1");
  positive(nu, "nu");
  positive(alpha, "alpha");
  positive(alpha_theta, "alpha_theta");
  positive(beta_theta, "beta_theta");
  positive(theta_inf, "theta_inf");
  positive(a_rho, "a_rho");
  positive(b_rho, "b_rho");
  positive(a_sigma, "a_sigma");
  positive(b_sigma, "b_sigma");
  positive(sigma2_0, "sigma2_0");
  positive(mh_concentration, "mh_concentration");
}

std::string PriorConfig::to_json() const { return prior_to_json(*this).dump(2); }

PriorConfig PriorConfig::from_json(const std::string& text) {
  return prior_from_json(json::parse(text));
}

void ChainConfig::validate() const {
  if (n_iter < 1) throw std::invalid_argument("n_iter must be >= 1");
  if (burn_in < 0 || burn_in >= n_iter)
    throw std::invalid_argument("burn_in must be in [0, n_iter)");
  if (thin < 1) throw std::invalid_argument("thin must be >= 1");
  if (n_chains < 1) throw std::invalid_argument("n_chains must be >= 1");
}

std::string ChainConfig::to_json() const { return chain_to_json(*this).dump(2); }

ChainConfig ChainConfig::from_json(const std::string& text) {
  return chain_from_json(json::parse(text));
}

void parse_config_document(const std::string& text, PriorConfig* prior,
                           ChainConfig* chain) {
  json j = json::parse(text);
  if (prior) {
    *prior = prior_from_json(j.contains("prior") ? j.at("prior") : j);
  }
  if (chain) {
    *chain = chain_from_json(j.contains("chain") ? j.at("chain") : j);
  }
}

}  // namespace lgi
