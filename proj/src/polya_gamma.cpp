#include "lgi/polya_gamma.hpp"

#include <cmath>
#include <stdexcept>

namespace lgi {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kHalfPi = kPi / 2.0;
constexpr double kPiSq = kPi * kPi;
// Crossover between the inverse-Gaussian and exponential envelope pieces.
constexpr double kT = 2.0 / kPi;

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double log_norm_cdf(double x) {
  // Tail-safe log Phi(x); the direct log is fine until erfc underflows.
  if (x > -37.0) return std::log(norm_cdf(x));
  // asymptotic expansion log phi(x) - log |x|
  return -0.5 * x * x - 0.5 * std::log(2.0 * kPi) - std::log(-x);
}

// Coefficient a_n(x) of the alternating series for the J*(1, c) density.
double series_term(int n, double x) {
  double np = n + 0.5;
  if (x <= kT) {
    return kPi * np * std::pow(2.0 / (kPi * x), 1.5) *
           std::exp(-2.0 * np * np / x);
  }
  return kPi * np * std::exp(-0.5 * x * kPiSq * np * np);
}

// Inverse-Gaussian(mu, 1) variate by the Michael-Schucany-Haas transform.
double rand_inv_gauss(double mu, Rng& rng) {
  double u = rng.normal();
  double v = u * u;
  double x = mu + 0.5 * mu * (mu * v - std::sqrt(4.0 * mu * v + mu * mu * v * v));
  if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
  return x;
}

// Gamma-based sampler for the x > pi/2 part, used by the truncated IG draw.
double rand_trunc_gamma(Rng& rng) {
  for (;;) {
    double x = 2.0 * rng.exponential(1.0) + kHalfPi;
    double g = std::sqrt(kHalfPi / x);
    if (rng.uniform() <= g) return x;
  }
}

// Inverse-Gaussian(1/c, 1) truncated to (0, t].
double rand_trunc_inv_gauss(double c, Rng& rng) {
  double mu = 1.0 / c;
  if (mu > kT) {
    for (;;) {
      double x = 1.0 / rand_trunc_gamma(rng);
      if (std::log(rng.uniform()) < -0.5 * c * c * x) return x;
    }
  }
  for (;;) {
    double x = rand_inv_gauss(mu, rng);
    if (x < kT) return x;
  }
}

}  // namespace

double draw_pg1(double z, Rng& rng) {
  if (!std::isfinite(z)) throw std::domain_error("draw_pg1: non-finite tilt");
  if (z > 700.0) z = 700.0;
  if (z < -700.0) z = -700.0;

  // PG(1, z) = J*(1, z/2) / 4 and the law depends on |z| only.
  double c = 0.5 * std::fabs(z);

  double big_k = 0.125 * kPiSq + 0.5 * c * c;
  // Envelope piece masses: p covers (t, inf) with a tilted exponential,
  // q covers (0, t] with a truncated inverse Gaussian.
  double log_p = std::log(kHalfPi / big_k) - big_k * kT;
  double w = std::sqrt(kHalfPi);
  double lq1 = -c + log_norm_cdf(w * (kT * c - 1.0));
  double lq2 = c + log_norm_cdf(-w * (kT * c + 1.0));
  double m = std::max(lq1, lq2);
  double log_q = std::log(2.0) + m + std::log(std::exp(lq1 - m) + std::exp(lq2 - m));
  double prob_exp_piece = 1.0 / (1.0 + std::exp(log_q - log_p));

  for (;;) {
    double x;
    if (rng.uniform() < prob_exp_piece) {
      x = kT + rng.exponential(1.0) / big_k;
    } else {
      x = rand_trunc_inv_gauss(c, rng);
    }

    // Squeeze on the partial sums: odd partials bound the density from below,
    // even partials from above, so the loop terminates with an exact decision.
    double s = series_term(0, x);
    double u = rng.uniform() * s;
    int n = 0;
    for (;;) {
      ++n;
      if (n % 2 == 1) {
        s -= series_term(n, x);
        if (u <= s) return 0.25 * x;
      } else {
        s += series_term(n, x);
        if (u > s) break;
      }
    }
  }
}

double pg_mean(double z) {
  if (!std::isfinite(z)) throw std::domain_error("pg_mean: non-finite tilt");
  double a = std::fabs(z);
  if (a < 1e-8) return 0.25 - a * a / 48.0;
  return std::tanh(a / 2.0) / (2.0 * a);
}

double pg_var(double z) {
  double a = std::fabs(z);
  if (a < 1e-4) return 1.0 / 24.0;
  double sech = 1.0 / std::cosh(a / 2.0);
  return (std::sinh(a) - a) * sech * sech / (4.0 * a * a * a);
}

}  // namespace lgi
