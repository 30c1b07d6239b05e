#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>

namespace lgi {

// Deterministic random stream. Every sampler in the library draws through
// this wrapper so that a run is fully reproducible from its seed. Substreams
// (per chain, per replicate) are derived with `child`, which mixes the parent
// seed with a list of keys; derived streams are independent for all practical
// purposes and stable across platforms with the same standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // splitmix64 finalizer, the usual way to spread correlated seeds apart
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  static std::uint64_t derive(std::uint64_t seed,
                              std::initializer_list<std::uint64_t> keys) {
    std::uint64_t s = mix(seed);
    for (auto k : keys) s = mix(s ^ k);
    return s;
  }

  static Rng child(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    return Rng(derive(seed, keys));
  }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(eng_);
  }

  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(eng_);
  }

  // Gamma(shape, scale); mean = shape * scale.
  double gamma(double shape, double scale) {
    return std::gamma_distribution<double>(shape, scale)(eng_);
  }

  // Inverse gamma with density ~ x^{-shape-1} exp(-rate / x); mean rate/(shape-1).
  double inv_gamma(double shape, double rate) {
    double g = gamma(shape, 1.0 / rate);
    if (g <= 0.0) throw std::runtime_error("inv_gamma: underflow in gamma draw");
    return 1.0 / g;
  }

  double beta(double a, double b) {
    double x = gamma(a, 1.0);
    double y = gamma(b, 1.0);
    double s = x + y;
    if (s <= 0.0) return 0.5;  // both shapes tiny; callers reject boundary draws
    return x / s;
  }

  double exponential(double rate = 1.0) {
    return std::exponential_distribution<double>(rate)(eng_);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // uniform integer in [0, n)
  std::uint64_t integer(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng_);
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace lgi
