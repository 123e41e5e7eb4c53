#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace tmmsb {

// 64-bit FNV-1a, used to fold stream tags into seeds.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer over seed ^ salt
  std::uint64_t z = seed ^ (salt + 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index = 0) {
  return mix_seed(base, fnv1a64(tag) + 0x632be59bd9b4e019ull * index);
}

// Deterministic random source. All variate transforms are written out here
// rather than taken from <random> distributions, whose output is not pinned
// by the standard; identical seeds give identical streams on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Independent child stream; deterministic in (seed, tag, index).
  Rng split(std::string_view tag, std::uint64_t index = 0) const {
    return Rng(derive_seed(seed_, tag, index));
  }

  std::uint64_t next_u64() { return engine_(); }

  // uniform on [0, 1), 53-bit resolution
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  // index draw proportional to non-negative weights (need not be normalized)
  int categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("categorical: weights sum to zero");
    double u = uniform01() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      cum += weights[i];
      if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  // Box-Muller; one normal per call keeps the stream layout simple.
  double normal() {
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Marsaglia-Tsang for shape >= 1.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma: requires shape > 0");
    if (shape < 1.0) {
      // boost by one and scale back: G(a) = G(a+1) * U^(1/a)
      double g = gamma(shape + 1.0);
      double u = 1.0 - uniform01();
      return g * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = 1.0 - uniform01();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  // log of a Gamma(shape) draw; stays finite for tiny shapes where the
  // plain draw would underflow (u^(1/a) with a ~ 0.05)
  double log_gamma_variate(double shape) {
    if (shape >= 1.0) return std::log(gamma(shape));
    double g = gamma(shape + 1.0);
    double u = 1.0 - uniform01();
    return std::log(g) + std::log(u) / shape;
  }

  // Dirichlet draw via normalized Gamma variates, carried out in log space.
  void dirichlet(std::span<const double> alpha, std::span<double> out) {
    if (alpha.size() != out.size()) throw std::invalid_argument("dirichlet: size mismatch");
    std::vector<double> lg(alpha.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < alpha.size(); ++k) {
      lg[k] = log_gamma_variate(alpha[k]);
      mx = std::max(mx, lg[k]);
    }
    double total = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
      out[k] = std::exp(lg[k] - mx);
      total += out[k];
    }
    for (std::size_t k = 0; k < alpha.size(); ++k) out[k] /= total;
  }

  // Knuth's product method in log space; O(rate) time.
  int poisson(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("poisson: requires rate > 0");
    int k = 0;
    double acc = 0.0;
    for (;;) {
      acc += std::log(1.0 - uniform01());
      if (acc < -rate) return k;
      ++k;
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace tmmsb
