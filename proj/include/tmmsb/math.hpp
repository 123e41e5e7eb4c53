#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

namespace tmmsb {

// Digamma via the ascending recurrence and the Bernoulli asymptotic series.
// Shifted to x >= 10, where the truncation error of the series below is
// under 1e-13; accurate to ~1e-14 relative over the positive axis.
inline double digamma(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("digamma: requires x > 0");
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // psi(x) ~ ln x - 1/(2x) - sum B_2n / (2n x^(2n))
  double series = std::log(x) - 0.5 * inv -
                  inv2 * (1.0 / 12.0 -
                          inv2 * (1.0 / 120.0 -
                                  inv2 * (1.0 / 252.0 -
                                          inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
  return acc + series;
}

// Normalizes a log-space score vector into probabilities, in place.
inline void softmax_in_place(std::span<double> log_scores) {
  double mx = *std::max_element(log_scores.begin(), log_scores.end());
  double total = 0.0;
  for (double& s : log_scores) {
    s = std::exp(s - mx);
    total += s;
  }
  for (double& s : log_scores) s /= total;
}

inline double clamp_probability(double p, double eps) {
  return std::min(std::max(p, eps), 1.0 - eps);
}

// log of a probability, clamped away from 0 and 1 so the result is finite.
inline double safe_log(double p, double eps) { return std::log(clamp_probability(p, eps)); }

}  // namespace tmmsb
