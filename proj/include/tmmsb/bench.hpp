#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "tmmsb/inference.hpp"
#include "tmmsb/matrix.hpp"
#include "tmmsb/simulate.hpp"

namespace tmmsb {

struct BenchPoint {
  int m = 0;
  int n = 0;
  int k = 0;
  double seconds = 0.0;
};

struct BenchConfig {
  std::vector<int> m_values{50, 100};
  std::vector<int> n_values{400, 800};
  std::vector<int> k_values{3, 6};
  int repeats = 3;  // median of repeats per grid point
  // Fixed sweep counts so the measurement isolates per-iteration cost; a
  // convergence-dependent iteration count would confound the exponents.
  int outer_iters = 2;
  int inner_iters = 3;
  std::uint64_t seed = 1;
};

struct BenchResult {
  std::vector<BenchPoint> points;
  double intercept = 0.0;
  double exponent_m = 0.0;
  double exponent_n = 0.0;
  double exponent_k = 0.0;
  double r_squared = 0.0;
};

namespace detail {

// Solves a small dense system in place by Gaussian elimination.
inline std::vector<double> solve_linear(Matrix a, std::vector<double> b) {
  const int n = a.rows;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (a(pivot, col) == 0.0) throw std::runtime_error("singular regression system");
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a(col, c), a(pivot, c));
      std::swap(b[col], b[pivot]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      for (int c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a(r, c) * x[c];
    x[r] = s / a(r, r);
  }
  return x;
}

}  // namespace detail

// Ordinary least squares of log(time) on [1, log M, log N, log K].
inline BenchResult fit_scaling_law(const std::vector<BenchPoint>& points) {
  if (points.size() < 6)
    throw std::invalid_argument("fit_scaling_law: need at least 6 grid points");
  const int d = 4;
  Matrix xtx(d, d);
  std::vector<double> xty(d, 0.0);
  double y_sum = 0.0;
  for (const auto& p : points) {
    const double x[4] = {1.0, std::log(p.m), std::log(p.n), std::log(p.k)};
    const double y = std::log(p.seconds);
    y_sum += y;
    for (int i = 0; i < d; ++i) {
      xty[i] += x[i] * y;
      for (int j = 0; j < d; ++j) xtx(i, j) += x[i] * x[j];
    }
  }
  const auto beta = detail::solve_linear(xtx, xty);

  const double y_mean = y_sum / points.size();
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& p : points) {
    const double x[4] = {1.0, std::log(p.m), std::log(p.n), std::log(p.k)};
    const double y = std::log(p.seconds);
    double yhat = 0.0;
    for (int i = 0; i < d; ++i) yhat += beta[i] * x[i];
    ss_res += (y - yhat) * (y - yhat);
    ss_tot += (y - y_mean) * (y - y_mean);
  }

  BenchResult out;
  out.points = points;
  out.intercept = beta[0];
  out.exponent_m = beta[1];
  out.exponent_n = beta[2];
  out.exponent_k = beta[3];
  out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  return out;
}

// Times fixed-sweep fits over the (M, N, K) grid and fits the scaling law.
inline BenchResult run_bench(const BenchConfig& config) {
  std::vector<BenchPoint> points;
  for (int m : config.m_values)
    for (int n : config.n_values)
      for (int k : config.k_values) {
        SimulationConfig sim;
        sim.m = m;
        sim.n = n;
        sim.k = k;
        sim.alpha.assign(k, 0.1);
        sim.b = Matrix(k, k, 0.02);
        for (int i = 0; i < k; ++i) sim.b(i, i) = 0.2;
        sim.seed = derive_seed(config.seed, "bench-sim", (static_cast<std::uint64_t>(m) << 32) ^
                                                             (static_cast<std::uint64_t>(n) << 16) ^
                                                             static_cast<std::uint64_t>(k));
        const auto sample = sample_network(sim);

        FitConfig fc;
        fc.k = k;
        fc.seed = derive_seed(config.seed, "bench-fit", 0);
        fc.max_outer_iters = config.outer_iters;
        fc.max_inner_iters = config.inner_iters;
        fc.rel_tol = 1e-300;  // never trips: every run does the full sweep budget

        std::vector<double> times;
        for (int rep = 0; rep < config.repeats; ++rep) {
          const auto t0 = std::chrono::steady_clock::now();
          volatile double sink = fit(sample.log, fc).trace.back();
          (void)sink;
          const auto t1 = std::chrono::steady_clock::now();
          times.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
        std::sort(times.begin(), times.end());
        points.push_back({m, n, k, times[times.size() / 2]});
      }
  return fit_scaling_law(points);
}

}  // namespace tmmsb
