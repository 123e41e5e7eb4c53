#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tmmsb/baseline.hpp"
#include "tmmsb/math.hpp"
#include "tmmsb/matrix.hpp"
#include "tmmsb/rng.hpp"
#include "tmmsb/spectral.hpp"
#include "tmmsb/types.hpp"

namespace tmmsb {

// Keeps every log(B) and log(1-B) finite regardless of what the data imply.
inline constexpr double kProbClampEps = 1e-9;

// Transactions are reduced in fixed-size blocks; partial results combine in
// block order, so totals are bit-identical for any thread count.
inline constexpr int kReductionBlock = 256;

struct VariationalState {
  Matrix gamma;  // M x K Dirichlet parameters, all positive
  Tensor3 phi;   // N x M x K multinomial parameters, slices sum to 1
  Matrix b;      // current K x K interaction-matrix estimate

  void validate(double tol = 1e-9) const {
    for (double g : gamma.data)
      if (!(g > 0.0)) throw std::invalid_argument("VariationalState: gamma must be positive");
    for (int n = 0; n < phi.n0; ++n)
      for (int m = 0; m < phi.n1; ++m) {
        double total = 0.0;
        for (double v : phi.slice(n, m)) {
          if (!(v >= 0.0)) throw std::invalid_argument("VariationalState: negative phi entry");
          total += v;
        }
        if (std::abs(total - 1.0) > tol)
          throw std::invalid_argument("VariationalState: phi slice (" + std::to_string(n) +
                                      ", " + std::to_string(m) + ") does not sum to 1");
      }
  }
};

enum class InitScheme { kUniformJitter, kBaselineClusters, kSpectral, kGroundTruth };

inline std::string to_string(InitScheme s) {
  switch (s) {
    case InitScheme::kUniformJitter: return "uniform-jitter";
    case InitScheme::kBaselineClusters: return "baseline-clusters";
    case InitScheme::kSpectral: return "spectral";
    case InitScheme::kGroundTruth: return "ground-truth";
  }
  return "?";
}

inline InitScheme init_scheme_from_string(const std::string& s) {
  if (s == "uniform-jitter") return InitScheme::kUniformJitter;
  if (s == "baseline-clusters") return InitScheme::kBaselineClusters;
  if (s == "spectral") return InitScheme::kSpectral;
  if (s == "ground-truth") return InitScheme::kGroundTruth;
  throw std::invalid_argument("unknown init scheme: " + s);
}

struct FitConfig {
  int k = 1;
  double alpha_value = 0.1;
  int max_outer_iters = 100;
  int max_inner_iters = 20;
  double rel_tol = 1e-6;
  InitScheme init = InitScheme::kUniformJitter;
  double jitter_scale = 0.05;
  std::uint64_t seed = 0;
  int threads = 1;
  double clamp_eps = kProbClampEps;
  std::optional<MembershipMatrix> init_memberships;  // required for kGroundTruth
  bool validate_each_iteration = false;

  void validate() const {
    if (k < 1) throw std::invalid_argument("FitConfig: k must be >= 1");
    if (!(alpha_value > 0.0)) throw std::invalid_argument("FitConfig: alpha_value must be > 0");
    if (max_outer_iters < 1 || max_inner_iters < 1)
      throw std::invalid_argument("FitConfig: iteration caps must be >= 1");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("FitConfig: rel_tol must be > 0");
    if (!(jitter_scale >= 0.0 && jitter_scale < 1.0))
      throw std::invalid_argument("FitConfig: jitter_scale must lie in [0, 1)");
    if (threads < 1) throw std::invalid_argument("FitConfig: threads must be >= 1");
    if (!(clamp_eps > 0.0 && clamp_eps < 0.5))
      throw std::invalid_argument("FitConfig: clamp_eps must lie in (0, 0.5)");
    if (init == InitScheme::kGroundTruth && !init_memberships)
      throw std::invalid_argument("FitConfig: ground-truth init needs init_memberships");
  }

  std::vector<double> alpha_vector() const { return std::vector<double>(k, alpha_value); }
};

struct FittedModel {
  ModelParams params;            // estimated B and the alpha used
  MembershipMatrix memberships;  // row-normalized gamma
  VariationalState state;
  std::vector<double> trace;  // ELBO per outer iteration
  bool converged = false;
  int iterations = 0;
  std::uint64_t seed = 0;
  FitConfig config;
  std::vector<std::pair<int, int>> b_empty_cells;  // group pairs never soft-observed
};

// E_q[log pi_mk] = psi(gamma_mk) - psi(sum_l gamma_ml)
inline std::vector<double> expected_log_pi(std::span<const double> gamma_row) {
  double total = 0.0;
  for (double g : gamma_row) {
    if (!(g > 0.0)) throw std::invalid_argument("expected_log_pi: entries must be positive");
    total += g;
  }
  const double psi_total = digamma(total);
  std::vector<double> out(gamma_row.size());
  for (std::size_t k = 0; k < gamma_row.size(); ++k) out[k] = digamma(gamma_row[k]) - psi_total;
  return out;
}

inline Matrix expected_log_pi_matrix(const Matrix& gamma) {
  Matrix out(gamma.rows, gamma.cols);
  for (int m = 0; m < gamma.rows; ++m) {
    auto row = expected_log_pi(gamma.row(m));
    std::copy(row.begin(), row.end(), out.row(m).begin());
  }
  return out;
}

// gamma_mk = alpha_k + sum_n phi_nmk
inline std::vector<double> update_gamma(std::span<const double> alpha, const Tensor3& phi, int m) {
  std::vector<double> out(alpha.begin(), alpha.end());
  for (int n = 0; n < phi.n0; ++n) {
    const auto slice = phi.slice(n, m);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += slice[k];
  }
  return out;
}

// Coordinate update for one phi slice. For a non-sender node the only
// coupling is with the sender's assignment through Y_nm; for the sender the
// expectation runs over every other node's assignment. Returned normalized.
inline std::vector<double> update_phi(const VariationalState& state, const TransactionLog& log,
                                      int n, int m, double clamp_eps = kProbClampEps) {
  const int k = state.b.rows;
  const Transaction& tr = log.transactions[n];
  std::vector<double> scores = expected_log_pi(state.gamma.row(m));
  if (m != tr.sender) {
    const bool received = tr.is_recipient(m);
    const auto sender_phi = state.phi.slice(n, tr.sender);
    for (int kk = 0; kk < k; ++kk) {
      double s = scores[kk];
      for (int l = 0; l < k; ++l) {
        const double w = received ? safe_log(state.b(l, kk), clamp_eps)
                                  : safe_log(1.0 - state.b(l, kk), clamp_eps);
        s += sender_phi[l] * w;
      }
      scores[kk] = s;
    }
  } else {
    for (int other = 0; other < log.num_nodes; ++other) {
      if (other == m) continue;
      const bool received = tr.is_recipient(other);
      const auto other_phi = state.phi.slice(n, other);
      for (int kk = 0; kk < k; ++kk) {
        double s = scores[kk];
        for (int l = 0; l < k; ++l) {
          const double w = received ? safe_log(state.b(kk, l), clamp_eps)
                                    : safe_log(1.0 - state.b(kk, l), clamp_eps);
          s += other_phi[l] * w;
        }
        scores[kk] = s;
      }
    }
  }
  softmax_in_place(scores);
  return scores;
}

struct BEstimate {
  Matrix b;
  std::vector<std::pair<int, int>> empty_cells;  // cells that fell back to clamp_eps
};

namespace detail {

inline int num_blocks(int total) { return (total + kReductionBlock - 1) / kReductionBlock; }

// Runs fn(block_index) for every transaction block, round-robin over
// `threads` workers. Work per block is independent; any cross-block
// reduction happens afterwards in block order.
inline void for_each_block(int total, int threads, const std::function<void(int)>& fn) {
  const int blocks = num_blocks(total);
  if (threads <= 1 || blocks <= 1) {
    for (int b = 0; b < blocks; ++b) fn(b);
    return;
  }
  threads = std::min(threads, blocks);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (int b = t; b < blocks; b += threads) fn(b);
    });
  for (auto& th : pool) th.join();
}

// Per-transaction soft recipient/exposure totals under the current phi:
// recv_l  = sum over recipients of phi_nml
// other_l = sum over non-recipient non-sender nodes of phi_nml
struct TransactionTotals {
  std::vector<double> recv;
  std::vector<double> other;
};

inline void accumulate_totals(const Tensor3& phi, const Transaction& tr, int n,
                              TransactionTotals& out) {
  const int m_count = phi.n1;
  const int k = phi.n2;
  out.recv.assign(k, 0.0);
  out.other.assign(k, 0.0);
  for (int m = 0; m < m_count; ++m) {
    if (m == tr.sender) continue;
    const auto slice = phi.slice(n, m);
    for (int l = 0; l < k; ++l) out.other[l] += slice[l];
  }
  for (int r : tr.recipients) {
    const auto slice = phi.slice(n, r);
    for (int l = 0; l < k; ++l) {
      out.recv[l] += slice[l];
      out.other[l] -= slice[l];
    }
  }
  // tiny negatives from cancellation
  for (int l = 0; l < k; ++l) out.other[l] = std::max(out.other[l], 0.0);
}

}  // namespace detail

// Empirical Bayes estimate: B_kl = soft count of observed k->l receipts over
// soft count of exposed k->l sender/receiver pairs. Cells with an empty
// denominator fall back to clamp_eps and are reported.
inline BEstimate estimate_b(const Tensor3& phi, const TransactionLog& log,
                            double clamp_eps = kProbClampEps, int threads = 1) {
  const int n_count = phi.n0;
  const int k = phi.n2;
  const int blocks = detail::num_blocks(n_count);
  std::vector<Matrix> num_parts(blocks, Matrix(k, k));
  std::vector<Matrix> den_parts(blocks, Matrix(k, k));

  detail::for_each_block(n_count, threads, [&](int blk) {
    detail::TransactionTotals totals;
    Matrix& num = num_parts[blk];
    Matrix& den = den_parts[blk];
    const int lo = blk * kReductionBlock;
    const int hi = std::min(n_count, lo + kReductionBlock);
    for (int n = lo; n < hi; ++n) {
      const Transaction& tr = log.transactions[n];
      detail::accumulate_totals(phi, tr, n, totals);
      const auto sender_phi = phi.slice(n, tr.sender);
      for (int kk = 0; kk < k; ++kk) {
        const double ps = sender_phi[kk];
        if (ps == 0.0) continue;
        for (int l = 0; l < k; ++l) {
          num(kk, l) += ps * totals.recv[l];
          den(kk, l) += ps * (totals.recv[l] + totals.other[l]);
        }
      }
    }
  });

  BEstimate out;
  out.b = Matrix(k, k);
  Matrix num(k, k), den(k, k);
  for (int blk = 0; blk < blocks; ++blk)
    for (std::size_t i = 0; i < num.data.size(); ++i) {
      num.data[i] += num_parts[blk].data[i];
      den.data[i] += den_parts[blk].data[i];
    }
  for (int kk = 0; kk < k; ++kk)
    for (int l = 0; l < k; ++l) {
      if (den(kk, l) > 0.0) {
        out.b(kk, l) = clamp_probability(num(kk, l) / den(kk, l), clamp_eps);
      } else {
        out.b(kk, l) = clamp_eps;
        out.empty_cells.emplace_back(kk, l);
      }
    }
  return out;
}

// Evidence lower bound for the mean-field family, conditioned on senders.
inline double elbo(const VariationalState& state, const TransactionLog& log,
                   std::span<const double> alpha, double clamp_eps = kProbClampEps,
                   int threads = 1) {
  const int m_count = state.gamma.rows;
  const int k = state.gamma.cols;
  const int n_count = state.phi.n0;

  Matrix elog_pi = expected_log_pi_matrix(state.gamma);
  Matrix log_b(k, k), log_1mb(k, k);
  for (int a = 0; a < k; ++a)
    for (int c = 0; c < k; ++c) {
      log_b(a, c) = safe_log(state.b(a, c), clamp_eps);
      log_1mb(a, c) = safe_log(1.0 - state.b(a, c), clamp_eps);
    }

  double alpha_total = 0.0, lgamma_alpha_total = 0.0;
  for (double a : alpha) {
    alpha_total += a;
    lgamma_alpha_total += std::lgamma(a);
  }
  const double dirichlet_const = std::lgamma(alpha_total) - lgamma_alpha_total;

  // prior on pi and entropy of q(pi)
  long double pi_terms = 0.0L;
  for (int m = 0; m < m_count; ++m) {
    double gamma_total = 0.0;
    long double row = dirichlet_const;
    for (int kk = 0; kk < k; ++kk) {
      const double g = state.gamma(m, kk);
      gamma_total += g;
      row += (alpha[kk] - g) * elog_pi(m, kk) + std::lgamma(g);
    }
    row -= std::lgamma(gamma_total);
    pi_terms += row;
  }

  // z expectations, Bernoulli data term, and entropy of q(z), per transaction
  const int blocks = detail::num_blocks(n_count);
  std::vector<long double> parts(blocks, 0.0L);
  detail::for_each_block(n_count, threads, [&](int blk) {
    detail::TransactionTotals totals;
    long double acc = 0.0L;
    const int lo = blk * kReductionBlock;
    const int hi = std::min(n_count, lo + kReductionBlock);
    for (int n = lo; n < hi; ++n) {
      const Transaction& tr = log.transactions[n];
      for (int m = 0; m < m_count; ++m) {
        const auto slice = state.phi.slice(n, m);
        double s = 0.0;
        for (int kk = 0; kk < k; ++kk) {
          const double p = slice[kk];
          if (p > 0.0) s += p * (elog_pi(m, kk) - std::log(p));
        }
        acc += s;
      }
      detail::accumulate_totals(state.phi, tr, n, totals);
      const auto sender_phi = state.phi.slice(n, tr.sender);
      double data_term = 0.0;
      for (int kk = 0; kk < k; ++kk) {
        if (sender_phi[kk] == 0.0) continue;
        double inner = 0.0;
        for (int l = 0; l < k; ++l)
          inner += totals.recv[l] * log_b(kk, l) + totals.other[l] * log_1mb(kk, l);
        data_term += sender_phi[kk] * inner;
      }
      acc += data_term;
    }
    parts[blk] = acc;
  });

  long double total = pi_terms;
  for (long double p : parts) total += p;
  return static_cast<double>(total);
}

namespace detail {

// One full coordinate sweep over phi: per transaction the sender slice is
// refreshed first, then every other node against the new sender weights.
inline void sweep_phi(VariationalState& state, const TransactionLog& log, const Matrix& elog_pi,
                      const Matrix& log_b, const Matrix& log_1mb, int threads) {
  const int n_count = state.phi.n0;
  const int m_count = state.phi.n1;
  const int k = state.phi.n2;

  for_each_block(n_count, threads, [&](int blk) {
    TransactionTotals totals;
    std::vector<double> scores(k), recv_w(k), other_w(k);
    const int lo = blk * kReductionBlock;
    const int hi = std::min(n_count, lo + kReductionBlock);
    for (int n = lo; n < hi; ++n) {
      const Transaction& tr = log.transactions[n];

      accumulate_totals(state.phi, tr, n, totals);
      auto sender_phi = state.phi.slice(n, tr.sender);
      for (int kk = 0; kk < k; ++kk) {
        double s = elog_pi(tr.sender, kk);
        for (int l = 0; l < k; ++l)
          s += totals.recv[l] * log_b(kk, l) + totals.other[l] * log_1mb(kk, l);
        scores[kk] = s;
      }
      softmax_in_place(scores);
      std::copy(scores.begin(), scores.end(), sender_phi.begin());

      // weights seen by every non-sender node, under the refreshed sender
      for (int kk = 0; kk < k; ++kk) {
        double wr = 0.0, wo = 0.0;
        for (int l = 0; l < k; ++l) {
          wr += sender_phi[l] * log_b(l, kk);
          wo += sender_phi[l] * log_1mb(l, kk);
        }
        recv_w[kk] = wr;
        other_w[kk] = wo;
      }
      for (int m = 0; m < m_count; ++m) {
        if (m == tr.sender) continue;
        const double* w = tr.is_recipient(m) ? recv_w.data() : other_w.data();
        auto slice = state.phi.slice(n, m);
        for (int kk = 0; kk < k; ++kk) scores[kk] = elog_pi(m, kk) + w[kk];
        softmax_in_place(scores);
        std::copy(scores.begin(), scores.end(), slice.begin());
      }
    }
  });
}

inline void refresh_gamma(VariationalState& state, std::span<const double> alpha, int threads) {
  const int m_count = state.gamma.rows;
  const int k = state.gamma.cols;
  const int n_count = state.phi.n0;
  for_each_block(m_count * kReductionBlock, threads, [&](int blk) {
    // reuse the transaction-block runner for an m-indexed loop
    const int lo = blk;
    if (lo >= m_count) return;
    auto row = state.gamma.row(lo);
    for (int kk = 0; kk < k; ++kk) row[kk] = alpha[kk];
    for (int n = 0; n < n_count; ++n) {
      const auto slice = state.phi.slice(n, lo);
      for (int kk = 0; kk < k; ++kk) row[kk] += slice[kk];
    }
  });
}

inline void init_phi(VariationalState& state, const TransactionLog& log, const FitConfig& config) {
  const int n_count = state.phi.n0;
  const int m_count = state.phi.n1;
  const int k = state.phi.n2;
  switch (config.init) {
    case InitScheme::kUniformJitter: {
      // Exact 1/K is a fixed point of the updates. The jitter is drawn per
      // node and shared across that node's slices: independent per-slice
      // noise would average out of gamma over N transactions, leaving the
      // symmetric saddle effectively intact.
      Rng rng = Rng(config.seed).split("phi-init");
      const double js = config.jitter_scale;
      Matrix tilt(m_count, k);
      for (int m = 0; m < m_count; ++m) {
        auto row = tilt.row(m);
        double total = 0.0;
        for (int kk = 0; kk < k; ++kk) {
          row[kk] = rng.uniform(1.0 - js, 1.0 + js);
          total += row[kk];
        }
        for (int kk = 0; kk < k; ++kk) row[kk] /= total;
      }
      for (int n = 0; n < n_count; ++n)
        for (int m = 0; m < m_count; ++m) {
          auto slice = state.phi.slice(n, m);
          const auto row = tilt.row(m);
          for (int kk = 0; kk < k; ++kk) slice[kk] = row[kk];
        }
      break;
    }
    case InitScheme::kBaselineClusters: {
      const auto base = baseline_hierarchical(log, k);
      // half one-hot, half uniform, so early B estimates can still move
      for (int n = 0; n < n_count; ++n)
        for (int m = 0; m < m_count; ++m) {
          auto slice = state.phi.slice(n, m);
          for (int kk = 0; kk < k; ++kk)
            slice[kk] = 0.5 / k + (base.labels[m] == kk ? 0.5 : 0.0);
        }
      break;
    }
    case InitScheme::kSpectral: {
      // Sharper blend than baseline-clusters: spectral labels are reliable
      // enough that diluting them lets the first B estimates wash out the
      // fine structure. The seed varies across restarts so portfolios
      // explore different k-means solutions.
      const auto spec = spectral_clusters(log, k, derive_seed(config.seed, "spectral-init"));
      for (int n = 0; n < n_count; ++n)
        for (int m = 0; m < m_count; ++m) {
          auto slice = state.phi.slice(n, m);
          for (int kk = 0; kk < k; ++kk)
            slice[kk] = 0.1 / k + (spec.labels[m] == kk ? 0.9 : 0.0);
        }
      break;
    }
    case InitScheme::kGroundTruth: {
      const Matrix& pi = config.init_memberships->pi;
      if (pi.rows != m_count || pi.cols != k)
        throw std::invalid_argument("fit: init_memberships has wrong shape");
      for (int n = 0; n < n_count; ++n)
        for (int m = 0; m < m_count; ++m) {
          auto slice = state.phi.slice(n, m);
          for (int kk = 0; kk < k; ++kk) slice[kk] = pi(m, kk);
        }
      break;
    }
  }
}

}  // namespace detail

// Nested-loop variational EM. The outer loop re-estimates B; the inner loop
// sweeps phi and then refreshes gamma until the bound stalls.
inline FittedModel fit(const TransactionLog& log, const FitConfig& config) {
  config.validate();
  log.validate(/*for_inference=*/true);
  const int n_count = log.num_transactions();
  const int m_count = log.num_nodes;
  const int k = config.k;
  const std::vector<double> alpha = config.alpha_vector();

  FittedModel model;
  model.seed = config.seed;
  model.config = config;

  VariationalState& state = model.state;
  state.gamma = Matrix(m_count, k, static_cast<double>(n_count) / k);
  state.phi = Tensor3(n_count, m_count, k);
  detail::init_phi(state, log, config);

  Matrix elog_pi = expected_log_pi_matrix(state.gamma);
  Matrix log_b(k, k), log_1mb(k, k);

  double prev_outer = -std::numeric_limits<double>::infinity();
  double current = prev_outer;
  const auto rel_change = [](double now, double before) {
    return std::abs(now - before) / std::max(1.0, std::abs(before));
  };

  // Row-normalized gamma, tracked across outer iterations. The bound changes
  // only quadratically near any critical point, so its size cannot tell the
  // symmetric saddle from a genuine optimum; the per-outer membership step is
  // linear in the escaping mode. While a saddle is being left the step keeps
  // setting new record highs (after the init transient decays), whereas at an
  // optimum it contracts geometrically far below every past step. Converged
  // therefore additionally requires the step to have contracted well under
  // its own running maximum and to not be growing.
  Matrix pi_prev(m_count, k), pi_now(m_count, k);
  const auto fill_pi = [&](Matrix& dst) {
    for (int m = 0; m < m_count; ++m) {
      double total = 0.0;
      for (int kk = 0; kk < k; ++kk) total += state.gamma(m, kk);
      for (int kk = 0; kk < k; ++kk) dst(m, kk) = state.gamma(m, kk) / total;
    }
  };
  fill_pi(pi_prev);
  constexpr double kStepContraction = 0.01;
  double prev_step = std::numeric_limits<double>::infinity();
  double max_step = 0.0;

  for (int outer = 0; outer < config.max_outer_iters; ++outer) {
    BEstimate est = estimate_b(state.phi, log, config.clamp_eps, config.threads);
    state.b = std::move(est.b);
    model.b_empty_cells = std::move(est.empty_cells);
    for (int a = 0; a < k; ++a)
      for (int c = 0; c < k; ++c) {
        log_b(a, c) = safe_log(state.b(a, c), config.clamp_eps);
        log_1mb(a, c) = safe_log(1.0 - state.b(a, c), config.clamp_eps);
      }

    double inner_prev = -std::numeric_limits<double>::infinity();
    for (int inner = 0; inner < config.max_inner_iters; ++inner) {
      detail::sweep_phi(state, log, elog_pi, log_b, log_1mb, config.threads);
      detail::refresh_gamma(state, alpha, config.threads);
      elog_pi = expected_log_pi_matrix(state.gamma);
      current = elbo(state, log, alpha, config.clamp_eps, config.threads);
      if (config.validate_each_iteration) state.validate();
      if (rel_change(current, inner_prev) < config.rel_tol) break;
      inner_prev = current;
    }

    model.trace.push_back(current);
    model.iterations = outer + 1;
    fill_pi(pi_now);
    double step = 0.0;
    for (int m = 0; m < m_count; ++m)
      for (int kk = 0; kk < k; ++kk)
        step = std::max(step, std::abs(pi_now(m, kk) - pi_prev(m, kk)));
    max_step = std::max(max_step, step);
    const double rel = outer == 0 ? std::numeric_limits<double>::infinity()
                                  : rel_change(current, prev_outer);
    if (outer > 1 && rel < config.rel_tol && step <= prev_step &&
        step <= kStepContraction * max_step) {
      model.converged = true;
      break;
    }
    prev_outer = current;
    prev_step = step;
    std::swap(pi_prev, pi_now);
  }

  model.params.k = k;
  model.params.alpha = alpha;
  model.params.b = state.b;
  Matrix pi(m_count, k);
  for (int m = 0; m < m_count; ++m) {
    double total = 0.0;
    for (int kk = 0; kk < k; ++kk) total += state.gamma(m, kk);
    for (int kk = 0; kk < k; ++kk) pi(m, kk) = state.gamma(m, kk) / total;
  }
  model.memberships = MembershipMatrix(std::move(pi));
  return model;
}

// Group labels are only identified up to permutation; this finds the column
// permutation of `candidate` closest to `reference` in elementwise L1.
// Exhaustive for K <= 10 (the cost matrix is precomputed, so each permutation
// is K lookups), greedy assignment above that.
inline std::vector<int> align_labels(const MembershipMatrix& reference,
                                     const MembershipMatrix& candidate) {
  if (reference.num_nodes() != candidate.num_nodes() ||
      reference.num_groups() != candidate.num_groups())
    throw std::invalid_argument("align_labels: dimension mismatch");
  const int m_count = reference.num_nodes();
  const int k = reference.num_groups();

  Matrix cost(k, k);
  for (int a = 0; a < k; ++a)
    for (int c = 0; c < k; ++c) {
      double s = 0.0;
      for (int m = 0; m < m_count; ++m) s += std::abs(reference.pi(m, a) - candidate.pi(m, c));
      cost(a, c) = s;
    }

  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  if (k <= 10) {
    std::vector<int> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
      double c = 0.0;
      for (int a = 0; a < k; ++a) c += cost(a, perm[a]);
      if (c < best_cost) {
        best_cost = c;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }

  // greedy: repeatedly take the cheapest unused (reference, candidate) pair
  std::vector<int> out(k, -1);
  std::vector<char> ref_used(k, 0), cand_used(k, 0);
  for (int step = 0; step < k; ++step) {
    double best_cost = std::numeric_limits<double>::infinity();
    int best_a = -1, best_c = -1;
    for (int a = 0; a < k; ++a) {
      if (ref_used[a]) continue;
      for (int c = 0; c < k; ++c) {
        if (cand_used[c]) continue;
        if (cost(a, c) < best_cost) {
          best_cost = cost(a, c);
          best_a = a;
          best_c = c;
        }
      }
    }
    out[best_a] = best_c;
    ref_used[best_a] = 1;
    cand_used[best_c] = 1;
  }
  return out;
}

inline std::vector<int> align_labels(const MembershipMatrix& reference,
                                     const FittedModel& candidate) {
  return align_labels(reference, candidate.memberships);
}

// Applies an alignment in place: pi columns and both axes of B.
inline void apply_alignment(FittedModel& model, std::span<const int> perm) {
  model.memberships.pi = permute_columns(model.memberships.pi, perm);
  model.params.b = permute_square(model.params.b, perm);
  model.state.gamma = permute_columns(model.state.gamma, perm);
  model.state.b = model.params.b;
}

}  // namespace tmmsb
