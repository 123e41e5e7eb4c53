#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "tmmsb/matrix.hpp"
#include "tmmsb/rng.hpp"
#include "tmmsb/types.hpp"

namespace tmmsb {

struct SimulationConfig {
  int m = 0;                             // node count
  int n = 0;                             // transaction count (used unless poisson_rate set)
  std::optional<double> poisson_rate;    // opt-in N ~ Poisson(rate)
  int k = 0;
  std::vector<double> alpha;             // K positive reals
  Matrix b;                              // K x K
  std::vector<double> sender_weights;    // optional lambda; empty = uniform
  std::optional<Matrix> fixed_pi;        // bypass the Dirichlet draw (testing hook)
  std::uint64_t seed = 0;
  int max_redraws = 1000;                // rejection cap per transaction

  void validate() const {
    if (m < 2) throw std::invalid_argument("SimulationConfig: m must be >= 2");
    if (poisson_rate) {
      if (!(*poisson_rate > 0.0))
        throw std::invalid_argument("SimulationConfig: poisson_rate must be > 0");
    } else if (n < 1) {
      throw std::invalid_argument("SimulationConfig: n must be >= 1");
    }
    ModelParams params{k, b, alpha};
    params.validate();
    if (!sender_weights.empty()) {
      if (static_cast<int>(sender_weights.size()) != m)
        throw std::invalid_argument("SimulationConfig: sender_weights must have m entries");
      double total = 0.0;
      for (double w : sender_weights) {
        if (!(w >= 0.0))
          throw std::invalid_argument("SimulationConfig: sender_weights must be non-negative");
        total += w;
      }
      if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("SimulationConfig: sender_weights must sum to 1");
    }
    if (fixed_pi && (fixed_pi->rows != m || fixed_pi->cols != k))
      throw std::invalid_argument("SimulationConfig: fixed_pi must be m x k");
    if (max_redraws < 1)
      throw std::invalid_argument("SimulationConfig: max_redraws must be >= 1");
  }
};

struct SampleResult {
  TransactionLog log;
  MembershipMatrix memberships;  // ground-truth pi
  IntMatrix group_labels;        // N x M, z[n][m] = group of node m in transaction n
};

// Pr(j receives | i sends) = pi_i B pi_j^T
inline double receive_probability(const MembershipMatrix& memberships, const Matrix& b,
                                  int i, int j) {
  if (i == j) throw std::invalid_argument("receive_probability: sender equals receiver");
  const auto pi = memberships.pi.row(i);
  const auto pj = memberships.pi.row(j);
  const int k = memberships.num_groups();
  double p = 0.0;
  for (int a = 0; a < k; ++a) {
    if (pi[a] == 0.0) continue;
    double inner = 0.0;
    for (int c = 0; c < k; ++c) inner += b(a, c) * pj[c];
    p += pi[a] * inner;
  }
  return p;
}

// Generative sampler. Every node draws a fresh group per transaction; the
// sender is a categorical draw over lambda; each other node receives with
// probability B[z_sender][z_node]. Transactions that come out with zero
// recipients are redrawn wholesale (new Z row, same sender) so the emitted
// log satisfies the at-least-one-recipient convention.
inline SampleResult sample_network(const SimulationConfig& config, Rng& rng) {
  config.validate();
  const int m = config.m;
  const int k = config.k;

  int n = config.n;
  if (config.poisson_rate) {
    Rng count_rng = rng.split("transaction-count");
    n = std::max(1, count_rng.poisson(*config.poisson_rate));
  }

  Matrix pi(m, k);
  if (config.fixed_pi) {
    pi = *config.fixed_pi;
    MembershipMatrix(pi).validate();
  } else {
    Rng pi_rng = rng.split("memberships");
    for (int i = 0; i < m; ++i) pi_rng.dirichlet(config.alpha, pi.row(i));
  }

  std::vector<double> lambda = config.sender_weights;
  if (lambda.empty()) lambda.assign(m, 1.0 / m);

  Rng draw = rng.split("transactions");
  TransactionLog log;
  log.num_nodes = m;
  log.transactions.reserve(n);
  IntMatrix z(n, m);

  std::vector<int> groups(m);
  std::vector<int> recipients;
  for (int t = 0; t < n; ++t) {
    const int sender = draw.categorical(lambda);
    bool emitted = false;
    for (int attempt = 0; attempt < config.max_redraws; ++attempt) {
      for (int i = 0; i < m; ++i) groups[i] = draw.categorical(pi.row(i));
      recipients.clear();
      const auto b_row = config.b.row(groups[sender]);
      for (int j = 0; j < m; ++j) {
        if (j == sender) continue;
        if (draw.bernoulli(b_row[groups[j]])) recipients.push_back(j);
      }
      if (!recipients.empty()) {
        for (int i = 0; i < m; ++i) z(t, i) = groups[i];
        log.transactions.emplace_back(sender, recipients);
        emitted = true;
        break;
      }
    }
    if (!emitted) {
      std::ostringstream msg;
      msg << "sample_network: transaction " << t << ": no recipients after "
          << config.max_redraws << " redraws (sender " << sender
          << "; pi row gives max receive probability ";
      double worst = 0.0;
      MembershipMatrix mm{pi};
      for (int j = 0; j < m; ++j)
        if (j != sender) worst = std::max(worst, receive_probability(mm, config.b, sender, j));
      msg << worst << "); B and pi admit almost no recipients for this sender";
      throw std::runtime_error(msg.str());
    }
  }

  return SampleResult{std::move(log), MembershipMatrix(std::move(pi)), std::move(z)};
}

inline SampleResult sample_network(const SimulationConfig& config) {
  Rng rng(config.seed);
  return sample_network(config, rng);
}

}  // namespace tmmsb
