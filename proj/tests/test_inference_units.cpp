#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "tmmsb/inference.hpp"
#include "tmmsb/metrics.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Shared toy instance: M=2, K=2, one transaction 0 -> {1}.
// gamma = [[2,3],[1,4]], B = [[0.2,0.7],[0.4,0.5]],
// phi slices: node 0 (sender) = (0.6, 0.4), node 1 = (0.3, 0.7).
struct ToyInstance {
  tmmsb::TransactionLog log;
  tmmsb::VariationalState state;

  ToyInstance() {
    log.num_nodes = 2;
    log.transactions = {{0, {1}}};
    state.gamma = tmmsb::Matrix::from_rows({{2.0, 3.0}, {1.0, 4.0}});
    state.b = tmmsb::Matrix::from_rows({{0.2, 0.7}, {0.4, 0.5}});
    state.phi = tmmsb::Tensor3(1, 2, 2);
    state.phi(0, 0, 0) = 0.6;
    state.phi(0, 0, 1) = 0.4;
    state.phi(0, 1, 0) = 0.3;
    state.phi(0, 1, 1) = 0.7;
  }
};

}  // namespace

TEST_CASE("expected_log_pi at (1,1) is (-1,-1)") {
  // psi(1) - psi(2) = -1 exactly, by the recurrence
  const std::vector<double> gamma{1.0, 1.0};
  const auto out = tmmsb::expected_log_pi(gamma);
  CHECK_THAT(out[0], WithinAbs(-1.0, 1e-12));
  CHECK_THAT(out[1], WithinAbs(-1.0, 1e-12));
}

TEST_CASE("expected_log_pi is constant on symmetric rows") {
  for (const double c : {0.07, 1.0, 3.5, 40.0}) {
    const std::vector<double> gamma(5, c);
    const auto out = tmmsb::expected_log_pi(gamma);
    for (double v : out) CHECK_THAT(v, WithinAbs(out[0], 1e-14));
  }
}

TEST_CASE("expected_log_pi at (2,3): telescoped digamma differences") {
  // psi(2)-psi(5) = -(1/2+1/3+1/4) = -13/12, psi(3)-psi(5) = -(1/3+1/4) = -7/12
  const std::vector<double> gamma{2.0, 3.0};
  const auto out = tmmsb::expected_log_pi(gamma);
  CHECK_THAT(out[0], WithinAbs(-13.0 / 12.0, 1e-12));
  CHECK_THAT(out[1], WithinAbs(-7.0 / 12.0, 1e-12));
}

TEST_CASE("expected_log_pi matches the independent digamma oracle") {
  tmmsb::Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> gamma(4);
    for (double& g : gamma) g = 0.05 + 30.0 * rng.uniform01();
    const auto got = tmmsb::expected_log_pi(gamma);
    const auto want = oracles::expected_log_pi(gamma);
    for (int k = 0; k < 4; ++k) CHECK_THAT(got[k], WithinAbs(want[k], 1e-12));
  }
  const std::vector<double> bad{1.0, 0.0};
  CHECK_THROWS_AS(tmmsb::expected_log_pi(bad), std::invalid_argument);
}

TEST_CASE("update_gamma: alpha plus column sums") {
  // 5 transactions of phi = (0.5, 0.5) with alpha = 0.1 -> 2.6
  tmmsb::Tensor3 phi(5, 2, 2, 0.5);
  const std::vector<double> alpha{0.1, 0.1};
  const auto got = tmmsb::update_gamma(alpha, phi, 0);
  CHECK_THAT(got[0], WithinAbs(2.6, 1e-12));
  CHECK_THAT(got[1], WithinAbs(2.6, 1e-12));
}

TEST_CASE("update_gamma with no transactions returns alpha") {
  tmmsb::Tensor3 phi(0, 3, 2);
  const std::vector<double> alpha{0.4, 1.7};
  const auto got = tmmsb::update_gamma(alpha, phi, 1);
  CHECK(got == alpha);
}

TEST_CASE("update_gamma matches the loop-summation oracle") {
  tmmsb::Rng rng(22);
  const auto phi = oracles::random_phi(rng, 40, 6, 3);
  const std::vector<double> alpha{0.1, 0.25, 0.6};
  for (int m = 0; m < 6; ++m) {
    const auto got = tmmsb::update_gamma(alpha, phi, m);
    const auto want = oracles::update_gamma(alpha, phi, m);
    for (int k = 0; k < 3; ++k) CHECK_THAT(got[k], WithinAbs(want[k], 1e-12));
  }
}

TEST_CASE("update_phi with K=1 returns (1)") {
  tmmsb::TransactionLog log;
  log.num_nodes = 2;
  log.transactions = {{0, {1}}};
  tmmsb::VariationalState state;
  state.gamma = tmmsb::Matrix(2, 1, 3.0);
  state.b = tmmsb::Matrix(1, 1, 0.4);
  state.phi = tmmsb::Tensor3(1, 2, 1, 1.0);
  for (int m = 0; m < 2; ++m) {
    const auto out = tmmsb::update_phi(state, log, 0, m);
    REQUIRE(out.size() == 1);
    CHECK(out[0] == 1.0);
  }
}

TEST_CASE("update_phi is uniform when nothing distinguishes the groups") {
  tmmsb::TransactionLog log;
  log.num_nodes = 3;
  log.transactions = {{1, {0, 2}}};
  tmmsb::VariationalState state;
  state.gamma = tmmsb::Matrix(3, 2, 2.5);
  state.b = tmmsb::Matrix(2, 2, 0.3);
  state.phi = tmmsb::Tensor3(1, 3, 2, 0.5);
  for (int m = 0; m < 3; ++m) {
    const auto out = tmmsb::update_phi(state, log, 0, m);
    CHECK_THAT(out[0], WithinAbs(0.5, 1e-14));
    CHECK_THAT(out[1], WithinAbs(0.5, 1e-14));
  }
}

TEST_CASE("update_phi matches the exact-arithmetic toy evaluation") {
  // Frozen from a 40-digit evaluation of the displayed fixed-point formula.
  const ToyInstance toy;

  SECTION("receiver update (m = 1, received)") {
    const auto out = tmmsb::update_phi(toy.state, toy.log, 0, 1);
    CHECK_THAT(out[0], WithinAbs(0.064510100823385464, 1e-14));
    CHECK_THAT(out[1], WithinAbs(0.93548989917661454, 1e-14));
  }
  SECTION("sender update (m = 0)") {
    const auto out = tmmsb::update_phi(toy.state, toy.log, 0, 0);
    CHECK_THAT(out[0], WithinAbs(0.3840451388958104, 1e-14));
    CHECK_THAT(out[1], WithinAbs(0.6159548611041896, 1e-14));
  }
}

TEST_CASE("sweep_phi equals sequential reference updates") {
  // The sweep refreshes the sender first, then every other node against the
  // refreshed sender weights; receivers depend only on the sender's slice.
  tmmsb::Rng rng(23);
  const int m = 7, n = 12, k = 3;
  const auto log = oracles::random_log(rng, m, n);
  tmmsb::VariationalState state;
  state.phi = oracles::random_phi(rng, n, m, k);
  state.gamma = tmmsb::Matrix(m, k);
  for (auto& g : state.gamma.data) g = 0.2 + 10.0 * rng.uniform01();
  state.b = oracles::random_b(rng, k);

  tmmsb::VariationalState reference = state;
  for (int t = 0; t < n; ++t) {
    const int sender = log.transactions[t].sender;
    auto upd = tmmsb::update_phi(reference, log, t, sender);
    std::copy(upd.begin(), upd.end(), reference.phi.slice(t, sender).begin());
    for (int node = 0; node < m; ++node) {
      if (node == sender) continue;
      upd = tmmsb::update_phi(reference, log, t, node);
      std::copy(upd.begin(), upd.end(), reference.phi.slice(t, node).begin());
    }
  }

  const auto elog_pi = tmmsb::expected_log_pi_matrix(state.gamma);
  tmmsb::Matrix log_b(k, k), log_1mb(k, k);
  for (int a = 0; a < k; ++a)
    for (int c = 0; c < k; ++c) {
      log_b(a, c) = tmmsb::safe_log(state.b(a, c), tmmsb::kProbClampEps);
      log_1mb(a, c) = tmmsb::safe_log(1.0 - state.b(a, c), tmmsb::kProbClampEps);
    }
  tmmsb::detail::sweep_phi(state, log, elog_pi, log_b, log_1mb, 1);

  for (std::size_t i = 0; i < state.phi.data.size(); ++i)
    REQUIRE_THAT(state.phi.data[i], WithinAbs(reference.phi.data[i], 1e-12));
}

TEST_CASE("estimate_b with K=1 is the empirical recipient rate") {
  tmmsb::TransactionLog log;
  log.num_nodes = 4;
  log.transactions = {{0, {1, 2}}, {1, {3}}, {2, {0, 1, 3}}};
  tmmsb::Tensor3 phi(3, 4, 1, 1.0);
  const auto est = tmmsb::estimate_b(phi, log);
  // |Y| = 6 recipient slots over 3 * (M-1) = 9 exposures
  CHECK_THAT(est.b(0, 0), WithinAbs(6.0 / 9.0, 1e-12));
  CHECK(est.empty_cells.empty());
}

TEST_CASE("estimate_b under one-hot phi equals the counting oracle") {
  tmmsb::Rng rng(24);
  const int m = 9, n = 60, k = 3;
  const auto log = oracles::random_log(rng, m, n);
  std::vector<int> labels(m);
  for (int i = 0; i < m; ++i) labels[i] = static_cast<int>(rng.uniform01() * k);
  tmmsb::Tensor3 phi(n, m, k);
  for (int t = 0; t < n; ++t)
    for (int i = 0; i < m; ++i) phi(t, i, labels[i]) = 1.0;

  const auto est = tmmsb::estimate_b(phi, log);
  const auto want = oracles::estimate_b_counting(log, labels, k, tmmsb::kProbClampEps);
  for (int a = 0; a < k; ++a)
    for (int c = 0; c < k; ++c) {
      INFO("cell " << a << "," << c);
      CHECK_THAT(est.b(a, c), WithinAbs(want(a, c), 1e-12));
    }
}

TEST_CASE("estimate_b under soft phi equals the per-pair oracle") {
  tmmsb::Rng rng(25);
  const int m = 8, n = 70, k = 3;
  const auto log = oracles::random_log(rng, m, n);
  const auto phi = oracles::random_phi(rng, n, m, k);
  const auto est = tmmsb::estimate_b(phi, log);
  const auto want = oracles::estimate_b_soft(phi, log, tmmsb::kProbClampEps);
  for (int a = 0; a < k; ++a)
    for (int c = 0; c < k; ++c) CHECK_THAT(est.b(a, c), WithinAbs(want(a, c), 1e-10));
}

TEST_CASE("estimate_b reports never-observed cells and clamps them") {
  // Node 0 (the only group-0 node) sends to both group-1 nodes every time:
  // group 1 is never a sender and group 0 is never an exposed receiver, so
  // three cells have empty denominators; cell (0,1) saturates at 1.
  tmmsb::TransactionLog log;
  log.num_nodes = 3;
  log.transactions = {{0, {1, 2}}, {0, {1, 2}}};
  tmmsb::Tensor3 phi(2, 3, 2);
  for (int t = 0; t < 2; ++t)
    for (int i = 0; i < 3; ++i) phi(t, i, i == 0 ? 0 : 1) = 1.0;

  const auto est = tmmsb::estimate_b(phi, log);
  REQUIRE(est.empty_cells.size() == 3);
  CHECK(est.empty_cells[0] == std::pair<int, int>{0, 0});
  CHECK(est.empty_cells[1] == std::pair<int, int>{1, 0});
  CHECK(est.empty_cells[2] == std::pair<int, int>{1, 1});
  CHECK(est.b(0, 0) == tmmsb::kProbClampEps);
  CHECK(est.b(1, 0) == tmmsb::kProbClampEps);
  CHECK(est.b(1, 1) == tmmsb::kProbClampEps);
  // every exposure of (0, 1) was a receipt -> clamped away from 1
  CHECK(est.b(0, 1) == 1.0 - tmmsb::kProbClampEps);
}

TEST_CASE("estimate_b is bit-identical across thread counts") {
  tmmsb::Rng rng(26);
  const int m = 12, n = 700, k = 4;  // several reduction blocks
  const auto log = oracles::random_log(rng, m, n);
  const auto phi = oracles::random_phi(rng, n, m, k);
  const auto one = tmmsb::estimate_b(phi, log, tmmsb::kProbClampEps, 1);
  const auto four = tmmsb::estimate_b(phi, log, tmmsb::kProbClampEps, 4);
  CHECK(one.b == four.b);
  CHECK(one.empty_cells == four.empty_cells);
}

TEST_CASE("elbo matches the frozen toy value") {
  // M=3, K=2, N=2 instance evaluated with 40-digit arithmetic
  tmmsb::TransactionLog log;
  log.num_nodes = 3;
  log.transactions = {{0, {1}}, {2, {0, 1}}};
  tmmsb::VariationalState state;
  state.gamma = tmmsb::Matrix::from_rows({{1.2, 0.8}, {2.0, 3.0}, {0.5, 1.5}});
  state.b = tmmsb::Matrix::from_rows({{0.2, 0.7}, {0.4, 0.5}});
  state.phi = tmmsb::Tensor3(2, 3, 2);
  const double slices[2][3][2] = {{{0.6, 0.4}, {0.3, 0.7}, {0.5, 0.5}},
                                  {{0.2, 0.8}, {0.9, 0.1}, {0.45, 0.55}}};
  for (int t = 0; t < 2; ++t)
    for (int i = 0; i < 3; ++i)
      for (int kk = 0; kk < 2; ++kk) state.phi(t, i, kk) = slices[t][i][kk];
  const std::vector<double> alpha{0.3, 0.7};
  CHECK_THAT(tmmsb::elbo(state, log, alpha), WithinAbs(-7.7220609158955775, 1e-12));
}

TEST_CASE("elbo agrees with the naive term-by-term oracle") {
  tmmsb::Rng rng(27);
  for (int trial = 0; trial < 6; ++trial) {
    const int m = 5 + trial, n = 30, k = 2 + trial % 3;
    const auto log = oracles::random_log(rng, m, n);
    tmmsb::VariationalState state;
    state.phi = oracles::random_phi(rng, n, m, k);
    state.gamma = tmmsb::Matrix(m, k);
    for (auto& g : state.gamma.data) g = 0.2 + 8.0 * rng.uniform01();
    state.b = oracles::random_b(rng, k);
    std::vector<double> alpha(k, 0.1);
    const double got = tmmsb::elbo(state, log, alpha);
    const double want = oracles::elbo(state.gamma, state.phi, state.b, log, alpha,
                                      tmmsb::kProbClampEps);
    CHECK_THAT(got, WithinAbs(want, 1e-9 * std::max(1.0, std::abs(want))));
  }
}

TEST_CASE("elbo is bit-identical across thread counts") {
  tmmsb::Rng rng(28);
  const int m = 10, n = 600, k = 3;
  const auto log = oracles::random_log(rng, m, n);
  tmmsb::VariationalState state;
  state.phi = oracles::random_phi(rng, n, m, k);
  state.gamma = tmmsb::Matrix(m, k, 2.0);
  state.b = oracles::random_b(rng, k);
  const std::vector<double> alpha(k, 0.1);
  const double one = tmmsb::elbo(state, log, alpha, tmmsb::kProbClampEps, 1);
  const double four = tmmsb::elbo(state, log, alpha, tmmsb::kProbClampEps, 4);
  CHECK(one == four);
}

TEST_CASE("elbo with K=1 equals the Bernoulli data log-likelihood") {
  tmmsb::Rng rng(29);
  const auto log = oracles::random_log(rng, 6, 25);
  const int n = log.num_transactions();
  tmmsb::VariationalState state;
  state.phi = tmmsb::Tensor3(n, 6, 1, 1.0);
  state.gamma = tmmsb::Matrix(6, 1, 0.1 + n);
  state.b = tmmsb::estimate_b(state.phi, log).b;
  const std::vector<double> alpha{0.1};

  long double want = 0.0L;
  for (const auto& tr : log.transactions)
    for (int j = 0; j < 6; ++j) {
      if (j == tr.sender) continue;
      want += tr.is_recipient(j) ? std::log(state.b(0, 0)) : std::log(1.0 - state.b(0, 0));
    }
  CHECK_THAT(tmmsb::elbo(state, log, alpha), WithinAbs(static_cast<double>(want), 1e-10));
}

TEST_CASE("elbo never exceeds the enumerated log evidence") {
  // M=2, N=1, K=2: the exact evidence is a 4-term sum; any mean-field state
  // must lower-bound it.
  tmmsb::Rng rng(30);
  tmmsb::TransactionLog log;
  log.num_nodes = 2;
  log.transactions = {{0, {1}}};
  const std::vector<double> alpha{0.4, 0.8};
  for (int trial = 0; trial < 40; ++trial) {
    tmmsb::VariationalState state;
    state.phi = oracles::random_phi(rng, 1, 2, 2);
    state.gamma = tmmsb::Matrix(2, 2);
    for (auto& g : state.gamma.data) g = 0.1 + 5.0 * rng.uniform01();
    state.b = oracles::random_b(rng, 2, 0.1, 0.9);
    const double bound = tmmsb::elbo(state, log, alpha);
    const double evidence = oracles::log_evidence_single_transaction(log, state.b, alpha);
    INFO("trial " << trial << ": elbo " << bound << " vs log evidence " << evidence);
    CHECK(bound <= evidence + 1e-10);
  }
}

TEST_CASE("VariationalState::validate rejects malformed states") {
  tmmsb::VariationalState state;
  state.gamma = tmmsb::Matrix(2, 2, 1.0);
  state.phi = tmmsb::Tensor3(1, 2, 2, 0.5);
  state.b = tmmsb::Matrix(2, 2, 0.5);
  CHECK_NOTHROW(state.validate());
  SECTION("phi normalization") {
    state.phi(0, 1, 0) = 0.7;
    CHECK_THROWS_AS(state.validate(), std::invalid_argument);
  }
  SECTION("gamma positivity") {
    state.gamma(0, 0) = 0.0;
    CHECK_THROWS_AS(state.validate(), std::invalid_argument);
  }
  SECTION("negative phi") {
    state.phi(0, 0, 0) = -0.1;
    state.phi(0, 0, 1) = 1.1;
    CHECK_THROWS_AS(state.validate(), std::invalid_argument);
  }
}

TEST_CASE("FitConfig validation") {
  tmmsb::FitConfig c;
  c.k = 2;
  c.seed = 1;
  CHECK_NOTHROW(c.validate());
  SECTION("k") {
    c.k = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }
  SECTION("jitter range") {
    c.jitter_scale = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }
  SECTION("clamp range") {
    c.clamp_eps = 0.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }
  SECTION("ground truth needs memberships") {
    c.init = tmmsb::InitScheme::kGroundTruth;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.init_memberships = tmmsb::MembershipMatrix(tmmsb::Matrix(3, 2, 0.5));
    CHECK_NOTHROW(c.validate());
  }
}

TEST_CASE("align_labels identifies identity and swaps") {
  const tmmsb::MembershipMatrix ref(
      tmmsb::Matrix::from_rows({{0.9, 0.1}, {0.2, 0.8}, {0.6, 0.4}}));
  CHECK(tmmsb::align_labels(ref, ref) == std::vector<int>{0, 1});

  const tmmsb::MembershipMatrix swapped(tmmsb::permute_columns(ref.pi, std::vector<int>{1, 0}));
  CHECK(tmmsb::align_labels(ref, swapped) == std::vector<int>{1, 0});
}

TEST_CASE("align_labels exhaustive search attains the enumeration minimum") {
  tmmsb::Rng rng(33);
  const int k = 4, m = 10;
  const tmmsb::MembershipMatrix ref(oracles::random_memberships(rng, m, k));
  const tmmsb::MembershipMatrix cand(oracles::random_memberships(rng, m, k));
  const auto perm = tmmsb::align_labels(ref, cand);

  const auto cost_of = [&](const std::vector<int>& p) {
    double c = 0.0;
    for (int a = 0; a < k; ++a)
      for (int i = 0; i < m; ++i) c += std::abs(ref.pi(i, a) - cand.pi(i, p[a]));
    return c;
  };
  std::vector<int> p{0, 1, 2, 3};
  double best = std::numeric_limits<double>::infinity();
  do best = std::min(best, cost_of(p));
  while (std::next_permutation(p.begin(), p.end()));
  CHECK_THAT(cost_of(perm), WithinAbs(best, 1e-12));
}

TEST_CASE("align_labels greedy path returns a valid permutation for K > 10") {
  tmmsb::Rng rng(34);
  const int k = 11, m = 20;
  const tmmsb::MembershipMatrix ref(oracles::random_memberships(rng, m, k));
  tmmsb::Matrix shuffled = ref.pi;
  const std::vector<int> true_perm{3, 1, 4, 0, 8, 6, 2, 7, 5, 10, 9};
  shuffled = tmmsb::permute_columns(ref.pi, true_perm);
  const auto perm = tmmsb::align_labels(ref, tmmsb::MembershipMatrix(shuffled));
  // inverse relation: shuffled column perm[a] equals reference column a
  std::vector<char> used(k, 0);
  for (int a = 0; a < k; ++a) {
    REQUIRE(perm[a] >= 0);
    REQUIRE(perm[a] < k);
    REQUIRE(!used[perm[a]]);
    used[perm[a]] = 1;
  }
  // the shuffle is recoverable exactly: column j of shuffled is ref column true_perm[j]
  for (int a = 0; a < k; ++a) CHECK(true_perm[perm[a]] == a);
}

TEST_CASE("apply_alignment leaves predictive probabilities unchanged") {
  tmmsb::Rng rng(35);
  const int m = 8, k = 3;
  tmmsb::FittedModel model;
  model.params.k = k;
  model.params.alpha.assign(k, 0.1);
  model.params.b = oracles::random_b(rng, k);
  model.memberships = tmmsb::MembershipMatrix(oracles::random_memberships(rng, m, k));
  model.state.gamma = tmmsb::Matrix(m, k, 1.0);
  model.state.b = model.params.b;

  const auto before = tmmsb::receive_probability_matrix(model.memberships, model.params.b);
  const std::vector<int> perm{2, 0, 1};
  tmmsb::apply_alignment(model, perm);
  const auto after = tmmsb::receive_probability_matrix(model.memberships, model.params.b);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) CHECK_THAT(after(i, j), WithinAbs(before(i, j), 1e-13));
}

TEST_CASE("align_labels rejects dimension mismatches") {
  const tmmsb::MembershipMatrix a(tmmsb::Matrix(3, 2, 0.5));
  const tmmsb::MembershipMatrix b(tmmsb::Matrix(4, 2, 0.5));
  CHECK_THROWS_AS(tmmsb::align_labels(a, b), std::invalid_argument);
}
