#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "tmmsb/presets.hpp"
#include "tmmsb/simulate.hpp"
#include "tmmsb/types.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

TEST_CASE("Transaction keeps recipients sorted and unique") {
  tmmsb::Transaction tr(2, {5, 1, 5, 3, 1});
  CHECK(tr.recipients == std::vector<int>{1, 3, 5});
  CHECK(tr.is_recipient(3));
  CHECK_FALSE(tr.is_recipient(2));
  CHECK_FALSE(tr.is_recipient(4));
}

TEST_CASE("TransactionLog validation names the offending transaction and rule") {
  tmmsb::TransactionLog log;
  log.num_nodes = 3;
  log.transactions = {{0, {1}}, {1, {2}}};
  CHECK_NOTHROW(log.validate(true));

  SECTION("sender out of range") {
    log.transactions.push_back({7, {1}});
    CHECK_THROWS_WITH(log.validate(), ContainsSubstring("transaction 2") &&
                                          ContainsSubstring("sender out of range"));
  }
  SECTION("empty recipient set") {
    log.transactions.push_back({});
    log.transactions.back().sender = 0;
    CHECK_THROWS_WITH(log.validate(), ContainsSubstring("transaction 2") &&
                                          ContainsSubstring("empty recipient set"));
  }
  SECTION("self-send") {
    log.transactions.push_back({1, {1, 2}});
    CHECK_THROWS_WITH(log.validate(), ContainsSubstring("transaction 2") &&
                                          ContainsSubstring("sender listed as recipient"));
  }
  SECTION("recipient out of range") {
    log.transactions.push_back({0, {3}});
    CHECK_THROWS_WITH(log.validate(), ContainsSubstring("recipient out of range"));
  }
  SECTION("fewer than 2 nodes") {
    log.num_nodes = 1;
    CHECK_THROWS_WITH(log.validate(), ContainsSubstring("at least 2 nodes"));
  }
  SECTION("inference needs transactions") {
    log.transactions.clear();
    CHECK_NOTHROW(log.validate(false));
    CHECK_THROWS_WITH(log.validate(true), ContainsSubstring("at least 1 transaction"));
  }
  SECTION("label list must match num_nodes") {
    log.node_labels = {"a", "b"};
    CHECK_THROWS_WITH(log.validate(), ContainsSubstring("node_labels"));
  }
}

TEST_CASE("TransactionLog counts recipient slots") {
  tmmsb::TransactionLog log;
  log.num_nodes = 4;
  log.transactions = {{0, {1, 2}}, {3, {0}}, {1, {0, 2, 3}}};
  CHECK(log.total_recipients() == 6);
  CHECK(log.label(2) == "2");
  log.node_labels = {"a", "b", "c", "d"};
  CHECK(log.label(2) == "c");
}

TEST_CASE("ModelParams validates B range and alpha positivity") {
  tmmsb::ModelParams p;
  p.k = 2;
  p.b = tmmsb::Matrix::from_rows({{0.2, 0.4}, {0.0, 1.0}});
  p.alpha = {0.1, 0.1};
  CHECK_NOTHROW(p.validate());
  SECTION("b out of range") {
    p.b(0, 0) = 1.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SECTION("wrong shape") {
    p.b = tmmsb::Matrix(2, 3);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SECTION("alpha non-positive") {
    p.alpha = {0.1, 0.0};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
}

TEST_CASE("MembershipMatrix validates simplex rows") {
  tmmsb::MembershipMatrix m(tmmsb::Matrix::from_rows({{0.25, 0.75}, {1.0, 0.0}}));
  CHECK_NOTHROW(m.validate());
  m.pi(0, 0) = 0.5;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("one_hot_memberships builds indicator rows") {
  const std::vector<int> labels{2, 0, 1, 2};
  const auto m = tmmsb::one_hot_memberships(labels, 3);
  CHECK(m.pi == tmmsb::Matrix::from_rows({{0, 0, 1}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
}

TEST_CASE("receive_probability reduces to B under one-hot memberships") {
  const auto b = tmmsb::Matrix::from_rows({{0.2, 0.4}, {0.7, 0.6}});
  const auto pi = tmmsb::one_hot_memberships(std::vector<int>{0, 1}, 2);
  CHECK_THAT(tmmsb::receive_probability(pi, b, 0, 1), WithinAbs(0.4, 1e-15));
  CHECK_THAT(tmmsb::receive_probability(pi, b, 1, 0), WithinAbs(0.7, 1e-15));
  CHECK_THROWS_AS(tmmsb::receive_probability(pi, b, 1, 1), std::invalid_argument);
}

TEST_CASE("receive_probability: uniform mixture arithmetic") {
  // pi_i = pi_j = (0.5, 0.5), B = [[0.2, 0.4], [0.0, 0.6]] -> 0.25 * 1.2 = 0.3
  const auto b = tmmsb::Matrix::from_rows({{0.2, 0.4}, {0.0, 0.6}});
  const tmmsb::MembershipMatrix pi(tmmsb::Matrix(2, 2, 0.5));
  CHECK_THAT(tmmsb::receive_probability(pi, b, 0, 1), WithinAbs(0.3, 1e-15));
}

TEST_CASE("receive_probability matches the double-loop oracle") {
  tmmsb::Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform01() * 4);
    const tmmsb::MembershipMatrix pi(oracles::random_memberships(rng, 5, k));
    const auto b = oracles::random_b(rng, k, 0.0, 1.0);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        if (i == j) continue;
        double want = 0.0;
        for (int a = 0; a < k; ++a)
          for (int c = 0; c < k; ++c) want += pi.pi(i, a) * b(a, c) * pi.pi(j, c);
        CHECK_THAT(tmmsb::receive_probability(pi, b, i, j), WithinAbs(want, 1e-13));
      }
  }
}

TEST_CASE("receive_probability is invariant under joint label permutation") {
  tmmsb::Rng rng(32);
  const int k = 4;
  const tmmsb::MembershipMatrix pi(oracles::random_memberships(rng, 6, k));
  const auto b = oracles::random_b(rng, k);
  const std::vector<int> perm{2, 0, 3, 1};
  const tmmsb::MembershipMatrix pi2(tmmsb::permute_columns(pi.pi, perm));
  const auto b2 = tmmsb::permute_square(b, perm);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      if (i == j) continue;
      CHECK_THAT(tmmsb::receive_probability(pi2, b2, i, j),
                 WithinAbs(tmmsb::receive_probability(pi, b, i, j), 1e-13));
    }
}

TEST_CASE("sample_network produces exactly N valid transactions") {
  auto cfg = tmmsb::preset("table1:1");  // K=3, alpha=0.05, M=50, N=500
  cfg.seed = 77;
  const auto sample = tmmsb::sample_network(cfg);
  CHECK(sample.log.num_transactions() == 500);
  CHECK(sample.log.num_nodes == 50);
  CHECK_NOTHROW(sample.log.validate(true));
  CHECK_NOTHROW(sample.memberships.validate());
  CHECK(sample.group_labels.rows == 500);
  CHECK(sample.group_labels.cols == 50);
  for (int v : sample.group_labels.data) {
    REQUIRE(v >= 0);
    REQUIRE(v < 3);
  }
}

TEST_CASE("sample_network with B = [[1]] forces the only possible recipient") {
  tmmsb::SimulationConfig cfg;
  cfg.m = 2;
  cfg.n = 10;
  cfg.k = 1;
  cfg.alpha = {1.0};
  cfg.b = tmmsb::Matrix(1, 1, 1.0);
  cfg.seed = 3;
  const auto sample = tmmsb::sample_network(cfg);
  REQUIRE(sample.log.num_transactions() == 10);
  for (const auto& tr : sample.log.transactions) {
    REQUIRE(tr.recipients.size() == 1);
    CHECK(tr.recipients[0] == 1 - tr.sender);
  }
}

TEST_CASE("sample_network empirical receive frequency matches pi B pi^T") {
  // Fixed one-hot memberships and a pinned sender; rejection bias is
  // negligible here (P(no recipient) ~ 0.7^19).
  const int m = 20, n = 100000;
  tmmsb::SimulationConfig cfg;
  cfg.m = m;
  cfg.n = n;
  cfg.k = 2;
  cfg.alpha = {1.0, 1.0};
  cfg.b = tmmsb::Matrix::from_rows({{0.3, 0.25}, {0.2, 0.35}});
  tmmsb::Matrix pi(m, 2);
  for (int i = 0; i < m; ++i) pi(i, i % 2) = 1.0;
  cfg.fixed_pi = pi;
  cfg.sender_weights.assign(m, 0.0);
  cfg.sender_weights[0] = 1.0;  // node 0 (group 0) always sends
  cfg.seed = 99;

  const auto sample = tmmsb::sample_network(cfg);
  std::vector<int> received(m, 0);
  for (const auto& tr : sample.log.transactions)
    for (int r : tr.recipients) received[r] += 1;

  const tmmsb::MembershipMatrix mm(pi);
  for (int j : {1, 2, 5, 10}) {
    const double want = tmmsb::receive_probability(mm, cfg.b, 0, j);
    const double got = received[j] / static_cast<double>(n);
    const double se = std::sqrt(want * (1.0 - want) / n);
    INFO("j = " << j << " want " << want << " got " << got);
    CHECK_THAT(got, WithinAbs(want, 3.0 * se));
  }
}

TEST_CASE("sample_network rejects configurations that never produce recipients") {
  tmmsb::SimulationConfig cfg;
  cfg.m = 2;
  cfg.n = 1;
  cfg.k = 1;
  cfg.alpha = {1.0};
  cfg.b = tmmsb::Matrix(1, 1, 0.0);
  cfg.max_redraws = 5;
  cfg.seed = 1;
  CHECK_THROWS_WITH(tmmsb::sample_network(cfg),
                    ContainsSubstring("no recipients after 5 redraws"));
}

TEST_CASE("sample_network is deterministic in the seed") {
  auto cfg = tmmsb::preset("table1:1");
  cfg.seed = 2024;
  const auto a = tmmsb::sample_network(cfg);
  const auto b = tmmsb::sample_network(cfg);
  CHECK(a.log == b.log);
  CHECK(a.memberships.pi == b.memberships.pi);
  CHECK(a.group_labels == b.group_labels);

  cfg.seed = 2025;
  const auto c = tmmsb::sample_network(cfg);
  CHECK_FALSE(a.log == c.log);
}

TEST_CASE("poisson_rate draws the transaction count") {
  tmmsb::SimulationConfig cfg;
  cfg.m = 5;
  cfg.k = 1;
  cfg.alpha = {1.0};
  cfg.b = tmmsb::Matrix(1, 1, 0.5);
  cfg.poisson_rate = 20.0;
  std::set<int> sizes;
  for (std::uint64_t s = 0; s < 8; ++s) {
    cfg.seed = s;
    const auto sample = tmmsb::sample_network(cfg);
    REQUIRE(sample.log.num_transactions() >= 1);
    sizes.insert(sample.log.num_transactions());
  }
  CHECK(sizes.size() > 1);  // actually random, not the fixed n
}

TEST_CASE("alpha controls membership concentration") {
  tmmsb::SimulationConfig cfg;
  cfg.m = 200;
  cfg.n = 1;
  cfg.k = 4;
  cfg.b = tmmsb::Matrix(4, 4, 0.5);
  cfg.seed = 5;

  cfg.alpha.assign(4, 0.05);
  const auto sparse = tmmsb::sample_network(cfg);
  int concentrated = 0;
  for (int i = 0; i < cfg.m; ++i) {
    double mx = 0.0;
    for (int k = 0; k < 4; ++k) mx = std::max(mx, sparse.memberships.pi(i, k));
    if (mx > 0.9) ++concentrated;
  }
  CHECK(concentrated > cfg.m / 2);

  cfg.alpha.assign(4, 1e4);
  const auto dense = tmmsb::sample_network(cfg);
  for (int i = 0; i < cfg.m; ++i)
    for (int k = 0; k < 4; ++k)
      CHECK_THAT(dense.memberships.pi(i, k), WithinAbs(0.25, 0.02));
}

TEST_CASE("fixed_pi bypasses the Dirichlet draw") {
  tmmsb::SimulationConfig cfg;
  cfg.m = 3;
  cfg.n = 5;
  cfg.k = 2;
  cfg.alpha = {0.1, 0.1};
  cfg.b = tmmsb::Matrix(2, 2, 0.6);
  cfg.fixed_pi = tmmsb::Matrix::from_rows({{1.0, 0.0}, {0.3, 0.7}, {0.0, 1.0}});
  cfg.seed = 8;
  const auto sample = tmmsb::sample_network(cfg);
  CHECK(sample.memberships.pi == *cfg.fixed_pi);
}

TEST_CASE("SimulationConfig validation") {
  tmmsb::SimulationConfig cfg;
  cfg.m = 4;
  cfg.n = 2;
  cfg.k = 2;
  cfg.alpha = {0.1, 0.1};
  cfg.b = tmmsb::Matrix(2, 2, 0.5);
  CHECK_NOTHROW(cfg.validate());
  SECTION("m too small") {
    cfg.m = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SECTION("weights must sum to 1") {
    cfg.sender_weights = {0.5, 0.5, 0.5, 0.5};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SECTION("weights must match m") {
    cfg.sender_weights = {1.0};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SECTION("fixed_pi shape") {
    cfg.fixed_pi = tmmsb::Matrix(3, 2, 0.5);
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
}

TEST_CASE("presets cover the published scenario grid") {
  const auto p1 = tmmsb::preset("table1:1");
  CHECK((p1.m == 50 && p1.n == 500 && p1.k == 3));
  CHECK_THAT(p1.alpha[0], WithinAbs(0.05, 1e-15));
  const auto p2 = tmmsb::preset("table1:2");
  CHECK((p2.m == 65 && p2.n == 650 && p2.k == 4));
  const auto p3 = tmmsb::preset("table1:3");
  CHECK((p3.m == 65 && p3.n == 650 && p3.k == 4));
  CHECK_THAT(p3.alpha[0], WithinAbs(0.25, 1e-15));
  CHECK(p3.b == tmmsb::table1_b4());
  const auto p4 = tmmsb::preset("table1:4");
  CHECK((p4.m == 150 && p4.n == 1500 && p4.k == 9));
  const auto pr = tmmsb::preset("reddit-like");
  CHECK((pr.m == 248 && pr.n == 6222 && pr.k == 6));
  CHECK(pr.sender_weights.size() == 248);
  CHECK_THROWS_AS(tmmsb::preset("table1:9"), std::invalid_argument);
}

TEST_CASE("table1:3 uses the published interaction matrix") {
  const auto b = tmmsb::table1_b4();
  CHECK_THAT(b(0, 1), WithinAbs(0.2, 1e-15));
  CHECK_THAT(b(1, 1), WithinAbs(0.3, 1e-15));
  CHECK_THAT(b(1, 2), WithinAbs(0.2, 1e-15));
  CHECK_THAT(b(2, 3), WithinAbs(0.3, 1e-15));
  CHECK_THAT(b(3, 0), WithinAbs(0.1, 1e-15));
  // rows 2 and 3 are identical in the published matrix
  for (int c = 0; c < 4; ++c) CHECK(b(2, c) == b(3, c));
}
