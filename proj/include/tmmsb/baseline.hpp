#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tmmsb/data_io.hpp"
#include "tmmsb/math.hpp"
#include "tmmsb/matrix.hpp"
#include "tmmsb/types.hpp"

namespace tmmsb {

struct BaselineResult {
  std::vector<int> labels;  // one group index per node, 0..k-1
  Matrix crude_b;
};

// Average-linkage agglomerative clustering of nodes by Euclidean distance
// between rows of counts + counts^T, cut at k clusters. All ties (equal
// inter-cluster distances, identical rows) break toward smaller indices.
// Labels are numbered by each cluster's smallest member.
inline std::vector<int> cluster_counts(const CountMatrix& counts, int k) {
  const int m = counts.counts.rows;
  if (k < 1 || k > m) throw std::invalid_argument("cluster_counts: need 1 <= k <= M");

  Matrix sym(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) sym(i, j) = counts.counts(i, j) + counts.counts(j, i);

  Matrix dist(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      double s = 0.0;
      for (int c = 0; c < m; ++c) {
        const double d = sym(i, c) - sym(j, c);
        s += d * d;
      }
      dist(i, j) = dist(j, i) = std::sqrt(s);
    }

  std::vector<char> active(m, 1);
  std::vector<int> size(m, 1);
  std::vector<std::vector<int>> members(m);
  for (int i = 0; i < m; ++i) members[i] = {i};

  for (int remaining = m; remaining > k; --remaining) {
    double best = std::numeric_limits<double>::infinity();
    int bi = -1, bj = -1;
    for (int i = 0; i < m; ++i) {
      if (!active[i]) continue;
      for (int j = i + 1; j < m; ++j) {
        if (!active[j]) continue;
        if (dist(i, j) < best) {
          best = dist(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    // Lance-Williams update for average linkage; merged cluster keeps bi.
    for (int c = 0; c < m; ++c) {
      if (!active[c] || c == bi || c == bj) continue;
      const double d = (size[bi] * dist(bi, c) + size[bj] * dist(bj, c)) /
                       (size[bi] + size[bj]);
      dist(bi, c) = dist(c, bi) = d;
    }
    active[bj] = 0;
    size[bi] += size[bj];
    members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
    members[bj].clear();
  }

  std::vector<int> labels(m, -1);
  int next = 0;
  for (int i = 0; i < m; ++i) {
    if (!active[i]) continue;
    for (int node : members[i]) labels[node] = next;
    ++next;
  }
  return labels;
}

// Hard-label analogue of the empirical Bayes B update: observed k->l
// receipts over exposed k->l sender-receiver pairs, same clamping as the
// soft estimator.
inline Matrix crude_b(const TransactionLog& log, std::span<const int> labels, int k,
                      double clamp_eps = 1e-9) {
  if (static_cast<int>(labels.size()) != log.num_nodes)
    throw std::invalid_argument("crude_b: labels size must match num_nodes");
  std::vector<long long> group_size(k, 0);
  for (int lab : labels) {
    if (lab < 0 || lab >= k) throw std::invalid_argument("crude_b: label out of range");
    group_size[lab] += 1;
  }

  Matrix num(k, k), den(k, k);
  for (const auto& tr : log.transactions) {
    const int ks = labels[tr.sender];
    for (int l = 0; l < k; ++l) {
      double exposed = static_cast<double>(group_size[l]);
      if (l == ks) exposed -= 1.0;  // sender cannot receive
      den(ks, l) += exposed;
    }
    for (int r : tr.recipients) num(ks, labels[r]) += 1.0;
  }

  Matrix out(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      out(a, b) = den(a, b) > 0.0 ? clamp_probability(num(a, b) / den(a, b), clamp_eps)
                                  : clamp_eps;
  return out;
}

inline BaselineResult baseline_hierarchical(const TransactionLog& log, int k,
                                            double clamp_eps = 1e-9) {
  BaselineResult out;
  out.labels = cluster_counts(to_counts(log), k);
  out.crude_b = crude_b(log, out.labels, k, clamp_eps);
  return out;
}

}  // namespace tmmsb
