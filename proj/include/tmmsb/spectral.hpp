#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tmmsb/data_io.hpp"
#include "tmmsb/matrix.hpp"
#include "tmmsb/rng.hpp"
#include "tmmsb/types.hpp"

namespace tmmsb {

struct SpectralResult {
  std::vector<int> labels;  // one group index per node, 0..k-1
  Matrix embedding;         // M x k spectral coordinates, rows unit (or zero) norm
};

namespace detail {

// Leading-k eigenvectors of W by subspace iteration with modified
// Gram-Schmidt. W must be symmetric with non-negative spectrum shift (the
// caller adds +I) so the dominant subspace is also the algebraically largest.
inline Matrix subspace_iteration(const Matrix& w, int k, Rng rng) {
  const int m = w.rows;
  Matrix x(m, k);
  for (double& v : x.data) v = rng.normal();

  std::vector<double> theta(k, 0.0), prev_theta(k, 0.0);
  Matrix y(m, k);
  for (int iter = 0; iter < 300; ++iter) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < k; ++j) {
        double s = 0.0;
        for (int c = 0; c < m; ++c) s += w(i, c) * x(c, j);
        y(i, j) = s;
      }
    // Rayleigh quotients before orthonormalization: theta_j = x_j^T W x_j.
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += x(i, j) * y(i, j);
      theta[j] = s;
    }
    for (int j = 0; j < k; ++j) {
      for (int p = 0; p < j; ++p) {
        double dot = 0.0;
        for (int i = 0; i < m; ++i) dot += y(i, p) * y(i, j);
        for (int i = 0; i < m; ++i) y(i, j) -= dot * y(i, p);
      }
      double norm = 0.0;
      for (int i = 0; i < m; ++i) norm += y(i, j) * y(i, j);
      norm = std::sqrt(norm);
      if (norm < 1e-300) {
        // Degenerate direction; restart it from a deterministic basis vector.
        for (int i = 0; i < m; ++i) y(i, j) = i == j % m ? 1.0 : 0.0;
        for (int p = 0; p < j; ++p) {
          double dot = 0.0;
          for (int i = 0; i < m; ++i) dot += y(i, p) * y(i, j);
          for (int i = 0; i < m; ++i) y(i, j) -= dot * y(i, p);
        }
        norm = 0.0;
        for (int i = 0; i < m; ++i) norm += y(i, j) * y(i, j);
        norm = std::max(std::sqrt(norm), 1e-300);
      }
      for (int i = 0; i < m; ++i) y(i, j) /= norm;
    }
    std::swap(x, y);

    double drift = 0.0;
    for (int j = 0; j < k; ++j)
      drift = std::max(drift, std::abs(theta[j] - prev_theta[j]) /
                                  std::max(1.0, std::abs(theta[j])));
    if (iter > 1 && drift < 1e-12) break;
    prev_theta = theta;
  }
  return x;
}

// k-means++ seeding then Lloyd iterations; all ties break toward smaller
// indices, empty clusters are repaired with the farthest point of the
// largest-residual cluster, so the outcome is deterministic in (rows, seed).
inline std::vector<int> kmeans_rows(const Matrix& rows, int k, Rng rng) {
  const int m = rows.rows, d = rows.cols;
  const auto dist2 = [&](int i, const std::vector<double>& c) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
      const double diff = rows(i, j) - c[j];
      s += diff * diff;
    }
    return s;
  };

  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  {
    const int first = std::min(m - 1, static_cast<int>(rng.uniform01() * m));
    std::vector<double> c(d);
    for (int j = 0; j < d; ++j) c[j] = rows(first, j);
    centroids.push_back(std::move(c));
  }
  std::vector<double> best_d2(m);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      double b = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) b = std::min(b, dist2(i, c));
      best_d2[i] = b;
      total += b;
    }
    int pick;
    if (total > 0.0) {
      pick = rng.categorical(best_d2);
    } else {
      // All points coincide with centroids; take the smallest unused index.
      pick = static_cast<int>(centroids.size()) % m;
    }
    std::vector<double> c(d);
    for (int j = 0; j < d; ++j) c[j] = rows(pick, j);
    centroids.push_back(std::move(c));
  }

  std::vector<int> assign(m, -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (int i = 0; i < m; ++i) {
      int arg = 0;
      double best = dist2(i, centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double v = dist2(i, centroids[c]);
        if (v < best) {
          best = v;
          arg = c;
        }
      }
      if (assign[i] != arg) {
        assign[i] = arg;
        changed = true;
      }
    }

    std::vector<int> count(k, 0);
    for (int i = 0; i < m; ++i) ++count[assign[i]];
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) continue;
      // Move the point farthest from its centroid in any multi-member cluster.
      int worst = -1;
      double worst_d = -1.0;
      for (int i = 0; i < m; ++i) {
        if (count[assign[i]] < 2) continue;
        const double v = dist2(i, centroids[assign[i]]);
        if (v > worst_d) {
          worst_d = v;
          worst = i;
        }
      }
      if (worst < 0) break;  // fewer distinct points than clusters
      --count[assign[worst]];
      assign[worst] = c;
      ++count[c];
      changed = true;
    }

    for (int c = 0; c < k; ++c) {
      if (count[c] == 0) continue;
      for (int j = 0; j < d; ++j) centroids[c][j] = 0.0;
    }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < d; ++j) centroids[assign[i]][j] += rows(i, j);
    for (int c = 0; c < k; ++c)
      if (count[c] > 0)
        for (int j = 0; j < d; ++j) centroids[c][j] /= count[c];

    if (!changed) break;
  }
  return assign;
}

}  // namespace detail

// Spectral clustering of nodes: symmetrized counts are degree-normalized,
// the leading-k eigenvector rows (unit-normalized) are clustered with
// k-means. Far more robust than the agglomerative baseline when groups are
// defined by interaction *patterns* rather than raw volume. Labels are
// numbered by each cluster's smallest member, matching cluster_counts.
inline SpectralResult spectral_clusters(const CountMatrix& counts, int k, std::uint64_t seed) {
  const int m = counts.counts.rows;
  if (k < 1 || k > m) throw std::invalid_argument("spectral_clusters: need 1 <= k <= M");

  Matrix w(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) w(i, j) = counts.counts(i, j) + counts.counts(j, i);

  std::vector<double> inv_sqrt_deg(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double deg = 0.0;
    for (int j = 0; j < m; ++j) deg += w(i, j);
    if (deg > 0.0) inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
  }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) w(i, j) *= inv_sqrt_deg[i] * inv_sqrt_deg[j];
  // +I shifts the spectrum into [0, 2]: the dominant subspace of the shifted
  // operator is the algebraically-largest one of the original.
  for (int i = 0; i < m; ++i) w(i, i) += 1.0;

  Rng rng(seed);
  SpectralResult out;
  out.embedding = detail::subspace_iteration(w, k, rng.split("eigs"));
  for (int i = 0; i < m; ++i) {
    double norm = 0.0;
    for (int j = 0; j < k; ++j) norm += out.embedding(i, j) * out.embedding(i, j);
    norm = std::sqrt(norm);
    // Rows orthogonal to the selected subspace (isolated nodes) carry only
    // iteration residue; normalizing those would manufacture a noise
    // direction. The Rayleigh early-out leaves ~sqrt(drift_tol) = 1e-6 of
    // residue, while genuine rows hold >= 1/sqrt(volume) of an eigenvector.
    if (norm > 1e-4)
      for (int j = 0; j < k; ++j) out.embedding(i, j) /= norm;
    else
      for (int j = 0; j < k; ++j) out.embedding(i, j) = 0.0;
  }

  const std::vector<int> raw = detail::kmeans_rows(out.embedding, k, rng.split("kmeans"));

  // renumber by smallest member
  std::vector<int> first_seen(k, -1);
  int next = 0;
  out.labels.assign(m, -1);
  for (int i = 0; i < m; ++i) {
    if (first_seen[raw[i]] < 0) first_seen[raw[i]] = next++;
    out.labels[i] = first_seen[raw[i]];
  }
  return out;
}

inline SpectralResult spectral_clusters(const TransactionLog& log, int k, std::uint64_t seed) {
  return spectral_clusters(to_counts(log), k, seed);
}

}  // namespace tmmsb
