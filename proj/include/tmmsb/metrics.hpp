#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tmmsb/inference.hpp"
#include "tmmsb/math.hpp"
#include "tmmsb/matrix.hpp"
#include "tmmsb/types.hpp"

namespace tmmsb {

// p_ij = pi_i B pi_j^T, the marginal probability that a message from i
// reaches j; clamped like every Bernoulli probability in the model.
inline Matrix receive_probability_matrix(const MembershipMatrix& memberships, const Matrix& b,
                                         double clamp_eps = kProbClampEps) {
  const int m_count = memberships.num_nodes();
  const int k = memberships.num_groups();
  if (b.rows != k || b.cols != k)
    throw std::invalid_argument("receive_probability_matrix: b must be K x K");
  Matrix w(m_count, k);  // w = pi * B
  for (int i = 0; i < m_count; ++i)
    for (int l = 0; l < k; ++l) {
      double s = 0.0;
      for (int a = 0; a < k; ++a) s += memberships.pi(i, a) * b(a, l);
      w(i, l) = s;
    }
  Matrix p(m_count, m_count);
  for (int i = 0; i < m_count; ++i)
    for (int j = 0; j < m_count; ++j) {
      if (i == j) continue;
      double s = 0.0;
      for (int l = 0; l < k; ++l) s += w(i, l) * memberships.pi(j, l);
      p(i, j) = clamp_probability(s, clamp_eps);
    }
  return p;
}

// Receiving-term log likelihood: each transaction is M-1 Bernoulli trials
// with success probabilities p_{S_n j}.
inline double predictive_log_likelihood(const MembershipMatrix& pi, const Matrix& b,
                                        const TransactionLog& log,
                                        double clamp_eps = kProbClampEps) {
  if (pi.num_nodes() != log.num_nodes)
    throw std::invalid_argument("predictive_log_likelihood: node count mismatch");
  const Matrix p = receive_probability_matrix(pi, b, clamp_eps);
  const int m_count = log.num_nodes;
  long double total = 0.0L;
  for (const auto& tr : log.transactions) {
    long double acc = 0.0L;
    for (int j = 0; j < m_count; ++j) {
      if (j == tr.sender) continue;
      acc += std::log1p(-p(tr.sender, j));
    }
    for (int r : tr.recipients)
      acc += std::log(p(tr.sender, r)) - std::log1p(-p(tr.sender, r));
    total += acc;
  }
  return static_cast<double>(total);
}

inline double predictive_log_likelihood(const FittedModel& model, const TransactionLog& log) {
  return predictive_log_likelihood(model.memberships, model.params.b, log,
                                   model.config.clamp_eps);
}

// BIC = 2 log L - (K^2 + K) log |Y|, natural log, |Y| = total recipients.
inline double bic(double log_l, int k, long long total_recipients) {
  if (k < 1) throw std::invalid_argument("bic: k must be >= 1");
  if (total_recipients < 1) throw std::invalid_argument("bic: total_recipients must be >= 1");
  return 2.0 * log_l - (static_cast<double>(k) * k + k) *
                           std::log(static_cast<double>(total_recipients));
}

struct SoftClusterScore {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
};

// BCubed extended to soft (or overlapping binary) memberships. Rows need not
// sum to 1 -- indicator matrices with multiple clusters per node are legal --
// but an all-zero row is not. Ordered node pairs including self-pairs; pairs
// with a zero dot product drop out of the respective average.
inline SoftClusterScore soft_bcubed(const MembershipMatrix& estimated,
                                    const MembershipMatrix& truth) {
  const int m_count = estimated.num_nodes();
  if (truth.num_nodes() != m_count)
    throw std::invalid_argument("soft_bcubed: node count mismatch");
  const auto check = [](const Matrix& pi, const char* side) {
    for (int i = 0; i < pi.rows; ++i) {
      double total = 0.0;
      for (int kk = 0; kk < pi.cols; ++kk) {
        if (!(pi(i, kk) >= 0.0))
          throw std::invalid_argument(std::string("soft_bcubed: negative entry in ") + side);
        total += pi(i, kk);
      }
      if (total == 0.0)
        throw std::invalid_argument(std::string("soft_bcubed: all-zero row in ") + side);
    }
  };
  check(estimated.pi, "estimated");
  check(truth.pi, "truth");

  long double prec_sum = 0.0L, rec_sum = 0.0L;
  long long prec_n = 0, rec_n = 0;
  for (int e = 0; e < m_count; ++e)
    for (int f = 0; f < m_count; ++f) {
      double est_dot = 0.0, tru_dot = 0.0;
      for (int kk = 0; kk < estimated.pi.cols; ++kk)
        est_dot += estimated.pi(e, kk) * estimated.pi(f, kk);
      for (int kk = 0; kk < truth.pi.cols; ++kk)
        tru_dot += truth.pi(e, kk) * truth.pi(f, kk);
      const double lo = std::min(est_dot, tru_dot);
      if (est_dot > 0.0) {
        prec_sum += lo / est_dot;
        ++prec_n;
      }
      if (tru_dot > 0.0) {
        rec_sum += lo / tru_dot;
        ++rec_n;
      }
    }

  SoftClusterScore out;
  out.precision = prec_n ? static_cast<double>(prec_sum / prec_n) : 0.0;
  out.recall = rec_n ? static_cast<double>(rec_sum / rec_n) : 0.0;
  out.f_measure = (out.precision + out.recall) > 0.0
                      ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                      : 0.0;
  return out;
}

// Mean over messages of the rank of the worst-ranked true recipient, ranking
// all j != sender by descending p_{S_n j}. Ties get the worst rank in the
// tie block, so rank(j) = #{j' != S : p_j' >= p_j}.
inline double rank_at_full_recall(const MembershipMatrix& pi, const Matrix& b,
                                  const TransactionLog& heldout,
                                  double clamp_eps = kProbClampEps) {
  heldout.validate(/*for_inference=*/true);
  if (pi.num_nodes() != heldout.num_nodes)
    throw std::invalid_argument("rank_at_full_recall: node count mismatch");
  const Matrix p = receive_probability_matrix(pi, b, clamp_eps);
  const int m_count = heldout.num_nodes;
  long double total = 0.0L;
  for (const auto& tr : heldout.transactions) {
    int worst = 0;
    for (int r : tr.recipients) {
      const double pr = p(tr.sender, r);
      int rank = 0;
      for (int j = 0; j < m_count; ++j) {
        if (j == tr.sender) continue;
        if (p(tr.sender, j) >= pr) ++rank;
      }
      worst = std::max(worst, rank);
    }
    total += worst;
  }
  return static_cast<double>(total / heldout.num_transactions());
}

inline double rank_at_full_recall(const FittedModel& model, const TransactionLog& heldout) {
  return rank_at_full_recall(model.memberships, model.params.b, heldout,
                             model.config.clamp_eps);
}

struct GroupSummary {
  std::optional<double> n_sent;  // expected messages sent per member
  std::optional<double> n_recv;  // expected receipts per member
  double expected_size = 0.0;    // E(m_k) = sum_i pi_ik
  int hard_size = 0;             // #{i : argmax_k pi_i = k}
};

struct GroupSummaries {
  std::vector<GroupSummary> groups;
  Matrix weighted_b;  // column j of B scaled by E(m_j)
};

inline GroupSummaries group_summaries(const MembershipMatrix& pi, const Matrix& b,
                                      const TransactionLog& log) {
  if (pi.num_nodes() != log.num_nodes)
    throw std::invalid_argument("group_summaries: node count mismatch");
  const int m_count = log.num_nodes;
  const int k = pi.num_groups();

  std::vector<double> sent(m_count, 0.0), recv(m_count, 0.0);
  for (const auto& tr : log.transactions) {
    sent[tr.sender] += 1.0;
    for (int r : tr.recipients) recv[r] += 1.0;
  }

  GroupSummaries out;
  out.groups.resize(k);
  for (int kk = 0; kk < k; ++kk) {
    double size = 0.0, sent_w = 0.0, recv_w = 0.0;
    for (int i = 0; i < m_count; ++i) {
      size += pi.pi(i, kk);
      sent_w += pi.pi(i, kk) * sent[i];
      recv_w += pi.pi(i, kk) * recv[i];
    }
    out.groups[kk].expected_size = size;
    if (size > 0.0) {
      out.groups[kk].n_sent = sent_w / size;
      out.groups[kk].n_recv = recv_w / size;
    }
  }
  for (int i = 0; i < m_count; ++i) {
    int arg = 0;
    for (int kk = 1; kk < k; ++kk)
      if (pi.pi(i, kk) > pi.pi(i, arg)) arg = kk;
    out.groups[arg].hard_size += 1;
  }
  out.weighted_b = Matrix(k, k);
  for (int a = 0; a < k; ++a)
    for (int c = 0; c < k; ++c)
      out.weighted_b(a, c) = b(a, c) * out.groups[c].expected_size;
  return out;
}

inline GroupSummaries group_summaries(const FittedModel& model, const TransactionLog& log) {
  return group_summaries(model.memberships, model.params.b, log);
}

// Expected message frequencies: entry (i,j) = (messages sent by i) * p_ij.
inline Matrix predicted_frequency_matrix(const MembershipMatrix& pi, const Matrix& b,
                                         const TransactionLog& log,
                                         double clamp_eps = kProbClampEps) {
  if (pi.num_nodes() != log.num_nodes)
    throw std::invalid_argument("predicted_frequency_matrix: node count mismatch");
  const Matrix p = receive_probability_matrix(pi, b, clamp_eps);
  const int m_count = log.num_nodes;
  std::vector<double> sent(m_count, 0.0);
  for (const auto& tr : log.transactions) sent[tr.sender] += 1.0;
  Matrix out(m_count, m_count);
  for (int i = 0; i < m_count; ++i)
    for (int j = 0; j < m_count; ++j)
      if (i != j) out(i, j) = sent[i] * p(i, j);
  return out;
}

inline Matrix predicted_frequency_matrix(const FittedModel& model, const TransactionLog& log) {
  return predicted_frequency_matrix(model.memberships, model.params.b, log,
                                    model.config.clamp_eps);
}

}  // namespace tmmsb
