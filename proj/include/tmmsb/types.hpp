#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmmsb/matrix.hpp"

namespace tmmsb {

// One one-to-many communication event: a sender plus a non-empty recipient
// set. Recipients are kept sorted and unique.
struct Transaction {
  int sender = 0;
  std::vector<int> recipients;

  Transaction() = default;
  Transaction(int s, std::vector<int> r) : sender(s), recipients(std::move(r)) {
    normalize();
  }

  void normalize() {
    std::sort(recipients.begin(), recipients.end());
    recipients.erase(std::unique(recipients.begin(), recipients.end()), recipients.end());
  }

  bool is_recipient(int node) const {
    return std::binary_search(recipients.begin(), recipients.end(), node);
  }

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

struct TransactionLog {
  int num_nodes = 0;
  std::vector<Transaction> transactions;
  std::vector<std::string> node_labels;  // optional; empty or size num_nodes

  int num_transactions() const { return static_cast<int>(transactions.size()); }

  // total recipient slots |Y|
  long long total_recipients() const {
    long long t = 0;
    for (const auto& tr : transactions) t += static_cast<long long>(tr.recipients.size());
    return t;
  }

  std::string label(int node) const {
    return node_labels.empty() ? std::to_string(node) : node_labels[node];
  }

  void validate(bool for_inference = false) const {
    if (num_nodes < 2) throw std::invalid_argument("TransactionLog: need at least 2 nodes");
    if (!node_labels.empty() && static_cast<int>(node_labels.size()) != num_nodes)
      throw std::invalid_argument("TransactionLog: node_labels size must match num_nodes");
    if (for_inference && transactions.empty())
      throw std::invalid_argument("TransactionLog: need at least 1 transaction");
    for (std::size_t n = 0; n < transactions.size(); ++n) {
      const auto& tr = transactions[n];
      if (tr.sender < 0 || tr.sender >= num_nodes)
        throw std::invalid_argument("TransactionLog: transaction " + std::to_string(n) +
                                    ": sender out of range");
      if (tr.recipients.empty())
        throw std::invalid_argument("TransactionLog: transaction " + std::to_string(n) +
                                    ": empty recipient set");
      for (int r : tr.recipients) {
        if (r < 0 || r >= num_nodes)
          throw std::invalid_argument("TransactionLog: transaction " + std::to_string(n) +
                                      ": recipient out of range");
        if (r == tr.sender)
          throw std::invalid_argument("TransactionLog: transaction " + std::to_string(n) +
                                      ": sender listed as recipient");
      }
    }
  }

  friend bool operator==(const TransactionLog&, const TransactionLog&) = default;
};

// Group count, interaction matrix B and Dirichlet hyperparameter alpha.
struct ModelParams {
  int k = 0;
  Matrix b;                   // K x K, entries in [0, 1]
  std::vector<double> alpha;  // K positive reals

  void validate() const {
    if (k < 1) throw std::invalid_argument("ModelParams: k must be >= 1");
    if (b.rows != k || b.cols != k) throw std::invalid_argument("ModelParams: b must be k x k");
    for (double v : b.data)
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("ModelParams: b entries must lie in [0, 1]");
    if (static_cast<int>(alpha.size()) != k)
      throw std::invalid_argument("ModelParams: alpha must have k entries");
    for (double a : alpha)
      if (!(a > 0.0)) throw std::invalid_argument("ModelParams: alpha entries must be positive");
  }
};

// Per-node mixed-membership probability vectors, one row per node.
struct MembershipMatrix {
  Matrix pi;  // M x K, rows sum to 1

  MembershipMatrix() = default;
  explicit MembershipMatrix(Matrix m) : pi(std::move(m)) {}

  int num_nodes() const { return pi.rows; }
  int num_groups() const { return pi.cols; }

  void validate(double tol = 1e-9) const {
    for (int i = 0; i < pi.rows; ++i) {
      double total = 0.0;
      for (int kk = 0; kk < pi.cols; ++kk) {
        if (!(pi(i, kk) >= 0.0))
          throw std::invalid_argument("MembershipMatrix: negative entry in row " +
                                      std::to_string(i));
        total += pi(i, kk);
      }
      if (std::abs(total - 1.0) > tol)
        throw std::invalid_argument("MembershipMatrix: row " + std::to_string(i) +
                                    " does not sum to 1");
    }
  }
};

inline MembershipMatrix one_hot_memberships(std::span<const int> labels, int k) {
  Matrix pi(static_cast<int>(labels.size()), k);
  for (std::size_t i = 0; i < labels.size(); ++i) pi(static_cast<int>(i), labels[i]) = 1.0;
  return MembershipMatrix(std::move(pi));
}

}  // namespace tmmsb
