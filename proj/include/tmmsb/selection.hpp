#pragma once

#include <stdexcept>
#include <vector>

#include "tmmsb/inference.hpp"
#include "tmmsb/metrics.hpp"
#include "tmmsb/rng.hpp"
#include "tmmsb/types.hpp"

namespace tmmsb {

struct BicRecord {
  int k = 0;
  double log_predictive_likelihood = 0.0;
  double bic = 0.0;
  bool converged = false;
};

struct BicReport {
  std::vector<BicRecord> records;
  int best_k = 0;
};

// Fits every K in the range and scores it by BIC on the training log.
// Each fit gets its own seed derived from (config.seed, K), so the scan is
// deterministic yet fits are decorrelated; ties prefer the smaller K.
// Non-converged fits are flagged but still scored.
inline BicReport select_k(const TransactionLog& log, const std::vector<int>& k_range,
                          const FitConfig& config) {
  if (k_range.empty()) throw std::invalid_argument("select_k: empty k range");
  const long long total = log.total_recipients();
  BicReport report;
  for (int k : k_range) {
    FitConfig c = config;
    c.k = k;
    c.seed = derive_seed(config.seed, "select-k", static_cast<std::uint64_t>(k));
    FittedModel model = fit(log, c);
    BicRecord rec;
    rec.k = k;
    rec.converged = model.converged;
    rec.log_predictive_likelihood = predictive_log_likelihood(model, log);
    rec.bic = bic(rec.log_predictive_likelihood, k, total);
    report.records.push_back(rec);
  }
  report.best_k = report.records.front().k;
  double best = report.records.front().bic;
  for (const auto& rec : report.records)
    if (rec.bic > best || (rec.bic == best && rec.k < report.best_k)) {
      best = rec.bic;
      report.best_k = rec.k;
    }
  return report;
}

}  // namespace tmmsb
