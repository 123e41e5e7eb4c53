#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tmmsb/matrix.hpp"
#include "tmmsb/rng.hpp"
#include "tmmsb/types.hpp"

namespace tmmsb {

enum class LogFormat { kJsonl, kCsv };

inline LogFormat log_format_from_string(const std::string& s) {
  if (s == "jsonl") return LogFormat::kJsonl;
  if (s == "csv") return LogFormat::kCsv;
  throw std::invalid_argument("unknown log format: " + s);
}

inline std::string to_string(LogFormat f) {
  return f == LogFormat::kJsonl ? "jsonl" : "csv";
}

// M x M sender-by-receiver transaction counts; diagonal structurally zero.
struct CountMatrix {
  IntMatrix counts;

  long long total() const {
    long long t = 0;
    for (int v : counts.data) t += v;
    return t;
  }
};

// Binary relation obtained by thresholding counts.
struct SocioMatrix {
  IntMatrix adj;
  int threshold = 1;
};

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& path, int line, const std::string& rule) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + rule);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

// First-appearance-order name interning; a declared roster (header line)
// pins the universe and makes unknown names an error.
struct NameTable {
  std::unordered_map<std::string, int> index;
  std::vector<std::string> names;
  bool closed = false;

  int intern(const std::string& name, const std::string& path, int line) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    if (closed) parse_fail(path, line, "node '" + name + "' not in declared node list");
    const int id = static_cast<int>(names.size());
    index.emplace(name, id);
    names.push_back(name);
    return id;
  }
};

inline void check_name_csv_safe(const std::string& name) {
  if (name.empty() || name.find_first_of(",;\"\n\r#") != std::string::npos)
    throw std::invalid_argument("node name not representable in csv: '" + name + "'");
}

}  // namespace detail

// JSONL: optional first line {"nodes": [...]} declaring the node universe,
// then one {"sender": ..., "recipients": [...], "id"?} object per line.
// CSV: optional "# nodes=a;b;c" comment, then a "sender,recipients" header,
// then "sender,r1;r2" rows. Blank lines are ignored in both.
inline TransactionLog load_log(const std::string& path, LogFormat format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  detail::NameTable nodes;
  TransactionLog log;
  std::string line;
  int line_no = 0;
  bool saw_csv_header = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    if (format == LogFormat::kJsonl) {
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) detail::parse_fail(path, line_no, "malformed json");
      if (!j.is_object()) detail::parse_fail(path, line_no, "expected a json object");
      if (j.contains("nodes")) {
        if (!nodes.names.empty() || !log.transactions.empty())
          detail::parse_fail(path, line_no, "node list must come first");
        for (const auto& v : j.at("nodes")) nodes.intern(v.get<std::string>(), path, line_no);
        nodes.closed = true;
        continue;
      }
      if (!j.contains("sender") || !j.contains("recipients"))
        detail::parse_fail(path, line_no, "missing sender or recipients field");
      const int sender = nodes.intern(j.at("sender").get<std::string>(), path, line_no);
      std::vector<int> recipients;
      for (const auto& v : j.at("recipients"))
        recipients.push_back(nodes.intern(v.get<std::string>(), path, line_no));
      if (recipients.empty()) detail::parse_fail(path, line_no, "empty recipient set");
      for (int r : recipients)
        if (r == sender) detail::parse_fail(path, line_no, "sender listed as recipient");
      log.transactions.emplace_back(sender, std::move(recipients));
    } else {
      if (line[0] == '#') {
        const std::string prefix = "# nodes=";
        if (line.rfind(prefix, 0) == 0) {
          if (!nodes.names.empty() || !log.transactions.empty())
            detail::parse_fail(path, line_no, "node list must come first");
          for (const auto& name : detail::split(line.substr(prefix.size()), ';'))
            nodes.intern(name, path, line_no);
          nodes.closed = true;
        }
        continue;
      }
      if (!saw_csv_header) {
        if (line != "sender,recipients")
          detail::parse_fail(path, line_no, "expected header 'sender,recipients'");
        saw_csv_header = true;
        continue;
      }
      const auto fields = detail::split(line, ',');
      if (fields.size() != 2) detail::parse_fail(path, line_no, "expected 2 columns");
      const int sender = nodes.intern(fields[0], path, line_no);
      std::vector<int> recipients;
      if (!fields[1].empty())
        for (const auto& name : detail::split(fields[1], ';'))
          recipients.push_back(nodes.intern(name, path, line_no));
      if (recipients.empty()) detail::parse_fail(path, line_no, "empty recipient set");
      for (int r : recipients)
        if (r == sender) detail::parse_fail(path, line_no, "sender listed as recipient");
      log.transactions.emplace_back(sender, std::move(recipients));
    }
  }

  log.num_nodes = static_cast<int>(nodes.names.size());
  log.node_labels = std::move(nodes.names);
  log.validate();
  return log;
}

// Always writes the node roster so isolated nodes survive a round trip.
inline void save_log(const TransactionLog& log, const std::string& path, LogFormat format) {
  log.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);

  std::vector<std::string> names(log.num_nodes);
  for (int i = 0; i < log.num_nodes; ++i) names[i] = log.label(i);

  if (format == LogFormat::kJsonl) {
    out << nlohmann::json{{"nodes", names}}.dump() << '\n';
    for (const auto& tr : log.transactions) {
      nlohmann::json j;
      j["sender"] = names[tr.sender];
      auto& rec = j["recipients"] = nlohmann::json::array();
      for (int r : tr.recipients) rec.push_back(names[r]);
      out << j.dump() << '\n';
    }
  } else {
    for (const auto& name : names) detail::check_name_csv_safe(name);
    out << "# nodes=";
    for (int i = 0; i < log.num_nodes; ++i) out << (i ? ";" : "") << names[i];
    out << "\nsender,recipients\n";
    for (const auto& tr : log.transactions) {
      out << names[tr.sender] << ',';
      for (std::size_t i = 0; i < tr.recipients.size(); ++i)
        out << (i ? ";" : "") << names[tr.recipients[i]];
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline CountMatrix to_counts(const TransactionLog& log) {
  CountMatrix out;
  out.counts = IntMatrix(log.num_nodes, log.num_nodes);
  for (const auto& tr : log.transactions)
    for (int r : tr.recipients) out.counts(tr.sender, r) += 1;
  return out;
}

inline SocioMatrix to_socio(const CountMatrix& counts, int threshold) {
  if (threshold < 1) throw std::invalid_argument("to_socio: threshold must be >= 1");
  SocioMatrix out;
  out.threshold = threshold;
  out.adj = IntMatrix(counts.counts.rows, counts.counts.cols);
  for (std::size_t i = 0; i < counts.counts.data.size(); ++i)
    out.adj.data[i] = counts.counts.data[i] >= threshold ? 1 : 0;
  return out;
}

struct HoldoutSplit {
  TransactionLog train;
  TransactionLog test;
  std::vector<int> top_senders;  // node indices eligible to donate test messages
};

// Samples n_test messages uniformly without replacement from those sent by
// the `top_senders` most active nodes (ties on sent count favor the smaller
// node index). Both halves keep the input's relative transaction order.
inline HoldoutSplit holdout_split(const TransactionLog& log, int n_test, int top_senders,
                                  std::uint64_t seed) {
  log.validate();
  if (n_test < 0) throw std::invalid_argument("holdout_split: n_test must be >= 0");
  if (top_senders < 1) throw std::invalid_argument("holdout_split: top_senders must be >= 1");

  std::vector<long long> sent(log.num_nodes, 0);
  for (const auto& tr : log.transactions) sent[tr.sender] += 1;
  std::vector<int> by_activity(log.num_nodes);
  std::iota(by_activity.begin(), by_activity.end(), 0);
  std::sort(by_activity.begin(), by_activity.end(), [&](int a, int b) {
    if (sent[a] != sent[b]) return sent[a] > sent[b];
    return a < b;
  });
  by_activity.resize(std::min<std::size_t>(by_activity.size(), top_senders));
  std::vector<char> eligible_sender(log.num_nodes, 0);
  for (int i : by_activity) eligible_sender[i] = 1;

  std::vector<int> eligible;
  for (int n = 0; n < log.num_transactions(); ++n)
    if (eligible_sender[log.transactions[n].sender]) eligible.push_back(n);
  if (static_cast<int>(eligible.size()) < n_test)
    throw std::runtime_error("holdout_split: only " + std::to_string(eligible.size()) +
                             " eligible messages for n_test=" + std::to_string(n_test));

  Rng rng = Rng(seed).split("holdout");
  for (int i = 0; i < n_test; ++i) {
    const int j = i + static_cast<int>(rng.uniform01() * (eligible.size() - i));
    std::swap(eligible[i], eligible[j]);
  }
  std::vector<char> in_test(log.num_transactions(), 0);
  for (int i = 0; i < n_test; ++i) in_test[eligible[i]] = 1;

  HoldoutSplit out;
  out.top_senders = std::move(by_activity);
  out.train.num_nodes = out.test.num_nodes = log.num_nodes;
  out.train.node_labels = out.test.node_labels = log.node_labels;
  for (int n = 0; n < log.num_transactions(); ++n)
    (in_test[n] ? out.test : out.train).transactions.push_back(log.transactions[n]);
  return out;
}

struct OrderedAdjacency {
  Matrix matrix;                // P A P^T for the permutation below
  std::vector<int> order;       // order[i] = original index shown at row i
  std::vector<int> group_of;    // hard group of each reordered row
  std::vector<int> boundaries;  // cumulative block ends, one per group
};

// Rows sorted by (hard group, descending membership strength, index);
// boundary offsets mark where to draw the block lines.
inline OrderedAdjacency ordered_adjacency(const Matrix& a, const MembershipMatrix& memberships) {
  const int m_count = memberships.num_nodes();
  const int k = memberships.num_groups();
  if (a.rows != m_count || a.cols != m_count)
    throw std::invalid_argument("ordered_adjacency: matrix/membership size mismatch");

  std::vector<int> hard(m_count);
  std::vector<double> strength(m_count);
  for (int i = 0; i < m_count; ++i) {
    const auto row = memberships.pi.row(i);
    int arg = 0;
    for (int kk = 1; kk < k; ++kk)
      if (row[kk] > row[arg]) arg = kk;
    hard[i] = arg;
    strength[i] = row[arg];
  }

  OrderedAdjacency out;
  out.order.resize(m_count);
  std::iota(out.order.begin(), out.order.end(), 0);
  std::sort(out.order.begin(), out.order.end(), [&](int x, int y) {
    if (hard[x] != hard[y]) return hard[x] < hard[y];
    if (strength[x] != strength[y]) return strength[x] > strength[y];
    return x < y;
  });

  out.matrix = Matrix(m_count, m_count);
  out.group_of.resize(m_count);
  for (int i = 0; i < m_count; ++i) {
    out.group_of[i] = hard[out.order[i]];
    for (int j = 0; j < m_count; ++j) out.matrix(i, j) = a(out.order[i], out.order[j]);
  }
  out.boundaries.assign(k, 0);
  for (int i = 0; i < m_count; ++i) out.boundaries[hard[i]] += 1;
  for (int g = 1; g < k; ++g) out.boundaries[g] += out.boundaries[g - 1];
  return out;
}

inline OrderedAdjacency ordered_adjacency(const IntMatrix& a, const MembershipMatrix& memberships) {
  Matrix dbl(a.rows, a.cols);
  for (std::size_t i = 0; i < a.data.size(); ++i) dbl.data[i] = a.data[i];
  return ordered_adjacency(dbl, memberships);
}

inline OrderedAdjacency ordered_adjacency(const CountMatrix& c, const MembershipMatrix& m) {
  return ordered_adjacency(c.counts, m);
}

inline OrderedAdjacency ordered_adjacency(const SocioMatrix& s, const MembershipMatrix& m) {
  return ordered_adjacency(s.adj, m);
}

}  // namespace tmmsb
