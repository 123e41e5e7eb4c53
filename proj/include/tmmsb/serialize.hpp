#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tmmsb/data_io.hpp"
#include "tmmsb/inference.hpp"
#include "tmmsb/metrics.hpp"
#include "tmmsb/rng.hpp"
#include "tmmsb/selection.hpp"
#include "tmmsb/types.hpp"

namespace tmmsb {

using json = nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols; ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j) {
  Matrix m;
  m.rows = static_cast<int>(j.size());
  m.cols = m.rows > 0 ? static_cast<int>(j.front().size()) : 0;
  m.data.reserve(static_cast<std::size_t>(m.rows) * m.cols);
  for (const auto& row : j) {
    if (static_cast<int>(row.size()) != m.cols)
      throw std::runtime_error("matrix json: ragged rows");
    for (const auto& v : row) m.data.push_back(v.get<double>());
  }
  return m;
}

// Shortest round-trip decimal for doubles in CSV output.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_matrix_csv(const std::string& path, const Matrix& m,
                             const std::vector<std::string>& row_labels = {}) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (int i = 0; i < m.rows; ++i) {
    if (!row_labels.empty()) out << row_labels[i] << ',';
    for (int j = 0; j < m.cols; ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

inline void write_matrix_csv(const std::string& path, const IntMatrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

inline Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> data;
  std::string line;
  int rows = 0, cols = -1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split(line, ',');
    if (cols < 0) cols = static_cast<int>(fields.size());
    if (static_cast<int>(fields.size()) != cols)
      throw std::runtime_error(path + ": ragged csv row " + std::to_string(rows + 1));
    for (const auto& f : fields) data.push_back(std::stod(f));
    ++rows;
  }
  Matrix m(rows, cols < 0 ? 0 : cols);
  m.data = std::move(data);
  return m;
}

inline void write_trace_csv(const std::string& path, const std::vector<double>& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "outer_iteration,elbo\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    out << i << ',' << format_double(trace[i]) << '\n';
}

inline json fit_config_to_json(const FitConfig& c) {
  return json{{"k", c.k},
              {"alpha_value", c.alpha_value},
              {"max_outer_iters", c.max_outer_iters},
              {"max_inner_iters", c.max_inner_iters},
              {"rel_tol", c.rel_tol},
              {"init", to_string(c.init)},
              {"jitter_scale", c.jitter_scale},
              {"seed", c.seed},
              {"threads", c.threads},
              {"clamp_eps", c.clamp_eps}};
}

inline FitConfig fit_config_from_json(const json& j) {
  FitConfig c;
  c.k = j.value("k", c.k);
  c.alpha_value = j.value("alpha_value", c.alpha_value);
  c.max_outer_iters = j.value("max_outer_iters", c.max_outer_iters);
  c.max_inner_iters = j.value("max_inner_iters", c.max_inner_iters);
  c.rel_tol = j.value("rel_tol", c.rel_tol);
  if (j.contains("init")) c.init = init_scheme_from_string(j.at("init").get<std::string>());
  c.jitter_scale = j.value("jitter_scale", c.jitter_scale);
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  c.clamp_eps = j.value("clamp_eps", c.clamp_eps);
  return c;
}

// Fitted models serialize without phi (N x M x K is bulky and every report
// downstream needs only pi, gamma and B). Baseline "models" reuse the same
// schema with kind = "baseline-hierarchical" and hard labels attached.
inline json model_to_json(const FittedModel& model, const std::string& kind = "tmmsb") {
  json j;
  j["kind"] = kind;
  j["k"] = model.params.k;
  j["alpha"] = model.params.alpha;
  j["b"] = matrix_to_json(model.params.b);
  j["pi"] = matrix_to_json(model.memberships.pi);
  if (model.state.gamma.rows > 0) j["gamma"] = matrix_to_json(model.state.gamma);
  j["trace"] = model.trace;
  j["converged"] = model.converged;
  j["iterations"] = model.iterations;
  j["seed"] = model.seed;
  j["config"] = fit_config_to_json(model.config);
  json cells = json::array();
  for (const auto& [a, b] : model.b_empty_cells) cells.push_back(json::array({a, b}));
  j["b_empty_cells"] = std::move(cells);
  return j;
}

inline FittedModel model_from_json(const json& j) {
  FittedModel model;
  model.params.k = j.at("k").get<int>();
  model.params.b = matrix_from_json(j.at("b"));
  if (j.contains("alpha"))
    model.params.alpha = j.at("alpha").get<std::vector<double>>();
  else
    model.params.alpha.assign(model.params.k, 0.1);
  model.memberships = MembershipMatrix(matrix_from_json(j.at("pi")));
  if (j.contains("gamma")) model.state.gamma = matrix_from_json(j.at("gamma"));
  model.state.b = model.params.b;
  if (j.contains("trace")) model.trace = j.at("trace").get<std::vector<double>>();
  model.converged = j.value("converged", true);
  model.iterations = j.value("iterations", 0);
  model.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("config")) model.config = fit_config_from_json(j.at("config"));
  model.config.k = model.params.k;
  if (j.contains("b_empty_cells"))
    for (const auto& cell : j.at("b_empty_cells"))
      model.b_empty_cells.emplace_back(cell.at(0).get<int>(), cell.at(1).get<int>());
  return model;
}

inline void save_model(const FittedModel& model, const std::string& path,
                       const std::string& kind = "tmmsb") {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << model_to_json(model, kind).dump(2) << '\n';
}

inline FittedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error(path + ": malformed json");
  return model_from_json(j);
}

inline json bic_report_to_json(const BicReport& report) {
  json records = json::array();
  for (const auto& r : report.records)
    records.push_back(json{{"k", r.k},
                           {"log_predictive_likelihood", r.log_predictive_likelihood},
                           {"bic", r.bic},
                           {"converged", r.converged}});
  return json{{"records", std::move(records)}, {"best_k", report.best_k}};
}

inline BicReport bic_report_from_json(const json& j) {
  BicReport report;
  report.best_k = j.at("best_k").get<int>();
  for (const auto& r : j.at("records")) {
    BicRecord rec;
    rec.k = r.at("k").get<int>();
    rec.log_predictive_likelihood = r.at("log_predictive_likelihood").get<double>();
    rec.bic = r.at("bic").get<double>();
    rec.converged = r.value("converged", true);
    report.records.push_back(rec);
  }
  return report;
}

struct EvalReport {
  std::optional<SoftClusterScore> clustering;
  std::optional<double> mean_rank_at_full_recall;
  std::optional<double> heldout_log_likelihood;
  std::string model_kind;

  json to_json() const {
    json j;
    j["model_kind"] = model_kind;
    if (clustering)
      j["clustering"] = json{{"precision", clustering->precision},
                             {"recall", clustering->recall},
                             {"f_measure", clustering->f_measure}};
    if (mean_rank_at_full_recall) j["mean_rank_at_full_recall"] = *mean_rank_at_full_recall;
    if (heldout_log_likelihood) j["heldout_log_likelihood"] = *heldout_log_likelihood;
    return j;
  }
};

inline std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint64_t h = 14695981039346656037ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (got < static_cast<std::streamsize>(sizeof(buf))) break;
  }
  return h;
}

inline std::string hash_file_hex(const std::string& path) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash_file(path)));
  return buf;
}

struct RunManifest {
  std::string subcommand;
  std::vector<std::string> command_line;
  json config;  // resolved flag values
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;  // paths; hashes computed at save time
  double duration_seconds = 0.0;

  void save(const std::string& path) const {
    json j;
    j["subcommand"] = subcommand;
    j["command_line"] = command_line;
    j["config"] = config;
    j["seed"] = seed;
    j["inputs"] = inputs;
    json outs = json::array();
    for (const auto& p : outputs) outs.push_back(json{{"path", p}, {"fnv1a64", hash_file_hex(p)}});
    j["outputs"] = std::move(outs);
    j["duration_seconds"] = duration_seconds;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
  }
};

}  // namespace tmmsb
