// Command-line front end: simulation, fitting, model selection, evaluation,
// summaries, holdout splits, matrix reductions, the hierarchical baseline,
// and the scaling bench. Every run drops a manifest.json into --out-dir.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tmmsb/tmmsb.hpp"

namespace fs = std::filesystem;
using namespace tmmsb;

namespace {

struct CommonArgs {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string format = "jsonl";
  int threads = 1;
};

void add_common(CLI::App* sub, CommonArgs& c) {
  sub->add_option("--seed", c.seed, "Base RNG seed");
  sub->add_option("--out-dir", c.out_dir, "Output directory (created if missing)");
  sub->add_option("--format", c.format, "Transaction-log output format")
      ->check(CLI::IsMember({"jsonl", "csv"}));
  sub->add_option("--threads", c.threads, "Worker threads for the E-step")
      ->envname("TMMSB_THREADS")
      ->check(CLI::PositiveNumber);
}

LogFormat infer_format(const std::string& path, const std::string& fallback) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") return LogFormat::kCsv;
  if (path.size() > 6 && path.substr(path.size() - 6) == ".jsonl") return LogFormat::kJsonl;
  return log_format_from_string(fallback);
}

// Rows separated by ';', entries by ','; "0.3,0.02;0.02,0.25" is 2x2.
Matrix parse_b_matrix(const std::string& spec) {
  Matrix b;
  std::vector<double> data;
  int cols = -1, rows = 0;
  for (const auto& row : tmmsb::detail::split(spec, ';')) {
    const auto fields = tmmsb::detail::split(row, ',');
    if (cols < 0) cols = static_cast<int>(fields.size());
    if (static_cast<int>(fields.size()) != cols)
      throw std::runtime_error("--b: ragged rows in matrix spec");
    for (const auto& f : fields) data.push_back(std::stod(f));
    ++rows;
  }
  if (rows != cols) throw std::runtime_error("--b: matrix must be square");
  b.rows = rows;
  b.cols = cols;
  b.data = std::move(data);
  return b;
}

struct ManifestScope {
  RunManifest manifest;
  std::string dir;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  ManifestScope(const std::string& sub, const CommonArgs& common, int argc, char** argv) {
    manifest.subcommand = sub;
    manifest.seed = common.seed;
    dir = common.out_dir;
    for (int i = 0; i < argc; ++i) manifest.command_line.push_back(argv[i]);
    fs::create_directories(dir);
  }

  std::string path(const std::string& name) const { return (fs::path(dir) / name).string(); }

  void finish() {
    manifest.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.save(path("manifest.json"));
    std::fprintf(stderr, "wrote %s\n", path("manifest.json").c_str());
  }
};

void write_int_csv(const std::string& path, const std::vector<int>& values,
                   const std::string& header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << header << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) out << i << ',' << values[i] << '\n';
}

FittedModel fit_with_restarts(const TransactionLog& log, FitConfig base, int restarts,
                              json* record) {
  FittedModel best;
  double best_elbo = -std::numeric_limits<double>::infinity();
  json runs = json::array();
  for (int r = 0; r < restarts; ++r) {
    FitConfig c = base;
    if (r > 0) c.seed = derive_seed(base.seed, "restart", static_cast<std::uint64_t>(r));
    FittedModel m = fit(log, c);
    runs.push_back(json{{"restart", r},
                        {"seed", c.seed},
                        {"elbo", m.trace.back()},
                        {"converged", m.converged},
                        {"iterations", m.iterations}});
    if (m.trace.back() > best_elbo) {
      best_elbo = m.trace.back();
      best = std::move(m);
    }
  }
  if (record) {
    (*record)["restarts"] = std::move(runs);
    (*record)["selected_seed"] = best.seed;
  }
  return best;
}

// ---------------------------------------------------------------------------

int run_simulate(const CommonArgs& common, const std::string& preset_name, int m, int n, int k,
                 double alpha, const std::string& b_spec, double poisson_rate, int max_redraws,
                 int argc, char** argv) {
  ManifestScope scope("simulate", common, argc, argv);
  SimulationConfig cfg;
  if (!preset_name.empty()) {
    cfg = preset(preset_name);
  } else {
    cfg.m = m;
    cfg.n = n;
    cfg.k = k;
    cfg.alpha.assign(k, alpha);
    if (b_spec.empty()) throw std::runtime_error("simulate: --b required without --preset");
    cfg.b = parse_b_matrix(b_spec);
  }
  if (poisson_rate > 0.0) cfg.poisson_rate = poisson_rate;
  cfg.max_redraws = max_redraws;
  cfg.seed = common.seed;
  cfg.validate();

  const auto sample = sample_network(cfg);
  const LogFormat format = log_format_from_string(common.format);
  const std::string log_path = scope.path(format == LogFormat::kCsv ? "log.csv" : "log.jsonl");
  save_log(sample.log, log_path, format);
  write_matrix_csv(scope.path("truth_pi.csv"), sample.memberships.pi);
  write_matrix_csv(scope.path("truth_z.csv"), sample.group_labels);

  scope.manifest.config = json{{"preset", preset_name},
                               {"m", cfg.m},
                               {"n", cfg.n},
                               {"k", cfg.k},
                               {"alpha", cfg.alpha},
                               {"b", matrix_to_json(cfg.b)},
                               {"sender_weights_uniform", cfg.sender_weights.empty()},
                               {"poisson_rate", cfg.poisson_rate ? json(*cfg.poisson_rate) : json()},
                               {"max_redraws", cfg.max_redraws},
                               {"format", to_string(format)}};
  scope.manifest.outputs = {log_path, scope.path("truth_pi.csv"), scope.path("truth_z.csv")};
  scope.finish();
  std::printf("simulated %d transactions over %d nodes (K=%d) -> %s\n",
              sample.log.num_transactions(), sample.log.num_nodes, cfg.k, log_path.c_str());
  return 0;
}

FitConfig make_fit_config(const CommonArgs& common, int k, double alpha_value, int max_outer,
                          int max_inner, double rel_tol, const std::string& init,
                          double jitter_scale, const std::string& init_pi_path) {
  FitConfig fc;
  fc.k = k;
  fc.alpha_value = alpha_value;
  fc.max_outer_iters = max_outer;
  fc.max_inner_iters = max_inner;
  fc.rel_tol = rel_tol;
  fc.init = init_scheme_from_string(init);
  fc.jitter_scale = jitter_scale;
  fc.seed = common.seed;
  fc.threads = common.threads;
  if (fc.init == InitScheme::kGroundTruth) {
    if (init_pi_path.empty())
      throw std::runtime_error("fit: --init ground-truth requires --init-pi");
    fc.init_memberships = MembershipMatrix(read_matrix_csv(init_pi_path));
  }
  return fc;
}

int run_fit(const CommonArgs& common, const std::string& log_path, const FitConfig& base,
            int restarts, int argc, char** argv) {
  ManifestScope scope("fit", common, argc, argv);
  const TransactionLog log = load_log(log_path, infer_format(log_path, common.format));
  json restart_record;
  const FittedModel model = fit_with_restarts(log, base, restarts, &restart_record);

  save_model(model, scope.path("model.json"));
  write_trace_csv(scope.path("trace.csv"), model.trace);
  const auto counts = to_counts(log);
  const auto ordered = ordered_adjacency(counts, model.memberships);
  write_matrix_csv(scope.path("ordered_counts.csv"), ordered.matrix);
  {
    json j{{"order", ordered.order},
           {"group_of", ordered.group_of},
           {"boundaries", ordered.boundaries}};
    std::ofstream out(scope.path("ordered_counts.json"));
    out << j.dump(2) << '\n';
  }
  write_matrix_csv(scope.path("predicted_frequency.csv"),
                   predicted_frequency_matrix(model, log));

  if (!model.converged)
    std::fprintf(stderr, "warning: fit did not converge within %d outer iterations\n",
                 model.config.max_outer_iters);
  if (!model.b_empty_cells.empty())
    std::fprintf(stderr, "warning: %zu B cells had empty denominators (set to clamp_eps)\n",
                 model.b_empty_cells.size());

  scope.manifest.config = fit_config_to_json(base);
  scope.manifest.config["restart_count"] = restarts;
  scope.manifest.config.update(restart_record);
  scope.manifest.inputs = {log_path};
  scope.manifest.outputs = {scope.path("model.json"), scope.path("trace.csv"),
                            scope.path("ordered_counts.csv"), scope.path("ordered_counts.json"),
                            scope.path("predicted_frequency.csv")};
  scope.finish();
  std::printf("fit K=%d: elbo=%.4f converged=%s iterations=%d -> %s\n", model.params.k,
              model.trace.back(), model.converged ? "true" : "false", model.iterations,
              scope.path("model.json").c_str());
  return 0;
}

int run_select(const CommonArgs& common, const std::string& log_path, int k_min, int k_max,
               const FitConfig& base, int argc, char** argv) {
  ManifestScope scope("select", common, argc, argv);
  if (k_min < 1 || k_max < k_min) throw std::runtime_error("select: need 1 <= k-min <= k-max");
  const TransactionLog log =
      load_log(log_path, infer_format(log_path, common.format));
  std::vector<int> range;
  for (int k = k_min; k <= k_max; ++k) range.push_back(k);
  const BicReport report = select_k(log, range, base);

  {
    std::ofstream out(scope.path("bic.json"));
    out << bic_report_to_json(report).dump(2) << '\n';
  }
  {
    std::ofstream out(scope.path("bic.csv"));
    out << "k,log_predictive_likelihood,bic,converged\n";
    for (const auto& r : report.records)
      out << r.k << ',' << format_double(r.log_predictive_likelihood) << ','
          << format_double(r.bic) << ',' << (r.converged ? 1 : 0) << '\n';
  }
  std::printf("%4s  %18s  %18s  %s\n", "K", "log-likelihood", "BIC", "converged");
  for (const auto& r : report.records)
    std::printf("%4d  %18.4f  %18.4f  %s%s\n", r.k, r.log_predictive_likelihood, r.bic,
                r.converged ? "yes" : "no", r.k == report.best_k ? "   <- best" : "");

  scope.manifest.config = fit_config_to_json(base);
  scope.manifest.config["k_min"] = k_min;
  scope.manifest.config["k_max"] = k_max;
  scope.manifest.inputs = {log_path};
  scope.manifest.outputs = {scope.path("bic.json"), scope.path("bic.csv")};
  scope.finish();
  return 0;
}

int run_evaluate(const CommonArgs& common, const std::string& model_path,
                 const std::string& truth_pi_path, const std::string& heldout_path, int argc,
                 char** argv) {
  ManifestScope scope("evaluate", common, argc, argv);
  if (truth_pi_path.empty() && heldout_path.empty())
    throw std::runtime_error("evaluate: need --truth-pi and/or --heldout");
  const FittedModel model = load_model(model_path);

  EvalReport report;
  report.model_kind = "tmmsb";
  scope.manifest.inputs = {model_path};
  if (!truth_pi_path.empty()) {
    const MembershipMatrix truth(read_matrix_csv(truth_pi_path));
    report.clustering = soft_bcubed(model.memberships, truth);
    scope.manifest.inputs.push_back(truth_pi_path);
  }
  if (!heldout_path.empty()) {
    const TransactionLog heldout =
        load_log(heldout_path, infer_format(heldout_path, common.format));
    report.mean_rank_at_full_recall = rank_at_full_recall(model, heldout);
    report.heldout_log_likelihood = predictive_log_likelihood(model, heldout);
    scope.manifest.inputs.push_back(heldout_path);
  }

  {
    std::ofstream out(scope.path("eval.json"));
    out << report.to_json().dump(2) << '\n';
  }
  if (report.clustering)
    std::printf("clustering: precision=%.4f recall=%.4f f=%.4f\n", report.clustering->precision,
                report.clustering->recall, report.clustering->f_measure);
  if (report.mean_rank_at_full_recall)
    std::printf("mean rank at full recall: %.4f\n", *report.mean_rank_at_full_recall);
  if (report.heldout_log_likelihood)
    std::printf("heldout log-likelihood: %.4f\n", *report.heldout_log_likelihood);

  scope.manifest.config = json{{"model", model_path},
                               {"truth_pi", truth_pi_path},
                               {"heldout", heldout_path}};
  scope.manifest.outputs = {scope.path("eval.json")};
  scope.finish();
  return 0;
}

int run_summarize(const CommonArgs& common, const std::string& model_path,
                  const std::string& log_path, int argc, char** argv) {
  ManifestScope scope("summarize", common, argc, argv);
  const FittedModel model = load_model(model_path);
  const TransactionLog log = load_log(log_path, infer_format(log_path, common.format));
  const GroupSummaries summaries = group_summaries(model, log);

  json groups = json::array();
  std::printf("%6s  %10s  %10s  %10s  %8s\n", "group", "n_sent", "n_recv", "E(m)", "hard");
  for (std::size_t k = 0; k < summaries.groups.size(); ++k) {
    const auto& g = summaries.groups[k];
    std::printf("%6zu  %10s  %10s  %10.2f  %8d\n", k,
                g.n_sent ? std::to_string(*g.n_sent).substr(0, 8).c_str() : "-",
                g.n_recv ? std::to_string(*g.n_recv).substr(0, 8).c_str() : "-",
                g.expected_size, g.hard_size);
    groups.push_back(json{{"group", k},
                          {"n_sent", g.n_sent ? json(*g.n_sent) : json()},
                          {"n_recv", g.n_recv ? json(*g.n_recv) : json()},
                          {"expected_size", g.expected_size},
                          {"hard_size", g.hard_size}});
  }
  std::printf("100 x B:\n");
  for (int a = 0; a < model.params.k; ++a) {
    for (int c = 0; c < model.params.k; ++c) std::printf("%8.2f", 100.0 * model.params.b(a, c));
    std::printf("\n");
  }

  {
    std::ofstream out(scope.path("summaries.json"));
    out << json{{"groups", std::move(groups)},
                {"weighted_b", matrix_to_json(summaries.weighted_b)}}
               .dump(2)
        << '\n';
  }
  write_matrix_csv(scope.path("weighted_b.csv"), summaries.weighted_b);

  scope.manifest.config = json{{"model", model_path}, {"log", log_path}};
  scope.manifest.inputs = {model_path, log_path};
  scope.manifest.outputs = {scope.path("summaries.json"), scope.path("weighted_b.csv")};
  scope.finish();
  return 0;
}

int run_split(const CommonArgs& common, const std::string& log_path, int n_test, int top_senders,
              int argc, char** argv) {
  ManifestScope scope("split", common, argc, argv);
  const TransactionLog log = load_log(log_path, infer_format(log_path, common.format));
  const HoldoutSplit split = holdout_split(log, n_test, top_senders, common.seed);
  const LogFormat format = log_format_from_string(common.format);
  const std::string ext = format == LogFormat::kCsv ? ".csv" : ".jsonl";
  const std::string train_path = scope.path("train" + ext);
  const std::string test_path = scope.path("test" + ext);
  save_log(split.train, train_path, format);
  save_log(split.test, test_path, format);

  scope.manifest.config = json{{"n_test", n_test},
                               {"top_senders", top_senders},
                               {"top_sender_nodes", split.top_senders},
                               {"format", to_string(format)}};
  scope.manifest.inputs = {log_path};
  scope.manifest.outputs = {train_path, test_path};
  scope.finish();
  std::printf("split: train=%d test=%d -> %s, %s\n", split.train.num_transactions(),
              split.test.num_transactions(), train_path.c_str(), test_path.c_str());
  return 0;
}

int run_reduce(const CommonArgs& common, const std::string& log_path, int threshold,
               const std::string& model_path, int argc, char** argv) {
  ManifestScope scope("reduce", common, argc, argv);
  const TransactionLog log = load_log(log_path, infer_format(log_path, common.format));
  const CountMatrix counts = to_counts(log);
  const SocioMatrix socio = to_socio(counts, threshold);
  write_matrix_csv(scope.path("counts.csv"), counts.counts);
  write_matrix_csv(scope.path("socio.csv"), socio.adj);
  scope.manifest.outputs = {scope.path("counts.csv"), scope.path("socio.csv")};

  if (!model_path.empty()) {
    const FittedModel model = load_model(model_path);
    const auto ordered = ordered_adjacency(counts, model.memberships);
    write_matrix_csv(scope.path("ordered_counts.csv"), ordered.matrix);
    json j{{"order", ordered.order},
           {"group_of", ordered.group_of},
           {"boundaries", ordered.boundaries}};
    std::ofstream out(scope.path("ordered_counts.json"));
    out << j.dump(2) << '\n';
    scope.manifest.outputs.push_back(scope.path("ordered_counts.csv"));
    scope.manifest.outputs.push_back(scope.path("ordered_counts.json"));
    scope.manifest.inputs = {log_path, model_path};
  } else {
    scope.manifest.inputs = {log_path};
  }

  scope.manifest.config = json{{"threshold", threshold}, {"model", model_path}};
  scope.finish();
  return 0;
}

int run_baseline(const CommonArgs& common, const std::string& log_path, int k, int argc,
                 char** argv) {
  ManifestScope scope("baseline", common, argc, argv);
  const TransactionLog log = load_log(log_path, infer_format(log_path, common.format));
  const BaselineResult result = baseline_hierarchical(log, k);

  // Emit a model-shaped artifact so `evaluate` scores baselines uniformly:
  // one-hot memberships from the hard labels plus the crude B.
  FittedModel model;
  model.params.k = k;
  model.params.alpha.assign(k, 0.0);
  model.params.b = result.crude_b;
  model.memberships = one_hot_memberships(result.labels, k);
  model.state.b = result.crude_b;
  model.converged = true;
  model.config.k = k;
  save_model(model, scope.path("model.json"), "baseline-hierarchical");
  write_int_csv(scope.path("labels.csv"), result.labels, "node,label");
  write_matrix_csv(scope.path("crude_b.csv"), result.crude_b);

  scope.manifest.config = json{{"k", k}};
  scope.manifest.inputs = {log_path};
  scope.manifest.outputs = {scope.path("model.json"), scope.path("labels.csv"),
                            scope.path("crude_b.csv")};
  scope.finish();
  std::printf("baseline: k=%d -> %s\n", k, scope.path("model.json").c_str());
  return 0;
}

int run_bench(const CommonArgs& common, const std::string& m_list, const std::string& n_list,
              const std::string& k_list, int repeats, int argc, char** argv) {
  ManifestScope scope("bench", common, argc, argv);
  const auto parse_list = [](const std::string& s) {
    std::vector<int> out;
    for (const auto& f : tmmsb::detail::split(s, ',')) out.push_back(std::stoi(f));
    return out;
  };
  BenchConfig cfg;
  cfg.m_values = parse_list(m_list);
  cfg.n_values = parse_list(n_list);
  cfg.k_values = parse_list(k_list);
  cfg.repeats = repeats;
  cfg.seed = common.seed;
  const BenchResult result = run_bench(cfg);

  {
    std::ofstream out(scope.path("bench.csv"));
    out << "m,n,k,seconds\n";
    for (const auto& p : result.points)
      out << p.m << ',' << p.n << ',' << p.k << ',' << format_double(p.seconds) << '\n';
  }
  {
    std::ofstream out(scope.path("scaling.json"));
    out << json{{"exponent_m", result.exponent_m},
                {"exponent_n", result.exponent_n},
                {"exponent_k", result.exponent_k},
                {"intercept", result.intercept},
                {"r_squared", result.r_squared}}
               .dump(2)
        << '\n';
  }
  std::printf("time ~ M^%.2f N^%.2f K^%.2f (R^2 = %.4f)\n", result.exponent_m,
              result.exponent_n, result.exponent_k, result.r_squared);

  scope.manifest.config = json{{"m_values", cfg.m_values},
                               {"n_values", cfg.n_values},
                               {"k_values", cfg.k_values},
                               {"repeats", repeats}};
  scope.manifest.outputs = {scope.path("bench.csv"), scope.path("scaling.json")};
  scope.finish();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transactional mixed-membership blockmodel toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML-style config file; flags override its values");
  int exit_code = 0;

  // simulate ---------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "Sample a synthetic transaction network");
  CommonArgs sim_common;
  add_common(sim, sim_common);
  std::string sim_preset;
  int sim_m = 2, sim_n = 1, sim_k = 1, sim_redraws = 1000;
  double sim_alpha = 0.1, sim_rate = 0.0;
  std::string sim_b;
  sim->add_option("--preset", sim_preset, "Named scenario (table1:1..table1:4, reddit-like)");
  sim->add_option("--m", sim_m, "Number of nodes");
  sim->add_option("--n", sim_n, "Number of transactions");
  sim->add_option("--k", sim_k, "Number of groups");
  sim->add_option("--alpha", sim_alpha, "Symmetric Dirichlet hyperparameter");
  sim->add_option("--b", sim_b, "Interaction matrix, rows ';'-separated, entries ','");
  sim->add_option("--poisson-rate", sim_rate, "Draw N ~ Poisson(rate) instead of fixed --n");
  sim->add_option("--max-redraws", sim_redraws, "Rejection cap for empty recipient sets");
  sim->callback([&] {
    exit_code = run_simulate(sim_common, sim_preset, sim_m, sim_n, sim_k, sim_alpha, sim_b,
                             sim_rate, sim_redraws, argc, argv);
  });

  // fit ----------------------------------------------------------------------
  auto* fit_cmd = app.add_subcommand("fit", "Variational EM fit of the blockmodel");
  CommonArgs fit_common;
  add_common(fit_cmd, fit_common);
  std::string fit_log, fit_init = "uniform-jitter", fit_init_pi;
  int fit_k = 1, fit_outer = 100, fit_inner = 20, fit_restarts = 1;
  double fit_alpha = 0.1, fit_tol = 1e-6, fit_jitter = 0.05;
  fit_cmd->add_option("--log", fit_log, "Transaction log")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--k", fit_k, "Number of groups")->required();
  fit_cmd->add_option("--alpha-value", fit_alpha, "Symmetric Dirichlet prior value");
  fit_cmd->add_option("--max-outer-iters", fit_outer, "Outer iteration cap");
  fit_cmd->add_option("--max-inner-iters", fit_inner, "Inner sweep cap");
  fit_cmd->add_option("--rel-tol", fit_tol, "Relative ELBO convergence tolerance");
  fit_cmd->add_option("--init", fit_init, "Initialization scheme")
      ->check(CLI::IsMember({"uniform-jitter", "baseline-clusters", "spectral", "ground-truth"}));
  fit_cmd->add_option("--jitter-scale", fit_jitter, "Multiplicative jitter half-width");
  fit_cmd->add_option("--init-pi", fit_init_pi, "Membership CSV for --init ground-truth");
  fit_cmd->add_option("--restarts", fit_restarts,
                      "Seeded restarts; keeps the highest-ELBO fit (useful with uniform-jitter)");
  fit_cmd->callback([&] {
    const FitConfig base = make_fit_config(fit_common, fit_k, fit_alpha, fit_outer, fit_inner,
                                           fit_tol, fit_init, fit_jitter, fit_init_pi);
    exit_code = run_fit(fit_common, fit_log, base, fit_restarts, argc, argv);
  });

  // select -------------------------------------------------------------------
  auto* sel = app.add_subcommand("select", "BIC scan over the number of groups");
  CommonArgs sel_common;
  add_common(sel, sel_common);
  std::string sel_log, sel_init = "uniform-jitter";
  int sel_kmin = 1, sel_kmax = 1, sel_outer = 100, sel_inner = 20;
  double sel_alpha = 0.1, sel_tol = 1e-6, sel_jitter = 0.05;
  sel->add_option("--log", sel_log, "Transaction log")->required()->check(CLI::ExistingFile);
  sel->add_option("--k-min", sel_kmin, "Smallest K")->required();
  sel->add_option("--k-max", sel_kmax, "Largest K")->required();
  sel->add_option("--alpha-value", sel_alpha, "Symmetric Dirichlet prior value");
  sel->add_option("--max-outer-iters", sel_outer, "Outer iteration cap");
  sel->add_option("--max-inner-iters", sel_inner, "Inner sweep cap");
  sel->add_option("--rel-tol", sel_tol, "Relative ELBO convergence tolerance");
  sel->add_option("--init", sel_init, "Initialization scheme")
      ->check(CLI::IsMember({"uniform-jitter", "baseline-clusters", "spectral"}));
  sel->add_option("--jitter-scale", sel_jitter, "Multiplicative jitter half-width");
  sel->callback([&] {
    const FitConfig base = make_fit_config(sel_common, 1, sel_alpha, sel_outer, sel_inner,
                                           sel_tol, sel_init, sel_jitter, "");
    exit_code = run_select(sel_common, sel_log, sel_kmin, sel_kmax, base, argc, argv);
  });

  // evaluate -----------------------------------------------------------------
  auto* ev = app.add_subcommand("evaluate", "Score a model against truth and/or heldout data");
  CommonArgs ev_common;
  add_common(ev, ev_common);
  std::string ev_model, ev_truth, ev_heldout;
  ev->add_option("--model", ev_model, "Fitted or baseline model JSON")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--truth-pi", ev_truth, "Ground-truth membership CSV")->check(CLI::ExistingFile);
  ev->add_option("--heldout", ev_heldout, "Heldout transaction log")->check(CLI::ExistingFile);
  ev->callback(
      [&] { exit_code = run_evaluate(ev_common, ev_model, ev_truth, ev_heldout, argc, argv); });

  // summarize ------------------------------------------------------------------
  auto* summ = app.add_subcommand("summarize", "Group summaries and weighted B");
  CommonArgs summ_common;
  add_common(summ, summ_common);
  std::string summ_model, summ_log;
  summ->add_option("--model", summ_model, "Fitted model JSON")->required()->check(CLI::ExistingFile);
  summ->add_option("--log", summ_log, "Transaction log")->required()->check(CLI::ExistingFile);
  summ->callback([&] { exit_code = run_summarize(summ_common, summ_model, summ_log, argc, argv); });

  // split ----------------------------------------------------------------------
  auto* split_cmd = app.add_subcommand("split", "Holdout split from the most active senders");
  CommonArgs split_common;
  add_common(split_cmd, split_common);
  std::string split_log;
  int split_n = 0, split_top = 10;
  split_cmd->add_option("--log", split_log, "Transaction log")->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--n-test", split_n, "Number of heldout messages")->required();
  split_cmd->add_option("--top-senders", split_top, "Sender pool size by sent count");
  split_cmd->callback(
      [&] { exit_code = run_split(split_common, split_log, split_n, split_top, argc, argv); });

  // reduce ---------------------------------------------------------------------
  auto* red = app.add_subcommand("reduce", "Count and socio-matrix reductions");
  CommonArgs red_common;
  add_common(red, red_common);
  std::string red_log, red_model;
  int red_threshold = 1;
  red->add_option("--log", red_log, "Transaction log")->required()->check(CLI::ExistingFile);
  red->add_option("--threshold", red_threshold, "Socio-matrix count threshold");
  red->add_option("--model", red_model, "Optional model for group-ordered matrices")
      ->check(CLI::ExistingFile);
  red->callback(
      [&] { exit_code = run_reduce(red_common, red_log, red_threshold, red_model, argc, argv); });

  // baseline -------------------------------------------------------------------
  auto* base_cmd = app.add_subcommand("baseline", "Average-linkage hierarchical baseline");
  CommonArgs base_common;
  add_common(base_cmd, base_common);
  std::string base_log;
  int base_k = 2;
  base_cmd->add_option("--log", base_log, "Transaction log")->required()->check(CLI::ExistingFile);
  base_cmd->add_option("--k", base_k, "Number of clusters")->required();
  base_cmd->callback(
      [&] { exit_code = run_baseline(base_common, base_log, base_k, argc, argv); });

  // bench ------------------------------------------------------------------------
  auto* bench_cmd = app.add_subcommand("bench", "Scaling bench over an (M, N, K) grid");
  CommonArgs bench_common;
  add_common(bench_cmd, bench_common);
  std::string bench_m = "50,100", bench_n = "400,800", bench_k = "3,6";
  int bench_repeats = 3;
  bench_cmd->add_option("--m-list", bench_m, "Comma-separated M values");
  bench_cmd->add_option("--n-list", bench_n, "Comma-separated N values");
  bench_cmd->add_option("--k-list", bench_k, "Comma-separated K values");
  bench_cmd->add_option("--repeats", bench_repeats, "Timing repeats per grid point (median)");
  bench_cmd->callback([&] {
    exit_code =
        run_bench(bench_common, bench_m, bench_n, bench_k, bench_repeats, argc, argv);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit 0, usage errors exit 2
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return exit_code;
}
