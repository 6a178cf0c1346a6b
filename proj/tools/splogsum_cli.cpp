// Command-line front end: fit / cv / simulate / bench / eval.
//
// Exit codes: 0 success, 2 bad configuration or flags, 3 data problems,
// 4 solver divergence.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "splogsum/splogsum.hpp"

namespace fs = std::filesystem;
using namespace splogsum;

namespace {

struct CommonArgs {
  std::string output_dir = ".";
  std::uint64_t seed = 0;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs* c) {
  cmd->add_option("--output-dir", c->output_dir, "directory for output files");
  cmd->add_option("--seed", c->seed, "random seed");
  cmd->add_flag("--quiet", c->quiet, "suppress progress output");
}

void write_output(const CommonArgs& c, const std::string& filename,
                  const std::string& body) {
  fs::create_directories(c.output_dir);
  detail::write_text_file((fs::path(c.output_dir) / filename).string(), body);
}

void say(const CommonArgs& c, const std::string& line) {
  if (!c.quiet) std::printf("%s\n", line.c_str());
}

struct FitArgs {
  CommonArgs common;
  std::string input;
  std::string label = "label";
  std::string positive_label;
  std::string penalty = "logsum";
  std::optional<double> lambda;
  std::optional<double> epsilon;
  double test_fraction = 0.0;
  int folds = 10;
  int grid_size = 20;
  std::optional<double> gamma0;
  double mu = 0.05;
  int max_ages = 20;
  double tol = 1e-4;
  int max_outer = 50;
  int max_inner = 100;
};

struct CvArgs {
  CommonArgs common;
  std::string input;
  std::string label = "label";
  std::string positive_label;
  std::string penalty = "logsum";
  int folds = 10;
  int grid_size = 20;
};

struct SimulateArgs {
  CommonArgs common;
  std::size_t n = 200;
  std::size_t p = 1000;
  double rho = 0.0;
  double sigma = 0.0;
  double label_noise = 0.0;
  bool gzip = false;
};

struct BenchArgs {
  CommonArgs common;
  std::vector<std::size_t> n_values{200, 300};
  std::vector<double> rho_values{0.2, 0.6};
  std::vector<double> sigma_values{0.3, 0.9};
  std::vector<std::string> methods{"l1", "half", "logsum", "spl-logsum"};
  int replications = 10;
  std::size_t p = 1000;
  double train_fraction = 0.7;
  int folds = 10;
  int grid_size = 20;
  double mu = 0.05;
  int max_ages = 20;
  double gamma0_quantile = 0.9;
  int jobs = 1;
};

struct EvalArgs {
  CommonArgs common;
  std::string model;
  std::string input;
  std::string label = "label";
  std::string positive_label;
};

FitOptions fit_options_from(const FitArgs& a) {
  FitOptions opts;
  opts.tol = a.tol;
  opts.max_outer = a.max_outer;
  opts.max_inner = a.max_inner;
  return opts;
}

int run_fit(const FitArgs& a) {
  const Dataset raw = load_csv(a.input, a.label, a.positive_label);
  say(a.common, "loaded " + std::to_string(raw.n) + " rows, " +
                    std::to_string(raw.p) + " features from " + a.input);

  SplitPair parts;
  const bool have_test = a.test_fraction > 0.0;
  if (have_test) parts = split(raw, 1.0 - a.test_fraction, a.common.seed);
  const Dataset& train_raw = have_test ? parts.train : raw;

  const StandardizeResult st = standardize(train_raw);
  write_output(a.common, "drop_report.json",
               drop_report_to_json(st).dump(2) + "\n");
  if (!st.dropped_names.empty())
    say(a.common, "dropped " + std::to_string(st.dropped_names.size()) +
                      " constant feature(s)");

  const Method method = method_from_name(a.penalty);
  const PenaltyKind kind = method_penalty(method);
  const FitOptions opts = fit_options_from(a);

  double lambda = 0.0;
  if (a.lambda.has_value()) {
    lambda = *a.lambda;
  } else {
    const CvResult cv = cross_validate(st.data, kind, a.folds, a.grid_size,
                                       a.common.seed, opts);
    write_output(a.common, "cv.json", cv_to_json(cv).dump(2) + "\n");
    lambda = cv.chosen_lambda;
    say(a.common, "cross-validated lambda = " + detail::format_sig(lambda, 6));
  }
  const PenaltySpec spec =
      make_penalty(kind, lambda,
                   a.epsilon.has_value()
                       ? *a.epsilon
                       : std::numeric_limits<double>::quiet_NaN());

  ModelFit model;
  if (method == Method::kSplLogsum) {
    SplConfig sc;
    sc.spec = spec;
    sc.gamma0 = a.gamma0;
    sc.mu = a.mu;
    sc.max_ages = a.max_ages;
    sc.fit_options = opts;
    auto [m, state] = spl_fit(st.data, sc);
    model = std::move(m);
    write_output(a.common, "spl_history.csv", spl_history_csv(state));
    say(a.common,
        "self-paced schedule ran " + std::to_string(state.ages_run) + " age(s)");
  } else {
    model = fit(st.data, spec, opts);
  }
  write_output(a.common, "model.json",
               model_to_json(model, st.data).dump(2) + "\n");
  say(a.common, "selected " + std::to_string(model.support.size()) +
                    " feature(s), converged = " +
                    (model.converged ? "true" : "false"));

  std::vector<std::pair<std::string, ClassificationReport>> reports;
  reports.emplace_back(
      "train", classification_report(predict_proba(model, st.data), st.data.y));
  if (have_test) {
    const Dataset test = apply_standardization(parts.test, st);
    reports.emplace_back(
        "test", classification_report(predict_proba(model, test), test.y));
  }
  write_output(a.common, "metrics.csv", metrics_csv(reports));

  // Descriptor table over raw training values, support mapped back onto the
  // original column order.
  std::vector<double> full_beta(train_raw.p, 0.0);
  std::vector<std::size_t> full_support;
  for (std::size_t j : model.support) {
    full_beta[st.kept_indices[j]] = model.beta[j];
    full_support.push_back(st.kept_indices[j]);
  }
  std::sort(full_support.begin(), full_support.end());
  write_output(a.common, "descriptors.csv",
               descriptors_csv(
                   descriptor_pvalues(train_raw, full_beta, full_support)));
  for (const auto& [name, rep] : reports)
    say(a.common, name + " auc = " + detail::format_sig(rep.auc, 6));
  return 0;
}

int run_cv(const CvArgs& a) {
  const Dataset raw = load_csv(a.input, a.label, a.positive_label);
  const StandardizeResult st = standardize(raw);
  const CvResult cv =
      cross_validate(st.data, method_penalty(method_from_name(a.penalty)),
                     a.folds, a.grid_size, a.common.seed);
  write_output(a.common, "cv.json", cv_to_json(cv).dump(2) + "\n");
  say(a.common, "chosen lambda = " + detail::format_sig(cv.chosen_lambda, 6) +
                    " (index " + std::to_string(cv.chosen_index) + " of " +
                    std::to_string(cv.lambda_grid.size()) + ")");
  return 0;
}

int run_simulate(const SimulateArgs& a) {
  SimConfig cfg;
  cfg.n = a.n;
  cfg.p = a.p;
  cfg.rho = a.rho;
  cfg.sigma = a.sigma;
  cfg.label_noise_fraction = a.label_noise;
  cfg.seed = a.common.seed;
  const SimData sim = generate(cfg);

  fs::create_directories(a.common.output_dir);
  const std::string name = a.gzip ? "dataset.csv.gz" : "dataset.csv";
  save_csv(sim.data, (fs::path(a.common.output_dir) / name).string());
  write_output(a.common, "truth.json",
               truth_to_json(sim.truth, sim.flipped, cfg.seed).dump(2) + "\n");
  say(a.common, "wrote " + name + " with " + std::to_string(sim.data.n) +
                    " rows, " + std::to_string(sim.data.p) + " features");
  return 0;
}

int run_bench(const BenchArgs& a) {
  BenchConfig cfg;
  for (std::size_t n : a.n_values)
    for (double rho : a.rho_values)
      for (double sigma : a.sigma_values) cfg.cells.push_back({n, rho, sigma});
  for (const std::string& m : a.methods)
    cfg.methods.push_back(method_from_name(m));
  cfg.replications = a.replications;
  cfg.seed_base = a.common.seed;
  cfg.p = a.p;
  cfg.train_fraction = a.train_fraction;
  cfg.folds = a.folds;
  cfg.grid_size = a.grid_size;
  cfg.mu = a.mu;
  cfg.max_ages = a.max_ages;
  cfg.spl_gamma0_quantile = a.gamma0_quantile;
  cfg.jobs = a.jobs;

  const std::vector<BenchRow> rows = run_replicated(cfg);
  write_output(a.common, "results.csv", bench_results_csv(rows));
  write_output(a.common, "descriptor_counts.csv", bench_selected_csv(rows));

  if (!a.common.quiet) {
    std::printf("%6s %5s %6s %12s %8s %8s %10s %10s %9s\n", "n", "rho", "sigma",
                "method", "auc", "acc", "beta_sens", "beta_spec", "selected");
    for (const BenchRow& r : rows)
      std::printf("%6zu %5.2f %6.2f %12s %8.4f %8.4f %10.4f %10.4f %9.1f\n",
                  r.cell.n, r.cell.rho, r.cell.sigma, method_name(r.method),
                  r.auc, r.accuracy, r.beta_sensitivity, r.beta_specificity,
                  r.mean_selected);
  }
  return 0;
}

int run_eval(const EvalArgs& a) {
  const std::string body = detail::read_text_file(a.model);
  ordered_json j;
  try {
    j = ordered_json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("cannot parse model JSON: ") + e.what());
  }
  const RawModel model = raw_model_from_json(j);
  const Dataset data = load_csv(a.input, a.label, a.positive_label);
  const std::vector<double> scores = raw_model_scores(model, data);
  const ClassificationReport rep = classification_report(scores, data.y);
  std::vector<std::pair<std::string, ClassificationReport>> rows;
  rows.emplace_back("eval", rep);
  write_output(a.common, "metrics.csv", metrics_csv(rows));
  say(a.common, "auc = " + detail::format_sig(rep.auc, 6) +
                    ", accuracy = " + detail::format_sig(rep.accuracy, 6));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sparse logistic regression with log-sum, L1 and L1/2 penalties, "
      "optionally trained on a self-paced schedule"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a TOML/INI file");

  FitArgs fit_args;
  CLI::App* fit_cmd =
      app.add_subcommand("fit", "fit a penalized model to a CSV dataset");
  add_common(fit_cmd, &fit_args.common);
  fit_cmd->add_option("--input", fit_args.input, "input CSV (or .csv.gz)")
      ->required();
  fit_cmd->add_option("--label", fit_args.label, "label column name");
  fit_cmd->add_option("--positive-label", fit_args.positive_label,
                      "string label mapped to class 1");
  fit_cmd->add_option("--penalty", fit_args.penalty,
                      "l1, half, logsum or spl-logsum");
  fit_cmd->add_option("--lambda", fit_args.lambda,
                      "fixed penalty strength; omit to cross-validate");
  fit_cmd->add_option("--epsilon", fit_args.epsilon,
                      "logsum epsilon (default 0.01*sqrt(lambda))");
  fit_cmd->add_option("--test-fraction", fit_args.test_fraction,
                      "hold out this fraction for test metrics");
  fit_cmd->add_option("--folds", fit_args.folds, "cross-validation folds");
  fit_cmd->add_option("--grid-size", fit_args.grid_size,
                      "lambda grid size for cross-validation");
  fit_cmd->add_option("--gamma0", fit_args.gamma0,
                      "initial self-paced threshold (default: median loss)");
  fit_cmd->add_option("--mu", fit_args.mu, "self-paced threshold increment");
  fit_cmd->add_option("--max-ages", fit_args.max_ages,
                      "maximum self-paced ages");
  fit_cmd->add_option("--tol", fit_args.tol, "coefficient tolerance");
  fit_cmd->add_option("--max-outer", fit_args.max_outer,
                      "maximum reweighting passes");
  fit_cmd->add_option("--max-inner", fit_args.max_inner,
                      "maximum coordinate sweeps per pass");

  CvArgs cv_args;
  CLI::App* cv_cmd =
      app.add_subcommand("cv", "cross-validate the penalty strength");
  add_common(cv_cmd, &cv_args.common);
  cv_cmd->add_option("--input", cv_args.input, "input CSV (or .csv.gz)")
      ->required();
  cv_cmd->add_option("--label", cv_args.label, "label column name");
  cv_cmd->add_option("--positive-label", cv_args.positive_label,
                     "string label mapped to class 1");
  cv_cmd->add_option("--penalty", cv_args.penalty, "l1, half or logsum");
  cv_cmd->add_option("--folds", cv_args.folds, "cross-validation folds");
  cv_cmd->add_option("--grid-size", cv_args.grid_size, "lambda grid size");

  SimulateArgs sim_args;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "generate a synthetic dataset");
  add_common(sim_cmd, &sim_args.common);
  sim_cmd->add_option("--n", sim_args.n, "rows");
  sim_cmd->add_option("--p", sim_args.p, "features");
  sim_cmd->add_option("--rho", sim_args.rho, "correlation mix for columns 2-5");
  sim_cmd->add_option("--sigma", sim_args.sigma, "linear-predictor noise sd");
  sim_cmd->add_option("--label-noise", sim_args.label_noise,
                      "fraction of labels to flip");
  sim_cmd->add_flag("--gzip", sim_args.gzip, "write dataset.csv.gz");

  BenchArgs bench_args;
  CLI::App* bench_cmd = app.add_subcommand(
      "bench", "replicated method comparison on synthetic data");
  add_common(bench_cmd, &bench_args.common);
  bench_cmd->add_option("--n", bench_args.n_values, "sample sizes")
      ->delimiter(',');
  bench_cmd->add_option("--rho", bench_args.rho_values, "correlation levels")
      ->delimiter(',');
  bench_cmd->add_option("--sigma", bench_args.sigma_values, "noise levels")
      ->delimiter(',');
  bench_cmd->add_option("--methods", bench_args.methods, "methods to compare")
      ->delimiter(',');
  bench_cmd->add_option("--replications", bench_args.replications,
                        "replications per cell");
  bench_cmd->add_option("--p", bench_args.p, "features");
  bench_cmd->add_option("--train-fraction", bench_args.train_fraction,
                        "train split fraction");
  bench_cmd->add_option("--folds", bench_args.folds, "cross-validation folds");
  bench_cmd->add_option("--grid-size", bench_args.grid_size,
                        "lambda grid size");
  bench_cmd->add_option("--mu", bench_args.mu, "self-paced increment");
  bench_cmd->add_option("--max-ages", bench_args.max_ages,
                        "maximum self-paced ages");
  bench_cmd->add_option("--gamma0-quantile", bench_args.gamma0_quantile,
                        "initial-loss quantile for the self-paced start age");
  bench_cmd->add_option("--jobs", bench_args.jobs, "worker threads");

  EvalArgs eval_args;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "score a saved model on raw CSV data");
  add_common(eval_cmd, &eval_args.common);
  eval_cmd->add_option("--model", eval_args.model, "model.json path")
      ->required();
  eval_cmd->add_option("--input", eval_args.input, "input CSV (or .csv.gz)")
      ->required();
  eval_cmd->add_option("--label", eval_args.label, "label column name");
  eval_cmd->add_option("--positive-label", eval_args.positive_label,
                       "string label mapped to class 1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(fit_cmd)) return run_fit(fit_args);
    if (app.got_subcommand(cv_cmd)) return run_cv(cv_args);
    if (app.got_subcommand(sim_cmd)) return run_simulate(sim_args);
    if (app.got_subcommand(bench_cmd)) return run_bench(bench_args);
    if (app.got_subcommand(eval_cmd)) return run_eval(eval_args);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
