#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "splogsum/dataset.hpp"
#include "splogsum/metrics.hpp"
#include "splogsum/rng.hpp"
#include "splogsum/solver.hpp"
#include "splogsum/spl.hpp"

namespace splogsum {

// ---------------------------------------------------------------------------
// Synthetic binary-response designs with a planted sparse coefficient vector.

struct SimConfig {
  std::size_t n = 200;
  std::size_t p = 1000;
  double rho = 0.0;    // correlation mix of columns 2..5 with column 1
  double sigma = 0.0;  // sd of noise added to the linear predictor
  double label_noise_fraction = 0.0;
  std::uint64_t seed = 0;
};

struct TrueModel {
  std::vector<double> beta;
  std::vector<std::size_t> support;  // ascending indices of non-zeros
  double intercept = 0.0;
};

struct SimData {
  Dataset data;
  TrueModel truth;
  std::vector<std::size_t> flipped;  // rows whose label was inverted
};

// Planted coefficients: ten active leading features, the rest exactly zero.
inline TrueModel planted_model(std::size_t p) {
  if (p < 10) throw ConfigError("simulation needs at least ten features");
  TrueModel t;
  t.beta.assign(p, 0.0);
  const double head[10] = {1.0, -1.0, -1.5, -3.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0};
  for (std::size_t j = 0; j < 10; ++j) {
    t.beta[j] = head[j];
    t.support.push_back(j);
  }
  return t;
}

inline std::string feature_name(std::size_t j, std::size_t p) {
  int width = 1;
  for (std::size_t q = p; q >= 10; q /= 10) ++width;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "x%0*zu", width, j + 1);
  return buf;
}

// Draw X with iid standard normal entries, then overwrite columns 2..5 with
// rho * x_1 + (1 - rho) * x_j row by row, so corr(x_1, x_j) =
// rho / sqrt(rho^2 + (1 - rho)^2). The response is Bernoulli at the logistic
// of x' beta plus N(0, sigma^2) noise; an optional fraction of labels is then
// flipped uniformly at random.
inline SimData generate(const SimConfig& cfg) {
  if (cfg.n < 2) throw ConfigError("simulation needs at least two rows");
  if (cfg.rho < 0.0 || cfg.rho >= 1.0)
    throw ConfigError("rho must lie in [0, 1)");
  if (cfg.sigma < 0.0) throw ConfigError("sigma must be non-negative");
  if (cfg.label_noise_fraction < 0.0 || cfg.label_noise_fraction > 0.5)
    throw ConfigError("label noise fraction must lie in [0, 0.5]");

  SimData out;
  out.truth = planted_model(cfg.p);

  Dataset& d = out.data;
  d.n = cfg.n;
  d.p = cfg.p;
  d.x.resize(d.n * d.p);
  d.y.resize(d.n);
  for (std::size_t j = 0; j < d.p; ++j)
    d.names.push_back(feature_name(j, d.p));

  Rng rx(derive_seed(cfg.seed, streams::kDesignMatrix));
  for (std::size_t j = 0; j < d.p; ++j) {
    double* c = d.col(j);
    for (std::size_t i = 0; i < d.n; ++i) c[i] = rx.normal();
  }
  if (cfg.rho > 0.0) {
    const double* c1 = d.col(0);
    for (std::size_t j = 1; j <= 4; ++j) {
      double* c = d.col(j);
      for (std::size_t i = 0; i < d.n; ++i)
        c[i] = cfg.rho * c1[i] + (1.0 - cfg.rho) * c[i];
    }
  }

  Rng re(derive_seed(cfg.seed, streams::kLinearNoise));
  Rng ru(derive_seed(cfg.seed, streams::kLabelDraw));
  for (std::size_t i = 0; i < d.n; ++i) {
    double eta = out.truth.intercept;
    for (std::size_t j : out.truth.support)
      eta += out.truth.beta[j] * d.at(i, j);
    eta += cfg.sigma * re.normal();
    d.y[i] = (ru.uniform() < sigmoid(eta)) ? 1 : 0;
  }

  if (cfg.label_noise_fraction > 0.0) {
    const std::size_t k = static_cast<std::size_t>(
        std::llround(cfg.label_noise_fraction * static_cast<double>(d.n)));
    if (k > 0) {
      Rng rf(derive_seed(cfg.seed, streams::kLabelFlip));
      std::vector<std::size_t> rows(d.n);
      std::iota(rows.begin(), rows.end(), 0);
      rf.shuffle(rows);
      rows.resize(k);
      std::sort(rows.begin(), rows.end());
      for (std::size_t r : rows) d.y[r] = 1 - d.y[r];
      out.flipped = std::move(rows);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Support recovery scoring.

inline constexpr double kSupportZeroTol = 1e-8;

struct SupportMetrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double sensitivity = 0.0;
  double specificity = 0.0;
};

inline SupportMetrics support_metrics(std::span<const double> beta_hat,
                                      const TrueModel& truth) {
  if (beta_hat.size() != truth.beta.size())
    throw DataError("estimated and true coefficient lengths differ");
  SupportMetrics m;
  for (std::size_t j = 0; j < beta_hat.size(); ++j) {
    const bool est = std::fabs(beta_hat[j]) > kSupportZeroTol;
    const bool act = std::fabs(truth.beta[j]) > kSupportZeroTol;
    if (act)
      est ? ++m.tp : ++m.fn;
    else
      est ? ++m.fp : ++m.tn;
  }
  m.sensitivity = (m.tp + m.fn) ? static_cast<double>(m.tp) /
                                      static_cast<double>(m.tp + m.fn)
                                : 1.0;
  m.specificity = (m.tn + m.fp) ? static_cast<double>(m.tn) /
                                      static_cast<double>(m.tn + m.fp)
                                : 1.0;
  return m;
}

// ---------------------------------------------------------------------------
// Replicated benchmark over a grid of (n, rho, sigma) cells and methods.

enum class Method { kL1, kHalf, kLogsum, kSplLogsum };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::kL1: return "l1";
    case Method::kHalf: return "half";
    case Method::kLogsum: return "logsum";
    case Method::kSplLogsum: return "spl-logsum";
  }
  return "?";
}

inline Method method_from_name(const std::string& s) {
  if (s == "l1") return Method::kL1;
  if (s == "half" || s == "l1/2") return Method::kHalf;
  if (s == "logsum") return Method::kLogsum;
  if (s == "spl-logsum" || s == "spl_logsum") return Method::kSplLogsum;
  throw ConfigError("unknown method: " + s);
}

inline PenaltyKind method_penalty(Method m) {
  switch (m) {
    case Method::kL1: return PenaltyKind::kL1;
    case Method::kHalf: return PenaltyKind::kHalf;
    default: return PenaltyKind::kLogsum;
  }
}

struct BenchCell {
  std::size_t n = 200;
  double rho = 0.0;
  double sigma = 0.0;
};

struct BenchConfig {
  std::vector<BenchCell> cells;
  std::vector<Method> methods;
  int replications = 10;
  std::uint64_t seed_base = 0;  // replication r uses generator seed seed_base + r
  std::size_t p = 1000;
  double train_fraction = 0.7;
  int folds = 10;
  int grid_size = 20;
  double mu = 0.05;
  int max_ages = 20;
  // Starting age for self-paced fits, as a quantile of the initial per-sample
  // losses. Starting at the median (the spl_fit "auto" rule) halves the
  // data-fit term against an unchanged penalty, which collapses the support;
  // starting high keeps the fit close to the plain one while still easing the
  // hardest samples in last.
  double spl_gamma0_quantile = 0.9;
  int jobs = 1;
  FitOptions fit_options;
};

// Mean over replications of test-set classification and support recovery.
struct BenchRow {
  BenchCell cell;
  Method method = Method::kL1;
  double auc = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double accuracy = 0.0;
  double beta_sensitivity = 0.0;
  double beta_specificity = 0.0;
  double mean_selected = 0.0;
  int replications = 0;
  std::uint64_t seed_base = 0;
};

namespace detail {

struct RepOutcome {
  double auc = 0.0, sens = 0.0, spec = 0.0, acc = 0.0;
  double beta_sens = 0.0, beta_spec = 0.0;
  double selected = 0.0;
};

// Everything for one (cell, replication): one dataset, one split, one
// standardization, then every method on the same data. Replication seeds
// depend only on (seed_base, rep), so a given replication shares its raw
// normal draws across every cell with the same n and p; cells differ only
// through the rho mixing and sigma scaling applied to those shared draws.
inline void run_one_rep(const BenchConfig& cfg, const BenchCell& cell, int rep,
                        std::vector<RepOutcome>& out_per_method) {
  SimConfig sim;
  sim.n = cell.n;
  sim.p = cfg.p;
  sim.rho = cell.rho;
  sim.sigma = cell.sigma;
  sim.seed = cfg.seed_base + static_cast<std::uint64_t>(rep);
  const SimData data = generate(sim);

  const std::uint64_t rep_seed =
      derive_seed(sim.seed, streams::kReplication);
  const SplitPair parts = split(data.data, cfg.train_fraction, rep_seed);
  const StandardizeResult st = standardize(parts.train);
  const Dataset test = apply_standardization(parts.test, st);

  // Expand coefficients over kept columns back to the original column space.
  const auto expand = [&](const std::vector<double>& beta) {
    std::vector<double> full(cfg.p, 0.0);
    for (std::size_t k = 0; k < st.kept_indices.size(); ++k)
      full[st.kept_indices[k]] = beta[k];
    return full;
  };

  // The log-sum CV result is shared between the plain and self-paced fits.
  CvResult cv_cache[3];
  bool cv_done[3] = {false, false, false};
  const auto cv_for = [&](PenaltyKind kind) -> const CvResult& {
    const int slot = static_cast<int>(kind);
    if (!cv_done[slot]) {
      cv_cache[slot] = cross_validate(st.data, kind, cfg.folds, cfg.grid_size,
                                      rep_seed, cfg.fit_options);
      cv_done[slot] = true;
    }
    return cv_cache[slot];
  };

  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    const Method method = cfg.methods[mi];
    const PenaltyKind kind = method_penalty(method);
    const PenaltySpec spec = make_penalty(kind, cv_for(kind).chosen_lambda);

    ModelFit fitres;
    if (method == Method::kSplLogsum) {
      SplConfig sc;
      sc.spec = spec;
      sc.mu = cfg.mu;
      sc.max_ages = cfg.max_ages;
      sc.fit_options = cfg.fit_options;
      if (cfg.spl_gamma0_quantile > 0.0 && cfg.spl_gamma0_quantile <= 1.0) {
        const ModelFit base = fit(st.data, spec, cfg.fit_options);
        std::vector<double> losses =
            per_sample_losses(st.data, base.beta, base.intercept);
        std::sort(losses.begin(), losses.end());
        const auto at = static_cast<std::size_t>(
            cfg.spl_gamma0_quantile * static_cast<double>(losses.size() - 1));
        // nextafter so the quantile sample itself clears the strict-< rule
        sc.gamma0 = std::nextafter(losses[at],
                                   std::numeric_limits<double>::infinity());
      }
      fitres = spl_fit(st.data, sc).first;
    } else {
      fitres = fit(st.data, spec, cfg.fit_options);
    }

    const std::vector<double> scores = predict_proba(fitres, test);
    const ClassificationReport rep_cls =
        classification_report(scores, test.y);
    const SupportMetrics sup = support_metrics(expand(fitres.beta), data.truth);

    RepOutcome& o = out_per_method[mi];
    o.auc = rep_cls.auc;
    o.sens = rep_cls.sensitivity;
    o.spec = rep_cls.specificity;
    o.acc = rep_cls.accuracy;
    o.beta_sens = sup.sensitivity;
    o.beta_spec = sup.specificity;
    o.selected = static_cast<double>(fitres.support.size());
  }
}

}  // namespace detail

// Runs every (cell, replication) task, optionally across threads; results are
// written into pre-assigned slots so the output never depends on scheduling.
inline std::vector<BenchRow> run_replicated(const BenchConfig& cfg) {
  if (cfg.cells.empty() || cfg.methods.empty())
    throw ConfigError("benchmark needs at least one cell and one method");
  if (cfg.replications < 1)
    throw ConfigError("benchmark needs at least one replication");

  const std::size_t n_cells = cfg.cells.size();
  const std::size_t n_methods = cfg.methods.size();
  const std::size_t reps = static_cast<std::size_t>(cfg.replications);

  // slot [cell][rep][method]
  std::vector<std::vector<std::vector<detail::RepOutcome>>> slots(
      n_cells, std::vector<std::vector<detail::RepOutcome>>(
                   reps, std::vector<detail::RepOutcome>(n_methods)));

  struct Task {
    std::size_t cell;
    int rep;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < n_cells; ++c)
    for (int r = 1; r <= cfg.replications; ++r)
      tasks.push_back({c, r});

  std::exception_ptr first_error;
  std::mutex error_mutex;
  const auto run_task = [&](const Task& t) {
    try {
      detail::run_one_rep(cfg, cfg.cells[t.cell], t.rep,
                          slots[t.cell][static_cast<std::size_t>(t.rep - 1)]);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    for (const Task& t : tasks) run_task(t);
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex next_mutex;
    for (int w = 0; w < jobs; ++w)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t idx;
          {
            std::lock_guard<std::mutex> lock(next_mutex);
            if (next >= tasks.size()) return;
            idx = next++;
          }
          run_task(tasks[idx]);
        }
      });
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<BenchRow> rows;
  for (std::size_t c = 0; c < n_cells; ++c) {
    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      BenchRow row;
      row.cell = cfg.cells[c];
      row.method = cfg.methods[mi];
      row.replications = cfg.replications;
      row.seed_base = cfg.seed_base;
      for (std::size_t r = 0; r < reps; ++r) {
        const detail::RepOutcome& o = slots[c][r][mi];
        row.auc += o.auc;
        row.sensitivity += o.sens;
        row.specificity += o.spec;
        row.accuracy += o.acc;
        row.beta_sensitivity += o.beta_sens;
        row.beta_specificity += o.beta_spec;
        row.mean_selected += o.selected;
      }
      const double nr = static_cast<double>(reps);
      row.auc /= nr;
      row.sensitivity /= nr;
      row.specificity /= nr;
      row.accuracy /= nr;
      row.beta_sensitivity /= nr;
      row.beta_specificity /= nr;
      row.mean_selected /= nr;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace splogsum
