#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "splogsum/dataset.hpp"
#include "splogsum/errors.hpp"
#include "splogsum/logistic.hpp"
#include "splogsum/penalties.hpp"
#include "splogsum/rng.hpp"

namespace splogsum {

struct FitOptions {
  double tol = 1e-4;
  int max_outer = 50;
  int max_inner = 100;
  // Per-sample weights (empty means all ones). The objective is
  //   (1/n) * sum_i v_i * nll_i + sum_j pen(beta_j)
  // with n the total row count, not the weight sum, so a subset selected by
  // 0/1 weights is penalized exactly as strongly as the same rows refit alone
  // with lambda scaled by n_subset/n.
  std::vector<double> sample_weights;
  // Warm start (empty means zeros / a fitted intercept-only start).
  std::vector<double> warm_beta;
  double warm_intercept = std::numeric_limits<double>::quiet_NaN();
};

struct ModelFit {
  PenaltySpec spec;
  std::vector<double> beta;
  double intercept = 0.0;
  std::vector<std::size_t> support;   // indices with beta != 0, ascending
  std::vector<double> loss_trace;     // penalized objective per outer pass
  int n_outer_iters = 0;
  bool converged = false;
};

namespace detail {

inline double penalized_objective(const Dataset& d, const PenaltySpec& spec,
                                  std::span<const double> beta, double intercept,
                                  std::span<const double> weights) {
  const double nll = negative_log_likelihood(d, beta, intercept, weights);
  return nll / static_cast<double>(d.n) + penalty_value(spec, beta);
}

}  // namespace detail

// Penalized logistic regression via iteratively reweighted least squares,
// each quadratic subproblem solved by cyclic coordinate descent with an
// active-set schedule (full sweep, then non-zero coordinates until stable,
// then a full sweep to confirm). The intercept is never penalized.
inline ModelFit fit(const Dataset& d, const PenaltySpec& spec,
                    const FitOptions& opts = {}) {
  validate(d);
  if (!d.standardized)
    throw DataError("fit expects standardized features");
  if (opts.tol <= 0.0 || opts.max_outer < 1 || opts.max_inner < 1)
    throw ConfigError("bad solver options");

  const std::size_t n = d.n;
  const std::size_t p = d.p;
  std::vector<double> v(n, 1.0);
  if (!opts.sample_weights.empty()) {
    if (opts.sample_weights.size() != n)
      throw ConfigError("sample weight count does not match row count");
    for (double w : opts.sample_weights)
      if (!(w >= 0.0) || !std::isfinite(w))
        throw ConfigError("sample weights must be finite and non-negative");
    v = opts.sample_weights;
  }
  double wy = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    wsum += v[i];
    wy += v[i] * static_cast<double>(d.y[i]);
  }
  if (!(wsum > 0.0)) throw DataError("all sample weights are zero");
  const double ybar = wy / wsum;
  if (ybar <= 0.0 || ybar >= 1.0)
    throw DataError("only one class present among weighted samples");

  ModelFit m;
  m.spec = spec;
  if (!opts.warm_beta.empty()) {
    if (opts.warm_beta.size() != p)
      throw ConfigError("warm start has wrong length");
    m.beta = opts.warm_beta;
  } else {
    m.beta.assign(p, 0.0);
  }
  m.intercept = std::isnan(opts.warm_intercept)
                    ? std::log(clamp_prob(ybar) / (1.0 - clamp_prob(ybar)))
                    : opts.warm_intercept;

  std::vector<double> eta;
  linear_predictor(d, m.beta, m.intercept, eta);

  const double lambda_n = spec.lambda * static_cast<double>(n);
  std::vector<double> a(n), r(n), colsq(p);

  for (int outer = 1; outer <= opts.max_outer; ++outer) {
    const std::vector<double> beta_prev = m.beta;

    const WorkingSet ws = irls_working_set(d.y, eta);
    double suma = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = ws.w[i] * v[i];
      r[i] = ws.z[i] - eta[i];
      suma += a[i];
    }
    for (std::size_t j = 0; j < p; ++j) {
      const double* c = d.col(j);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += a[i] * c[i] * c[i];
      colsq[j] = s;
    }

    // One coordinate pass; restrict_active limits it to non-zero coefficients.
    const auto sweep = [&](bool restrict_active) -> double {
      double delta_max = 0.0;
      double num = 0.0;
      for (std::size_t i = 0; i < n; ++i) num += a[i] * r[i];
      const double d0 = num / suma;
      if (d0 != 0.0) {
        m.intercept += d0;
        for (std::size_t i = 0; i < n; ++i) r[i] -= d0;
        delta_max = std::fabs(d0);
      }
      for (std::size_t j = 0; j < p; ++j) {
        if (restrict_active && m.beta[j] == 0.0) continue;
        const double dj = colsq[j];
        const double* c = d.col(j);
        if (dj <= 0.0) {
          if (m.beta[j] != 0.0) {
            for (std::size_t i = 0; i < n; ++i) r[i] += m.beta[j] * c[i];
            delta_max = std::max(delta_max, std::fabs(m.beta[j]));
            m.beta[j] = 0.0;
          }
          continue;
        }
        double wj = m.beta[j] * dj;
        for (std::size_t i = 0; i < n; ++i) wj += a[i] * c[i] * r[i];
        const double target = wj / dj;
        const double bj =
            threshold_scalar(spec.kind, lambda_n / dj, spec.epsilon, target);
        const double diff = bj - m.beta[j];
        if (diff != 0.0) {
          for (std::size_t i = 0; i < n; ++i) r[i] -= diff * c[i];
          m.beta[j] = bj;
          delta_max = std::max(delta_max, std::fabs(diff));
        }
      }
      return delta_max;
    };

    int sweeps = 0;
    double delta = sweep(false);
    ++sweeps;
    while (delta > opts.tol && sweeps < opts.max_inner) {
      while (sweeps < opts.max_inner) {
        const double da = sweep(true);
        ++sweeps;
        if (da <= opts.tol) break;
      }
      delta = sweep(false);
      ++sweeps;
    }

    for (std::size_t i = 0; i < n; ++i) eta[i] = ws.z[i] - r[i];

    const double obj =
        detail::penalized_objective(d, spec, m.beta, m.intercept, v);
    if (!std::isfinite(obj))
      throw SolverError("penalized objective became non-finite");
    m.loss_trace.push_back(obj);
    m.n_outer_iters = outer;

    double outer_delta = 0.0;
    for (std::size_t j = 0; j < p; ++j)
      outer_delta = std::max(outer_delta, std::fabs(m.beta[j] - beta_prev[j]));
    if (outer_delta <= opts.tol) {
      m.converged = true;
      break;
    }
  }

  for (std::size_t j = 0; j < p; ++j)
    if (m.beta[j] != 0.0) m.support.push_back(j);
  return m;
}

inline double predict_eta(const ModelFit& m, std::span<const double> row) {
  if (row.size() != m.beta.size())
    throw DataError("feature vector length does not match the model");
  double eta = m.intercept;
  for (std::size_t j : m.support) eta += m.beta[j] * row[j];
  return eta;
}

inline double predict_proba(const ModelFit& m, std::span<const double> row) {
  return sigmoid(predict_eta(m, row));
}

inline std::vector<double> predict_proba(const ModelFit& m, const Dataset& d) {
  if (d.p != m.beta.size())
    throw DataError("dataset width does not match the model");
  std::vector<double> eta;
  linear_predictor(d, m.beta, m.intercept, eta);
  for (double& e : eta) e = sigmoid(e);
  return eta;
}

// ---------------------------------------------------------------------------
// Cross-validated lambda selection.

struct CvResult {
  PenaltyKind kind = PenaltyKind::kL1;
  std::vector<double> lambda_grid;     // descending
  std::vector<double> mean_deviance;   // held-out NLL per sample, per lambda
  double chosen_lambda = 0.0;
  std::size_t chosen_index = 0;
  int folds = 0;
  std::uint64_t seed = 0;
};

// Smallest lambda with an all-zero coefficient path under the L1 rule; the
// shared grid anchor for every penalty kind.
inline double lambda_max_zero(const Dataset& d) {
  double ybar = 0.0;
  for (int yi : d.y) ybar += static_cast<double>(yi);
  ybar /= static_cast<double>(d.n);
  double best = 0.0;
  for (std::size_t j = 0; j < d.p; ++j) {
    const double* c = d.col(j);
    double s = 0.0;
    for (std::size_t i = 0; i < d.n; ++i)
      s += c[i] * (static_cast<double>(d.y[i]) - ybar);
    best = std::max(best, std::fabs(s));
  }
  return best / static_cast<double>(d.n);
}

inline std::vector<double> lambda_grid(double lmax, int grid_size,
                                       double ratio = 1e-3) {
  if (grid_size < 1) throw ConfigError("lambda grid needs at least one point");
  std::vector<double> grid;
  if (grid_size == 1) {
    grid.push_back(lmax);
    return grid;
  }
  for (int k = 0; k < grid_size; ++k)
    grid.push_back(lmax * std::pow(ratio, static_cast<double>(k) /
                                              static_cast<double>(grid_size - 1)));
  return grid;
}

// Stratified k-fold assignment: per class, shuffled then dealt round-robin.
inline std::vector<int> stratified_folds(const Dataset& d, int folds,
                                         std::uint64_t seed) {
  const auto counts = class_counts(d);
  if (folds < 2) throw ConfigError("cross-validation needs at least two folds");
  if (counts[0] < static_cast<std::size_t>(folds) ||
      counts[1] < static_cast<std::size_t>(folds))
    throw DataError("a class has fewer rows than folds; cannot stratify");
  std::vector<int> assign(d.n, -1);
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < d.n; ++i)
      if (d.y[i] == c) rows.push_back(i);
    Rng rng(derive_seed(seed, streams::kCvFolds, static_cast<std::uint64_t>(c)));
    rng.shuffle(rows);
    for (std::size_t k = 0; k < rows.size(); ++k)
      assign[rows[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  }
  return assign;
}

inline CvResult cross_validate(const Dataset& d, PenaltyKind kind, int folds,
                               int grid_size, std::uint64_t seed,
                               const FitOptions& base_opts = {}) {
  validate(d);
  if (!d.standardized)
    throw DataError("cross-validation expects standardized features");
  CvResult res;
  res.kind = kind;
  res.folds = folds;
  res.seed = seed;
  res.lambda_grid = lambda_grid(lambda_max_zero(d), grid_size);

  const std::vector<int> assign = stratified_folds(d, folds, seed);
  std::vector<double> dev_sum(res.lambda_grid.size(), 0.0);
  std::vector<std::size_t> dev_count(res.lambda_grid.size(), 0);

  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < d.n; ++i)
      (assign[i] == f ? test_rows : train_rows).push_back(i);
    const Dataset train = subset_rows(d, train_rows);
    const Dataset test = subset_rows(d, test_rows);

    FitOptions opts = base_opts;
    opts.sample_weights.clear();
    opts.warm_beta.clear();  // warm starts are per fold, along the path only
    opts.warm_intercept = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < res.lambda_grid.size(); ++k) {
      const PenaltySpec spec = make_penalty(kind, res.lambda_grid[k]);
      const ModelFit m = fit(train, spec, opts);
      opts.warm_beta = m.beta;  // warm path, largest lambda first
      opts.warm_intercept = m.intercept;
      dev_sum[k] += negative_log_likelihood(test, m.beta, m.intercept);
      dev_count[k] += test.n;
    }
  }

  res.mean_deviance.resize(res.lambda_grid.size());
  for (std::size_t k = 0; k < res.lambda_grid.size(); ++k)
    res.mean_deviance[k] = dev_sum[k] / static_cast<double>(dev_count[k]);

  // First index wins ties, and the grid is descending, so ties resolve to the
  // larger (more parsimonious) lambda.
  std::size_t best = 0;
  for (std::size_t k = 1; k < res.mean_deviance.size(); ++k)
    if (res.mean_deviance[k] < res.mean_deviance[best]) best = k;
  res.chosen_index = best;
  res.chosen_lambda = res.lambda_grid[best];
  return res;
}

}  // namespace splogsum
