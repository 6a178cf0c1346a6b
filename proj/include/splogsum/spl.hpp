#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <iterator>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "splogsum/logistic.hpp"
#include "splogsum/solver.hpp"

namespace splogsum {

// Self-paced schedule: train on the currently "easy" samples (loss strictly
// below the age parameter gamma), refit, recompute losses, raise gamma, and
// repeat until every sample participates and the coefficients settle.
struct SplConfig {
  PenaltySpec spec;
  std::optional<double> gamma0;  // empty: start at the median initial loss
  double mu = 0.05;              // additive gamma increment per age
  int max_ages = 20;
  FitOptions fit_options;
};

struct SplAgeRecord {
  int age_index = 0;            // 1-based
  double gamma = 0.0;           // threshold actually used at this age
  std::size_t selected_count = 0;
  std::vector<std::size_t> selected;     // ascending row indices
  std::vector<std::size_t> newly_added;  // vs the previous age's selection
};

struct SplState {
  std::vector<int> v;            // final selection indicator per row
  std::vector<double> losses;    // final per-sample losses
  double gamma = 0.0;            // last threshold used
  int ages_run = 0;
  bool settled = false;          // all rows in and coefficients stable
  std::vector<SplAgeRecord> history;
};

// Hard selection rule: a sample joins the next fit iff its loss is strictly
// below gamma.
inline std::vector<int> update_weights(const std::vector<double>& losses,
                                       double gamma) {
  std::vector<int> v(losses.size());
  for (std::size_t i = 0; i < losses.size(); ++i)
    v[i] = (losses[i] < gamma) ? 1 : 0;
  return v;
}

namespace detail {

// Smallest threshold that selects at least k of the given losses under the
// strict-< rule.
inline double gamma_selecting_at_least(std::vector<double> losses,
                                       std::size_t k) {
  std::nth_element(losses.begin(), losses.begin() + (k - 1), losses.end());
  return std::nextafter(losses[k - 1],
                        std::numeric_limits<double>::infinity());
}

}  // namespace detail

inline std::pair<ModelFit, SplState> spl_fit(const Dataset& d,
                                             const SplConfig& cfg) {
  validate(d);
  if (!(cfg.mu > 0.0)) throw ConfigError("spl mu must be positive");
  if (cfg.max_ages < 1) throw ConfigError("spl max_ages must be at least one");

  // Age zero: ordinary fit on everything, to price each sample.
  FitOptions opts = cfg.fit_options;
  opts.sample_weights.clear();
  ModelFit model = fit(d, cfg.spec, opts);
  std::vector<double> losses = per_sample_losses(d, model.beta, model.intercept);

  SplState state;
  // Median-anchored start: the smallest gamma that admits at least half the
  // samples, so early ages train on the easier half.
  double gamma = cfg.gamma0.has_value()
                     ? *cfg.gamma0
                     : detail::gamma_selecting_at_least(
                           losses, (d.n + 1) / 2);

  std::vector<std::size_t> prev_selected;
  std::vector<double> beta_prev = model.beta;

  for (int age = 1; age <= cfg.max_ages; ++age) {
    std::vector<int> v = update_weights(losses, gamma);

    // Both classes must reach the solver. If a class is entirely priced out,
    // widen gamma just past that class's easiest sample.
    double gamma_used = gamma;
    for (int c = 0; c < 2; ++c) {
      double min_loss = std::numeric_limits<double>::infinity();
      bool covered = false;
      for (std::size_t i = 0; i < d.n; ++i) {
        if (d.y[i] != c) continue;
        min_loss = std::min(min_loss, losses[i]);
        covered = covered || (v[i] == 1);
      }
      if (!covered && std::isfinite(min_loss))
        gamma_used = std::max(
            gamma_used,
            std::nextafter(min_loss, std::numeric_limits<double>::infinity()));
    }
    if (gamma_used != gamma) v = update_weights(losses, gamma_used);

    FitOptions age_opts = cfg.fit_options;
    age_opts.sample_weights.assign(v.begin(), v.end());
    age_opts.warm_beta = model.beta;
    age_opts.warm_intercept = model.intercept;
    model = fit(d, cfg.spec, age_opts);
    losses = per_sample_losses(d, model.beta, model.intercept);

    SplAgeRecord rec;
    rec.age_index = age;
    rec.gamma = gamma_used;
    for (std::size_t i = 0; i < d.n; ++i)
      if (v[i]) rec.selected.push_back(i);
    rec.selected_count = rec.selected.size();
    std::set_difference(rec.selected.begin(), rec.selected.end(),
                        prev_selected.begin(), prev_selected.end(),
                        std::back_inserter(rec.newly_added));
    prev_selected = rec.selected;
    state.history.push_back(rec);
    state.v = std::move(v);
    state.gamma = gamma_used;
    state.ages_run = age;

    double beta_delta = 0.0;
    for (std::size_t j = 0; j < d.p; ++j)
      beta_delta = std::max(beta_delta, std::fabs(model.beta[j] - beta_prev[j]));
    beta_prev = model.beta;

    const bool all_in = rec.selected_count == d.n;
    if (all_in && beta_delta <= cfg.fit_options.tol) {
      state.settled = true;
      break;
    }
    gamma += cfg.mu;
  }

  state.losses = std::move(losses);
  return {std::move(model), std::move(state)};
}

// Loss-band census: how many samples fall strictly below `low`, in
// [low, high), and at or above `high`. A quick confidence readout over the
// final per-sample losses.
inline std::array<std::size_t, 3> confidence_bands(
    const std::vector<double>& losses, double low, double high) {
  if (!(low < high)) throw ConfigError("confidence bands need low < high");
  std::array<std::size_t, 3> bands{0, 0, 0};
  for (double l : losses) {
    if (l < low)
      ++bands[0];
    else if (l < high)
      ++bands[1];
    else
      ++bands[2];
  }
  return bands;
}

}  // namespace splogsum
