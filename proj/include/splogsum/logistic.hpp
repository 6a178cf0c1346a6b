#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "splogsum/dataset.hpp"
#include "splogsum/errors.hpp"

namespace splogsum {

// Predicted probabilities are clamped away from {0, 1} before any log, and
// the curvature term is floored, matching the usual IRLS safeguards.
inline constexpr double kProbClamp = 1e-12;
inline constexpr double kCurvatureFloor = 1e-5;

// Overflow-safe logistic function.
inline double sigmoid(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

inline double clamp_prob(double f) {
  if (f < kProbClamp) return kProbClamp;
  if (f > 1.0 - kProbClamp) return 1.0 - kProbClamp;
  return f;
}

// Per-sample negative log-likelihood at linear predictor eta.
inline double nll_term(int y, double eta) {
  const double f = clamp_prob(sigmoid(eta));
  return y ? -std::log(f) : -std::log(1.0 - f);
}

inline void linear_predictor(const Dataset& d, std::span<const double> beta,
                             double intercept, std::vector<double>& eta) {
  eta.assign(d.n, intercept);
  for (std::size_t j = 0; j < d.p; ++j) {
    const double b = beta[j];
    if (b == 0.0) continue;
    const double* c = d.col(j);
    for (std::size_t i = 0; i < d.n; ++i) eta[i] += b * c[i];
  }
}

// Total negative log-likelihood, optionally weighted per sample.
inline double negative_log_likelihood(const Dataset& d,
                                      std::span<const double> beta,
                                      double intercept,
                                      std::span<const double> weights = {}) {
  std::vector<double> eta;
  linear_predictor(d, beta, intercept, eta);
  double total = 0.0;
  for (std::size_t i = 0; i < d.n; ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (w == 0.0) continue;
    total += w * nll_term(d.y[i], eta[i]);
  }
  return total;
}

// Per-sample losses for the self-paced schedule; always over all rows.
inline std::vector<double> per_sample_losses(const Dataset& d,
                                             std::span<const double> beta,
                                             double intercept) {
  std::vector<double> eta;
  linear_predictor(d, beta, intercept, eta);
  std::vector<double> losses(d.n);
  for (std::size_t i = 0; i < d.n; ++i) losses[i] = nll_term(d.y[i], eta[i]);
  return losses;
}

// Gradient of the unpenalized NLL in (intercept, beta); grad[0] is the
// intercept component, grad[1 + j] matches beta[j].
inline std::vector<double> nll_gradient(const Dataset& d,
                                        std::span<const double> beta,
                                        double intercept,
                                        std::span<const double> weights = {}) {
  std::vector<double> eta;
  linear_predictor(d, beta, intercept, eta);
  std::vector<double> resid(d.n);
  double g0 = 0.0;
  for (std::size_t i = 0; i < d.n; ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    resid[i] = w * (sigmoid(eta[i]) - static_cast<double>(d.y[i]));
    g0 += resid[i];
  }
  std::vector<double> grad(1 + d.p);
  grad[0] = g0;
  for (std::size_t j = 0; j < d.p; ++j) {
    const double* c = d.col(j);
    double g = 0.0;
    for (std::size_t i = 0; i < d.n; ++i) g += resid[i] * c[i];
    grad[1 + j] = g;
  }
  return grad;
}

// One quadratic-approximation step around the current eta: curvature weights
// W_i = f(1 - f) floored, working response Z_i = eta_i + (y_i - f_i) / W_i.
struct WorkingSet {
  std::vector<double> z;
  std::vector<double> w;
};

inline WorkingSet irls_working_set(std::span<const int> y,
                                   std::span<const double> eta) {
  WorkingSet ws;
  ws.z.resize(eta.size());
  ws.w.resize(eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const double f = sigmoid(eta[i]);
    double w = f * (1.0 - f);
    if (w < kCurvatureFloor) w = kCurvatureFloor;
    ws.w[i] = w;
    ws.z[i] = eta[i] + (static_cast<double>(y[i]) - f) / w;
  }
  return ws;
}

}  // namespace splogsum
