#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>
#include <span>
#include <string>

#include "splogsum/errors.hpp"

namespace splogsum {

enum class PenaltyKind { kL1, kHalf, kLogsum };

inline const char* penalty_name(PenaltyKind k) {
  switch (k) {
    case PenaltyKind::kL1: return "l1";
    case PenaltyKind::kHalf: return "half";
    case PenaltyKind::kLogsum: return "logsum";
  }
  return "?";
}

inline PenaltyKind penalty_from_name(const std::string& s) {
  if (s == "l1") return PenaltyKind::kL1;
  if (s == "half" || s == "l1/2") return PenaltyKind::kHalf;
  if (s == "logsum") return PenaltyKind::kLogsum;
  throw ConfigError("unknown penalty: " + s);
}

// When no epsilon is given for the log-sum penalty we tie it to the current
// regularization level; it must stay below sqrt(lambda) for the thresholding
// rule below to have a well-defined interior root.
inline double default_logsum_epsilon(double lambda) {
  return 0.01 * std::sqrt(lambda);
}

struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::kL1;
  double lambda = 1.0;
  double epsilon = 0.0;  // log-sum only
};

inline PenaltySpec make_penalty(
    PenaltyKind kind, double lambda,
    double epsilon = std::numeric_limits<double>::quiet_NaN()) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ConfigError("penalty lambda must be positive and finite");
  PenaltySpec spec{kind, lambda, 0.0};
  if (kind == PenaltyKind::kLogsum) {
    spec.epsilon = std::isnan(epsilon) ? default_logsum_epsilon(lambda) : epsilon;
    if (!(spec.epsilon > 0.0) || !(spec.epsilon < std::sqrt(lambda)))
      throw ConfigError("logsum epsilon must satisfy 0 < epsilon < sqrt(lambda)");
  } else if (!std::isnan(epsilon)) {
    throw ConfigError("epsilon is only meaningful for the logsum penalty");
  }
  return spec;
}

// Penalty contribution of a single coefficient.
inline double penalty_term(PenaltyKind kind, double lambda, double epsilon,
                           double b) {
  const double a = std::fabs(b);
  switch (kind) {
    case PenaltyKind::kL1: return lambda * a;
    case PenaltyKind::kHalf: return lambda * std::sqrt(a);
    case PenaltyKind::kLogsum: return lambda * std::log(a + epsilon);
  }
  return 0.0;
}

inline double penalty_value(const PenaltySpec& spec, std::span<const double> beta) {
  double total = 0.0;
  for (double b : beta) total += penalty_term(spec.kind, spec.lambda, spec.epsilon, b);
  return total;
}

// g(b) = (b - w)^2 / 2 + pen(b), the univariate objective each coordinate
// update minimizes exactly.
inline double univariate_objective(PenaltyKind kind, double lambda,
                                   double epsilon, double w, double b) {
  const double d = b - w;
  return 0.5 * d * d + penalty_term(kind, lambda, epsilon, b);
}

// Exact minimizer of g for each penalty. Ties between an interior stationary
// point and zero resolve to zero. The non-convex rules first locate the
// candidate interior root in closed form, then compare objective values
// against b = 0; skipping that comparison returns a spurious non-zero answer
// whenever the basin at zero is deeper.
inline double threshold_scalar(PenaltyKind kind, double lambda, double epsilon,
                               double w) {
  if (w == 0.0) return 0.0;
  const double a = std::fabs(w);
  const double s = (w > 0.0) ? 1.0 : -1.0;
  switch (kind) {
    case PenaltyKind::kL1: {
      const double m = a - lambda;
      return (m > 0.0) ? s * m : 0.0;
    }
    case PenaltyKind::kLogsum: {
      // Stationary points of g solve b^2 - (a - eps) b + (lambda - a eps) = 0.
      const double c1 = a - epsilon;
      const double disc = c1 * c1 - 4.0 * (lambda - a * epsilon);
      if (disc <= 0.0) return 0.0;
      const double root = 0.5 * (c1 + std::sqrt(disc));
      if (root <= 0.0) return 0.0;
      const double g_root = univariate_objective(kind, lambda, epsilon, a, root);
      const double g_zero = univariate_objective(kind, lambda, epsilon, a, 0.0);
      return (g_root < g_zero) ? s * root : 0.0;
    }
    case PenaltyKind::kHalf: {
      // With u = sqrt(b), stationary points solve u^3 - a u + lambda/2 = 0.
      // Three real roots exist iff lambda < (4/3) a sqrt(a/3); the largest is
      // the only candidate minimizer.
      const double p = a / 3.0;
      const double crit = 4.0 * a * std::sqrt(p) / 3.0;
      if (lambda >= crit) return 0.0;
      const double arg = -(3.0 * lambda / (4.0 * a)) * std::sqrt(3.0 / a);
      const double clamped = (arg < -1.0) ? -1.0 : ((arg > 1.0) ? 1.0 : arg);
      const double u = 2.0 * std::sqrt(p) * std::cos(std::acos(clamped) / 3.0);
      if (u <= 0.0) return 0.0;
      const double cand = u * u;
      const double g_cand = univariate_objective(kind, lambda, epsilon, a, cand);
      const double g_zero = 0.5 * a * a;
      return (g_cand < g_zero) ? s * cand : 0.0;
    }
  }
  return 0.0;
}

inline double threshold(const PenaltySpec& spec, double w) {
  return threshold_scalar(spec.kind, spec.lambda, spec.epsilon, w);
}

// Brute-force reference minimizer of g over the grid {k * step : |k * step|
// <= halfwidth}; ties resolve toward the smaller |b|. Slow by construction;
// exists to certify threshold() and for nothing else.
inline double oracle_threshold(const PenaltySpec& spec, double w,
                               double halfwidth, double step) {
  if (!(step > 0.0) || !(halfwidth >= std::fabs(w)))
    throw ConfigError("oracle grid must cover w with a positive step");
  const long long kmax = static_cast<long long>(halfwidth / step);
  double best_b = 0.0;
  double best_g =
      univariate_objective(spec.kind, spec.lambda, spec.epsilon, w, 0.0);
  for (long long k = -kmax; k <= kmax; ++k) {
    const double b = static_cast<double>(k) * step;
    const double g =
        univariate_objective(spec.kind, spec.lambda, spec.epsilon, w, b);
    if (g < best_g || (g == best_g && std::fabs(b) < std::fabs(best_b))) {
      best_g = g;
      best_b = b;
    }
  }
  return best_b;
}

}  // namespace splogsum
