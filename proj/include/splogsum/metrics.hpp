#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <string>
#include <vector>

#include "splogsum/dataset.hpp"
#include "splogsum/errors.hpp"

namespace splogsum {

// ---------------------------------------------------------------------------
// Ranking and thresholded classification metrics.

// AUC by the rank-sum identity with midranks for tied scores; equals the
// probability a random positive outscores a random negative (ties count 1/2).
inline double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw DataError("score and label lengths differ");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("labels must be 0 or 1");
    n_pos += static_cast<std::size_t>(y);
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw DataError("AUC needs both classes present");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]]) rank_sum_pos += midrank;
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

struct ClassificationReport {
  double auc = 0.0;
  double accuracy = 0.0;
  double sensitivity = 0.0;  // recall on class 1
  double specificity = 0.0;  // recall on class 0
  double cutoff = 0.5;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Scores at or above the cutoff predict class 1.
inline ClassificationReport classification_report(std::span<const double> scores,
                                                  std::span<const int> labels,
                                                  double cutoff = 0.5) {
  ClassificationReport rep;
  rep.cutoff = cutoff;
  rep.auc = auc(scores, labels);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= cutoff;
    if (labels[i] == 1)
      pred ? ++rep.tp : ++rep.fn;
    else
      pred ? ++rep.fp : ++rep.tn;
  }
  const double n = static_cast<double>(scores.size());
  rep.accuracy = static_cast<double>(rep.tp + rep.tn) / n;
  rep.sensitivity = static_cast<double>(rep.tp) /
                    static_cast<double>(rep.tp + rep.fn);
  rep.specificity = static_cast<double>(rep.tn) /
                    static_cast<double>(rep.tn + rep.fp);
  return rep;
}

// ---------------------------------------------------------------------------
// Welch two-sample t-test. The two-sided p-value comes from the regularized
// incomplete beta function: p = I_{df/(df+t^2)}(df/2, 1/2).

namespace detail {

// Continued fraction for the incomplete beta (Lentz), then the symmetric
// reduction. Absolute error well below 1e-10 over the arguments used here.
inline double ibeta_cf(double a, double b, double x) {
  const double eps = 1e-15;
  const double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

inline double ibeta_reg(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * ibeta_cf(a, b, x) / a;
  return 1.0 - bt * ibeta_cf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// Two-sided p-value for t with df degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw ConfigError("degrees of freedom must be positive");
  if (!std::isfinite(t)) return 0.0;
  return detail::ibeta_reg(0.5 * df, 0.5, df / (df + t * t));
}

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

inline WelchResult welch_t_test(std::span<const double> g0,
                                std::span<const double> g1) {
  if (g0.size() < 2 || g1.size() < 2)
    throw DataError("each group needs at least two values for a t-test");
  const auto moments = [](std::span<const double> g) {
    const double n = static_cast<double>(g.size());
    double mean = 0.0;
    for (double v : g) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : g) ss += (v - mean) * (v - mean);
    return std::pair<double, double>(mean, ss / (n - 1.0));
  };
  const auto [m0, var0] = moments(g0);
  const auto [m1, var1] = moments(g1);
  const double n0 = static_cast<double>(g0.size());
  const double n1 = static_cast<double>(g1.size());

  WelchResult res;
  if (var0 == 0.0 && var1 == 0.0) {
    // Degenerate: identical constants give p = 1, separated constants p = 0.
    res.t = (m0 == m1) ? 0.0 : std::numeric_limits<double>::infinity();
    res.df = n0 + n1 - 2.0;
    res.p = (m0 == m1) ? 1.0 : 0.0;
    return res;
  }
  const double se2 = var0 / n0 + var1 / n1;
  res.t = (m0 - m1) / std::sqrt(se2);
  res.df = se2 * se2 /
           (var0 * var0 / (n0 * n0 * (n0 - 1.0)) +
            var1 * var1 / (n1 * n1 * (n1 - 1.0)));
  res.p = student_t_two_sided_p(res.t, res.df);
  return res;
}

// ---------------------------------------------------------------------------
// Selected-descriptor summary: one row per selected feature, ranked by
// |coefficient|, each with a Welch p-value comparing the raw feature values
// across the two classes.

struct DescriptorEntry {
  std::string name;
  std::size_t column = 0;
  double coefficient = 0.0;
  double p_value = 1.0;
};

struct DescriptorReport {
  std::vector<DescriptorEntry> ranked;
};

inline DescriptorReport descriptor_pvalues(const Dataset& d,
                                           std::span<const double> beta,
                                           std::span<const std::size_t> support) {
  validate(d);
  if (beta.size() != d.p) throw DataError("coefficient length mismatch");
  DescriptorReport rep;
  for (std::size_t j : support) {
    if (j >= d.p) throw DataError("support index out of range");
    std::vector<double> g0, g1;
    const double* c = d.col(j);
    for (std::size_t i = 0; i < d.n; ++i)
      (d.y[i] ? g1 : g0).push_back(c[i]);
    DescriptorEntry e;
    e.name = d.names[j];
    e.column = j;
    e.coefficient = beta[j];
    e.p_value = welch_t_test(g0, g1).p;
    rep.ranked.push_back(e);
  }
  std::stable_sort(rep.ranked.begin(), rep.ranked.end(),
                   [](const DescriptorEntry& a, const DescriptorEntry& b) {
                     return std::fabs(a.coefficient) > std::fabs(b.coefficient);
                   });
  return rep;
}

}  // namespace splogsum
