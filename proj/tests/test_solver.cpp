#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "splogsum/solver.hpp"

using namespace splogsum;

namespace {

// Gradient of the (1/n)-scaled data term, matching the penalized objective.
std::vector<double> scaled_gradient(const Dataset& d,
                                    const std::vector<double>& beta,
                                    double intercept) {
  std::vector<double> g = nll_gradient(d, beta, intercept);
  for (double& v : g) v /= static_cast<double>(d.n);
  return g;
}

}  // namespace

TEST_CASE("lambda at the all-zero boundary keeps every coefficient at zero",
          "[solver]") {
  const Dataset d = test_helpers::random_dataset(80, 6, 42, {1.0, -1.0});
  const double lmax = lambda_max_zero(d);
  const ModelFit m = fit(d, make_penalty(PenaltyKind::kL1, lmax));
  CHECK(m.support.empty());
  CHECK(m.converged);
  // With no active features the intercept is the log-odds of the class rate.
  double ybar = 0.0;
  for (int yi : d.y) ybar += yi;
  ybar /= static_cast<double>(d.n);
  CHECK(m.intercept == Catch::Approx(std::log(ybar / (1.0 - ybar))).margin(1e-9));

  // Just inside the boundary at least one coefficient activates.
  const ModelFit m2 = fit(d, make_penalty(PenaltyKind::kL1, lmax * 0.98));
  CHECK(!m2.support.empty());
}

TEST_CASE("soft-threshold fit satisfies the subgradient conditions", "[solver]") {
  const Dataset d = test_helpers::random_dataset(120, 8, 7, {1.5, -1.0, 0.8});
  const double lambda = 0.35 * lambda_max_zero(d);
  FitOptions opts;
  opts.tol = 1e-9;
  opts.max_outer = 300;
  const ModelFit m = fit(d, make_penalty(PenaltyKind::kL1, lambda), opts);
  REQUIRE(m.converged);
  REQUIRE(!m.support.empty());

  const std::vector<double> g = scaled_gradient(d, m.beta, m.intercept);
  CHECK(std::fabs(g[0]) < 1e-6);
  for (std::size_t j = 0; j < d.p; ++j) {
    INFO("coordinate " << j << " beta " << m.beta[j]);
    if (m.beta[j] == 0.0)
      CHECK(std::fabs(g[1 + j]) <= lambda + 1e-6);
    else
      CHECK(std::fabs(g[1 + j] + lambda * (m.beta[j] > 0 ? 1.0 : -1.0)) < 1e-5);
  }
}

TEST_CASE("non-convex fits are stationary on their support", "[solver]") {
  const Dataset d = test_helpers::random_dataset(150, 10, 19, {2.0, -1.5, 1.0});
  FitOptions opts;
  opts.tol = 1e-9;
  opts.max_outer = 300;
  for (PenaltyKind kind : {PenaltyKind::kLogsum, PenaltyKind::kHalf}) {
    // The log-sum penalty prices a non-zero coefficient at roughly
    // lambda * log(1 + |b|/epsilon), so it needs a gentler lambda than the
    // soft threshold before anything survives.
    const double lambda = (kind == PenaltyKind::kLogsum ? 0.02 : 0.15) *
                          lambda_max_zero(d);
    const PenaltySpec spec = make_penalty(kind, lambda);
    const ModelFit m = fit(d, spec, opts);
    REQUIRE(m.converged);
    REQUIRE(!m.support.empty());
    const std::vector<double> g = scaled_gradient(d, m.beta, m.intercept);
    CHECK(std::fabs(g[0]) < 1e-6);
    for (std::size_t j : m.support) {
      const double b = m.beta[j];
      const double s = b > 0 ? 1.0 : -1.0;
      const double pen_slope =
          kind == PenaltyKind::kLogsum
              ? spec.lambda * s / (std::fabs(b) + spec.epsilon)
              : spec.lambda * s / (2.0 * std::sqrt(std::fabs(b)));
      INFO(penalty_name(kind) << " coordinate " << j);
      CHECK(std::fabs(g[1 + j] + pen_slope) < 1e-4);
    }
  }
}

TEST_CASE("halving all weights with half the lambda reproduces the fit exactly",
          "[solver]") {
  const Dataset d = test_helpers::random_dataset(90, 6, 3, {1.0, 1.0});
  const double lambda = 0.3 * lambda_max_zero(d);

  const ModelFit base = fit(d, make_penalty(PenaltyKind::kLogsum, lambda));

  FitOptions scaled;
  scaled.sample_weights.assign(d.n, 0.5);
  const PenaltySpec half_spec =
      make_penalty(PenaltyKind::kLogsum, 0.5 * lambda,
                   make_penalty(PenaltyKind::kLogsum, lambda).epsilon);
  const ModelFit halved = fit(d, half_spec, scaled);

  CHECK(halved.beta == base.beta);
  CHECK(halved.intercept == base.intercept);
  CHECK(halved.support == base.support);
}

TEST_CASE("zero-weight rows are exactly inert", "[solver]") {
  const Dataset d = test_helpers::random_dataset(70, 5, 11, {1.2, -0.7});
  const double lambda = 0.25 * lambda_max_zero(d);

  // Same rows plus 30 junk rows at weight zero; the penalty rescales by the
  // row-count ratio so the working objectives coincide term for term.
  Dataset padded = d;
  Rng rng(555);
  const std::size_t extra = 30;
  padded.n = d.n + extra;
  padded.x.assign(padded.n * padded.p, 0.0);
  padded.y.resize(padded.n);
  for (std::size_t j = 0; j < d.p; ++j)
    for (std::size_t i = 0; i < d.n; ++i) padded.at(i, j) = d.at(i, j);
  for (std::size_t i = d.n; i < padded.n; ++i) {
    for (std::size_t j = 0; j < padded.p; ++j) padded.at(i, j) = rng.normal();
    padded.y[i] = i % 2 == 0 ? 1 : 0;
  }

  FitOptions masked;
  masked.sample_weights.assign(padded.n, 1.0);
  for (std::size_t i = d.n; i < padded.n; ++i) masked.sample_weights[i] = 0.0;

  const double lambda_padded =
      lambda * static_cast<double>(d.n) / static_cast<double>(padded.n);
  const PenaltySpec spec = make_penalty(PenaltyKind::kL1, lambda);
  const PenaltySpec spec_padded = make_penalty(PenaltyKind::kL1, lambda_padded);

  const ModelFit base = fit(d, spec);
  const ModelFit padded_fit = fit(padded, spec_padded, masked);
  CHECK(padded_fit.beta == base.beta);
  CHECK(padded_fit.intercept == base.intercept);
}

TEST_CASE("coordinate updates never increase the working objective", "[solver]") {
  // Replays one reweighting pass by hand, recomputing the penalized weighted
  // least-squares objective after every single update. Each update is an
  // exact univariate minimization, so the sequence must be non-increasing.
  const Dataset d = test_helpers::random_dataset(60, 6, 23, {1.0, -1.5});
  const PenaltySpec spec = make_penalty(PenaltyKind::kLogsum, 0.05);
  const std::size_t n = d.n;

  double ybar = 0.0;
  for (int yi : d.y) ybar += yi;
  ybar /= static_cast<double>(n);
  double b0 = std::log(ybar / (1.0 - ybar));
  std::vector<double> beta(d.p, 0.0);
  std::vector<double> eta(n, b0);
  const WorkingSet ws = irls_working_set(d.y, eta);

  const auto working_objective = [&]() {
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double fit_i = b0;
      for (std::size_t j = 0; j < d.p; ++j) fit_i += beta[j] * d.at(i, j);
      const double res = ws.z[i] - fit_i;
      q += ws.w[i] * res * res;
    }
    return 0.5 * q / static_cast<double>(n) +
           penalty_value(spec, beta);
  };

  const double lambda_n = spec.lambda * static_cast<double>(n);
  double prev = working_objective();
  for (int pass = 0; pass < 3; ++pass) {
    {  // intercept update
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double fit_i = b0;
        for (std::size_t j = 0; j < d.p; ++j) fit_i += beta[j] * d.at(i, j);
        num += ws.w[i] * (ws.z[i] - fit_i);
        den += ws.w[i];
      }
      b0 += num / den;
      const double q = working_objective();
      CHECK(q <= prev + 1e-10);
      prev = q;
    }
    for (std::size_t j = 0; j < d.p; ++j) {
      double dj = 0.0, wj = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double other = b0;
        for (std::size_t k = 0; k < d.p; ++k)
          if (k != j) other += beta[k] * d.at(i, k);
        dj += ws.w[i] * d.at(i, j) * d.at(i, j);
        wj += ws.w[i] * d.at(i, j) * (ws.z[i] - other);
      }
      beta[j] = threshold_scalar(spec.kind, lambda_n / dj, spec.epsilon, wj / dj);
      const double q = working_objective();
      INFO("pass " << pass << " coordinate " << j);
      CHECK(q <= prev + 1e-10);
      prev = q;
    }
  }
}

TEST_CASE("warm starts converge immediately at the same solution", "[solver]") {
  const Dataset d = test_helpers::random_dataset(100, 7, 31, {1.0, -2.0});
  const PenaltySpec spec = make_penalty(PenaltyKind::kHalf, 0.05);
  const ModelFit cold = fit(d, spec);
  REQUIRE(cold.converged);

  FitOptions warm;
  warm.warm_beta = cold.beta;
  warm.warm_intercept = cold.intercept;
  const ModelFit rewarm = fit(d, spec, warm);
  CHECK(rewarm.n_outer_iters <= 2);
  for (std::size_t j = 0; j < d.p; ++j)
    CHECK(rewarm.beta[j] == Catch::Approx(cold.beta[j]).margin(1e-6));
}

TEST_CASE("fit reports a finite objective trace and sorted support", "[solver]") {
  const Dataset d = test_helpers::random_dataset(80, 10, 77, {2.5, 1.0, -1.0});
  const ModelFit m = fit(d, make_penalty(PenaltyKind::kLogsum, 0.03));
  CHECK(m.n_outer_iters == static_cast<int>(m.loss_trace.size()));
  for (double v : m.loss_trace) CHECK(std::isfinite(v));
  CHECK(std::is_sorted(m.support.begin(), m.support.end()));
  for (std::size_t j : m.support) CHECK(m.beta[j] != 0.0);

  // Row-wise and dataset-wise predictions agree.
  const std::vector<double> probs = predict_proba(m, d);
  std::vector<double> row(d.p);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < d.p; ++j) row[j] = d.at(i, j);
    CHECK(predict_proba(m, row) == Catch::Approx(probs[i]).margin(1e-12));
  }
}

TEST_CASE("fit validates its inputs", "[solver]") {
  Dataset raw = test_helpers::random_dataset(30, 3, 1, {1.0});
  const PenaltySpec spec = make_penalty(PenaltyKind::kL1, 0.1);

  Dataset unstd = raw;
  unstd.standardized = false;
  unstd.col_means.clear();
  unstd.col_stds.clear();
  CHECK_THROWS_AS(fit(unstd, spec), DataError);

  FitOptions bad_weights;
  bad_weights.sample_weights = {1.0, 2.0};
  CHECK_THROWS_AS(fit(raw, spec, bad_weights), ConfigError);

  FitOptions negative;
  negative.sample_weights.assign(raw.n, 1.0);
  negative.sample_weights[0] = -0.5;
  CHECK_THROWS_AS(fit(raw, spec, negative), ConfigError);

  FitOptions one_class;
  one_class.sample_weights.assign(raw.n, 0.0);
  for (std::size_t i = 0; i < raw.n; ++i)
    if (raw.y[i] == 1) one_class.sample_weights[i] = 1.0;
  CHECK_THROWS_AS(fit(raw, spec, one_class), DataError);

  FitOptions bad_opts;
  bad_opts.tol = 0.0;
  CHECK_THROWS_AS(fit(raw, spec, bad_opts), ConfigError);
}

TEST_CASE("lambda grid is descending from the boundary", "[solver]") {
  const Dataset d = test_helpers::random_dataset(60, 5, 13, {1.0, -1.0});
  const double lmax = lambda_max_zero(d);
  const std::vector<double> grid = lambda_grid(lmax, 8);
  REQUIRE(grid.size() == 8);
  CHECK(grid.front() == lmax);
  CHECK(grid.back() == Catch::Approx(lmax * 1e-3).epsilon(1e-12));
  for (std::size_t k = 1; k < grid.size(); ++k) CHECK(grid[k] < grid[k - 1]);
  CHECK(lambda_grid(lmax, 1) == std::vector<double>{lmax});
  CHECK_THROWS_AS(lambda_grid(lmax, 0), ConfigError);
}

TEST_CASE("stratified folds cover every row with both classes", "[solver]") {
  const Dataset d = test_helpers::random_dataset(90, 4, 17, {1.0});
  const int folds = 5;
  const std::vector<int> assign = stratified_folds(d, folds, 7);
  REQUIRE(assign.size() == d.n);
  std::vector<std::array<int, 2>> counts(folds, {0, 0});
  for (std::size_t i = 0; i < d.n; ++i) {
    REQUIRE(assign[i] >= 0);
    REQUIRE(assign[i] < folds);
    ++counts[static_cast<std::size_t>(assign[i])]
            [static_cast<std::size_t>(d.y[i])];
  }
  for (const auto& c : counts) {
    CHECK(c[0] > 0);
    CHECK(c[1] > 0);
  }
  CHECK(stratified_folds(d, folds, 7) == assign);
  CHECK(stratified_folds(d, folds, 8) != assign);

  Dataset skewed = d;
  for (std::size_t i = 0; i < skewed.n; ++i) skewed.y[i] = i < 3 ? 1 : 0;
  CHECK_THROWS_AS(stratified_folds(skewed, folds, 1), DataError);
}

TEST_CASE("cross-validation is deterministic and self-consistent", "[solver]") {
  const Dataset d = test_helpers::random_dataset(120, 6, 29, {2.0, -1.0});
  const CvResult cv = cross_validate(d, PenaltyKind::kL1, 4, 6, 99);
  REQUIRE(cv.lambda_grid.size() == 6);
  REQUIRE(cv.mean_deviance.size() == 6);
  CHECK(cv.lambda_grid.front() == lambda_max_zero(d));
  for (double v : cv.mean_deviance) {
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
  }
  CHECK(cv.chosen_lambda == cv.lambda_grid[cv.chosen_index]);
  // Chosen index is the first minimum, i.e. ties resolve to larger lambda.
  for (std::size_t k = 0; k < cv.chosen_index; ++k)
    CHECK(cv.mean_deviance[k] > cv.mean_deviance[cv.chosen_index]);

  const CvResult again = cross_validate(d, PenaltyKind::kL1, 4, 6, 99);
  CHECK(again.mean_deviance == cv.mean_deviance);
  CHECK(again.chosen_lambda == cv.chosen_lambda);

  const CvResult single = cross_validate(d, PenaltyKind::kLogsum, 4, 1, 99);
  CHECK(single.lambda_grid == std::vector<double>{lambda_max_zero(d)});
  CHECK(single.chosen_index == 0);
}
