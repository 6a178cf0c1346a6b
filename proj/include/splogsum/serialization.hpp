#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "splogsum/dataset.hpp"
#include "splogsum/metrics.hpp"
#include "splogsum/sim.hpp"
#include "splogsum/solver.hpp"
#include "splogsum/spl.hpp"

namespace splogsum {

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline std::string format_sig(double v, int digits = 17) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Model JSON. Coefficients are reported on the standardized scale and, when
// the training standardization is known, also on the raw-feature scale:
//   b_j = beta_j / s_j,   b_0 = beta_0 - sum_j beta_j * m_j / s_j.
// Only the support appears; every absent feature has coefficient zero.

inline ordered_json model_to_json(const ModelFit& m, const Dataset& train) {
  ordered_json out;
  out["penalty"] = penalty_name(m.spec.kind);
  out["lambda"] = m.spec.lambda;
  if (m.spec.kind == PenaltyKind::kLogsum) out["epsilon"] = m.spec.epsilon;
  out["intercept"] = m.intercept;

  double raw_intercept = m.intercept;
  ordered_json coefs = ordered_json::array();
  for (std::size_t j : m.support) {
    ordered_json entry;
    entry["name"] = train.names[j];
    entry["value"] = m.beta[j];
    if (train.standardized) {
      const double raw = m.beta[j] / train.col_stds[j];
      entry["value_destandardized"] = raw;
      raw_intercept -= raw * train.col_means[j];
    }
    coefs.push_back(entry);
  }
  if (train.standardized) out["intercept_destandardized"] = raw_intercept;
  out["coefficients"] = coefs;
  out["converged"] = m.converged;
  out["n_outer_iters"] = m.n_outer_iters;
  return out;
}

// A saved model reduced to what prediction on raw features needs.
struct RawModel {
  std::string penalty;
  double intercept = 0.0;                // raw-feature scale
  std::vector<std::string> names;
  std::vector<double> coefficients;      // raw-feature scale
};

inline RawModel raw_model_from_json(const ordered_json& j) {
  RawModel m;
  try {
    m.penalty = j.at("penalty").get<std::string>();
    m.intercept = j.contains("intercept_destandardized")
                      ? j.at("intercept_destandardized").get<double>()
                      : j.at("intercept").get<double>();
    for (const auto& entry : j.at("coefficients")) {
      m.names.push_back(entry.at("name").get<std::string>());
      m.coefficients.push_back(entry.contains("value_destandardized")
                                   ? entry.at("value_destandardized").get<double>()
                                   : entry.at("value").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model JSON: ") + e.what());
  }
  return m;
}

// Applies a raw-scale model to un-standardized data, matching features by
// column name.
inline std::vector<double> raw_model_scores(const RawModel& m, const Dataset& d) {
  std::vector<std::size_t> cols(m.names.size());
  for (std::size_t k = 0; k < m.names.size(); ++k) {
    bool found = false;
    for (std::size_t j = 0; j < d.p; ++j)
      if (d.names[j] == m.names[k]) {
        cols[k] = j;
        found = true;
        break;
      }
    if (!found) throw DataError("model feature missing from data: " + m.names[k]);
  }
  std::vector<double> scores(d.n);
  for (std::size_t i = 0; i < d.n; ++i) {
    double eta = m.intercept;
    for (std::size_t k = 0; k < cols.size(); ++k)
      eta += m.coefficients[k] * d.at(i, cols[k]);
    scores[i] = sigmoid(eta);
  }
  return scores;
}

inline ordered_json cv_to_json(const CvResult& cv) {
  ordered_json out;
  out["penalty"] = penalty_name(cv.kind);
  out["folds"] = cv.folds;
  out["seed"] = cv.seed;
  out["lambda_grid"] = cv.lambda_grid;
  out["mean_deviance"] = cv.mean_deviance;
  out["chosen_lambda"] = cv.chosen_lambda;
  out["chosen_index"] = cv.chosen_index;
  return out;
}

inline ordered_json drop_report_to_json(const StandardizeResult& st) {
  ordered_json out;
  out["dropped_count"] = st.dropped_names.size();
  out["dropped_names"] = st.dropped_names;
  return out;
}

// ---------------------------------------------------------------------------
// CSV report writers. All numeric cells use %.17g so identical runs produce
// identical bytes.

inline std::string metrics_csv(
    const std::vector<std::pair<std::string, ClassificationReport>>& rows) {
  std::string s = "split,auc,accuracy,sensitivity,specificity,cutoff,tp,fp,tn,fn\n";
  for (const auto& [name, r] : rows) {
    s += name;
    s += ',' + detail::format_sig(r.auc);
    s += ',' + detail::format_sig(r.accuracy);
    s += ',' + detail::format_sig(r.sensitivity);
    s += ',' + detail::format_sig(r.specificity);
    s += ',' + detail::format_sig(r.cutoff);
    s += ',' + std::to_string(r.tp);
    s += ',' + std::to_string(r.fp);
    s += ',' + std::to_string(r.tn);
    s += ',' + std::to_string(r.fn);
    s += '\n';
  }
  return s;
}

inline std::string descriptors_csv(const DescriptorReport& rep) {
  std::string s = "rank,name,coefficient,p_value\n";
  for (std::size_t k = 0; k < rep.ranked.size(); ++k) {
    const DescriptorEntry& e = rep.ranked[k];
    s += std::to_string(k + 1);
    s += ',' + e.name;
    s += ',' + detail::format_sig(e.coefficient);
    s += ',' + detail::format_sig(e.p_value);
    s += '\n';
  }
  return s;
}

inline std::string spl_history_csv(const SplState& state) {
  std::string s = "age_index,gamma,selected_count,newly_added\n";
  for (const SplAgeRecord& rec : state.history) {
    s += std::to_string(rec.age_index);
    s += ',' + detail::format_sig(rec.gamma);
    s += ',' + std::to_string(rec.selected_count);
    s += ',';
    for (std::size_t k = 0; k < rec.newly_added.size(); ++k) {
      if (k) s += ';';
      s += std::to_string(rec.newly_added[k]);
    }
    s += '\n';
  }
  return s;
}

inline std::string bench_results_csv(const std::vector<BenchRow>& rows) {
  std::string s =
      "n,rho,sigma,method,auc,sensitivity,specificity,accuracy,"
      "beta_sensitivity,beta_specificity,replications,seed_base\n";
  for (const BenchRow& r : rows) {
    s += std::to_string(r.cell.n);
    s += ',' + detail::format_sig(r.cell.rho);
    s += ',' + detail::format_sig(r.cell.sigma);
    s += ',';
    s += method_name(r.method);
    s += ',' + detail::format_sig(r.auc);
    s += ',' + detail::format_sig(r.sensitivity);
    s += ',' + detail::format_sig(r.specificity);
    s += ',' + detail::format_sig(r.accuracy);
    s += ',' + detail::format_sig(r.beta_sensitivity);
    s += ',' + detail::format_sig(r.beta_specificity);
    s += ',' + std::to_string(r.replications);
    s += ',' + std::to_string(r.seed_base);
    s += '\n';
  }
  return s;
}

inline std::string bench_selected_csv(const std::vector<BenchRow>& rows) {
  std::string s = "n,rho,sigma,method,mean_selected,replications\n";
  for (const BenchRow& r : rows) {
    s += std::to_string(r.cell.n);
    s += ',' + detail::format_sig(r.cell.rho);
    s += ',' + detail::format_sig(r.cell.sigma);
    s += ',';
    s += method_name(r.method);
    s += ',' + detail::format_sig(r.mean_selected);
    s += ',' + std::to_string(r.replications);
    s += '\n';
  }
  return s;
}

inline ordered_json truth_to_json(const TrueModel& truth,
                                  const std::vector<std::size_t>& flipped,
                                  std::uint64_t seed) {
  ordered_json out;
  out["beta_true"] = truth.beta;
  out["support"] = truth.support;
  out["intercept"] = truth.intercept;
  out["flipped_rows"] = flipped;
  out["seed"] = seed;
  return out;
}

}  // namespace splogsum
