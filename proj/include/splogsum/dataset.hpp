#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <string>
#include <system_error>
#include <vector>

#include <zlib.h>

#include "splogsum/errors.hpp"
#include "splogsum/rng.hpp"

namespace splogsum {

// Design matrix plus binary labels. Feature values are stored column-major so
// the coordinate-descent inner loops walk contiguous memory.
struct Dataset {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> x;            // column-major, size n * p
  std::vector<int> y;               // size n, entries in {0, 1}
  std::vector<std::string> names;   // size p, unique
  bool standardized = false;
  std::vector<double> col_means;    // size p when standardized
  std::vector<double> col_stds;     // size p when standardized

  double at(std::size_t i, std::size_t j) const { return x[j * n + i]; }
  double& at(std::size_t i, std::size_t j) { return x[j * n + i]; }
  const double* col(std::size_t j) const { return x.data() + j * n; }
  double* col(std::size_t j) { return x.data() + j * n; }
};

inline void validate(const Dataset& d) {
  if (d.n < 2) throw DataError("dataset needs at least two rows");
  if (d.p < 1) throw DataError("dataset needs at least one feature column");
  if (d.x.size() != d.n * d.p) throw DataError("feature storage size mismatch");
  if (d.y.size() != d.n) throw DataError("label count does not match row count");
  if (d.names.size() != d.p) throw DataError("feature name count mismatch");
  for (int yi : d.y)
    if (yi != 0 && yi != 1) throw DataError("labels must be 0 or 1");
  std::set<std::string> seen;
  for (const auto& name : d.names)
    if (!seen.insert(name).second)
      throw DataError("duplicate feature name: " + name);
  if (d.standardized &&
      (d.col_means.size() != d.p || d.col_stds.size() != d.p))
    throw DataError("standardization stats missing");
}

inline std::array<std::size_t, 2> class_counts(const Dataset& d) {
  std::array<std::size_t, 2> c{0, 0};
  for (int yi : d.y) ++c[static_cast<std::size_t>(yi)];
  return c;
}

// Rows of `d` given by `rows` (in the given order), all columns.
inline Dataset subset_rows(const Dataset& d, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.n = rows.size();
  out.p = d.p;
  out.names = d.names;
  out.standardized = d.standardized;
  out.col_means = d.col_means;
  out.col_stds = d.col_stds;
  out.x.resize(out.n * out.p);
  out.y.resize(out.n);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= d.n) throw DataError("row index out of range");
    out.y[k] = d.y[rows[k]];
  }
  for (std::size_t j = 0; j < d.p; ++j) {
    const double* src = d.col(j);
    double* dst = out.col(j);
    for (std::size_t k = 0; k < rows.size(); ++k) dst[k] = src[rows[k]];
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV input/output. Plain files or gzip (chosen by a ".gz" suffix); header
// row required; every non-label cell must parse fully as a number.

namespace detail {

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline std::string read_text_file(const std::string& path) {
  if (ends_with(path, ".gz")) {
    gzFile gz = gzopen(path.c_str(), "rb");
    if (!gz) throw DataError("cannot open file: " + path);
    std::string out;
    char buf[1 << 16];
    int got = 0;
    while ((got = gzread(gz, buf, sizeof(buf))) > 0)
      out.append(buf, static_cast<std::size_t>(got));
    const bool bad = got < 0;
    gzclose(gz);
    if (bad) throw DataError("gzip read failed: " + path);
    return out;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::string out((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  return out;
}

inline void write_text_file(const std::string& path, const std::string& body) {
  if (ends_with(path, ".gz")) {
    gzFile gz = gzopen(path.c_str(), "wb");
    if (!gz) throw DataError("cannot open file for writing: " + path);
    const int wrote = gzwrite(gz, body.data(), static_cast<unsigned>(body.size()));
    gzclose(gz);
    if (wrote != static_cast<int>(body.size()))
      throw DataError("gzip write failed: " + path);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw DataError("write failed: " + path);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return s.substr(b, e - b);
}

inline bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// `positive_label`, when non-empty, names the string mapped to class 1; the
// file may then contain exactly one other label string, mapped to class 0.
inline Dataset load_csv(const std::string& path, const std::string& label_column,
                        const std::string& positive_label = "") {
  const std::string body = detail::read_text_file(path);
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : body) {
    if (ch == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
  if (lines.size() < 2) throw DataError(path + ": need a header row and data rows");

  const std::vector<std::string> header = detail::split_csv_line(lines[0]);
  std::size_t label_idx = header.size();
  for (std::size_t j = 0; j < header.size(); ++j)
    if (detail::trim(header[j]) == label_column) {
      label_idx = j;
      break;
    }
  if (label_idx == header.size())
    throw DataError(path + ": label column '" + label_column + "' not found");

  Dataset d;
  d.n = lines.size() - 1;
  d.p = header.size() - 1;
  if (d.p < 1) throw DataError(path + ": no feature columns");
  for (std::size_t j = 0; j < header.size(); ++j)
    if (j != label_idx) d.names.push_back(detail::trim(header[j]));
  d.x.resize(d.n * d.p);
  d.y.resize(d.n);

  std::string negative_label;  // learned from the file when mapping strings
  for (std::size_t r = 0; r < d.n; ++r) {
    const std::vector<std::string> fields = detail::split_csv_line(lines[r + 1]);
    if (fields.size() != header.size())
      throw DataError(path + ": row " + std::to_string(r + 2) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    std::size_t out_j = 0;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (j == label_idx) {
        const std::string cell = detail::trim(fields[j]);
        if (!positive_label.empty()) {
          if (cell == positive_label) {
            d.y[r] = 1;
          } else {
            if (negative_label.empty()) negative_label = cell;
            if (cell != negative_label)
              throw DataError(path + ": more than two label values (row " +
                              std::to_string(r + 2) + ": '" + cell + "')");
            d.y[r] = 0;
          }
        } else {
          double v = 0.0;
          if (!detail::parse_double(cell, v) || (v != 0.0 && v != 1.0))
            throw DataError(path + ": label at row " + std::to_string(r + 2) +
                            " is '" + cell + "', expected 0 or 1");
          d.y[r] = static_cast<int>(v);
        }
        continue;
      }
      double v = 0.0;
      if (!detail::parse_double(fields[j], v))
        throw DataError(path + ": non-numeric value at row " +
                        std::to_string(r + 2) + ", column " +
                        std::to_string(j + 1) + " ('" + detail::trim(fields[j]) +
                        "')");
      d.at(r, out_j) = v;
      ++out_j;
    }
  }
  validate(d);
  return d;
}

// Label column is written first, named `label_column`. Values use %.17g so a
// round trip through load_csv reproduces every double exactly.
inline void save_csv(const Dataset& d, const std::string& path,
                     const std::string& label_column = "label") {
  validate(d);
  std::string body;
  body.reserve(d.n * d.p * 8);
  body += label_column;
  for (const auto& name : d.names) {
    body += ',';
    body += name;
  }
  body += '\n';
  for (std::size_t i = 0; i < d.n; ++i) {
    body += d.y[i] ? '1' : '0';
    for (std::size_t j = 0; j < d.p; ++j) {
      body += ',';
      body += detail::format_double(d.at(i, j));
    }
    body += '\n';
  }
  detail::write_text_file(path, body);
}

// ---------------------------------------------------------------------------
// Standardization: centre each column and scale by the population standard
// deviation (divisor n), so each retained column has sum of squares n.
// Near-constant columns carry no signal and would divide by ~0, so they are
// dropped and reported.

struct StandardizeResult {
  Dataset data;
  std::vector<std::string> dropped_names;
  std::vector<std::size_t> kept_indices;  // into the original column order
};

inline constexpr double kConstantColumnStd = 1e-12;

inline StandardizeResult standardize(const Dataset& d) {
  validate(d);
  if (d.standardized) throw DataError("dataset is already standardized");

  StandardizeResult res;
  std::vector<double> means(d.p), stds(d.p);
  for (std::size_t j = 0; j < d.p; ++j) {
    const double* c = d.col(j);
    double mean = 0.0;
    for (std::size_t i = 0; i < d.n; ++i) mean += c[i];
    mean /= static_cast<double>(d.n);
    double ss = 0.0;
    for (std::size_t i = 0; i < d.n; ++i) {
      const double dv = c[i] - mean;
      ss += dv * dv;
    }
    means[j] = mean;
    stds[j] = std::sqrt(ss / static_cast<double>(d.n));
    if (stds[j] > kConstantColumnStd)
      res.kept_indices.push_back(j);
    else
      res.dropped_names.push_back(d.names[j]);
  }
  if (res.kept_indices.empty())
    throw DataError("all feature columns are constant");

  Dataset out;
  out.n = d.n;
  out.p = res.kept_indices.size();
  out.y = d.y;
  out.standardized = true;
  out.x.resize(out.n * out.p);
  for (std::size_t k = 0; k < res.kept_indices.size(); ++k) {
    const std::size_t j = res.kept_indices[k];
    out.names.push_back(d.names[j]);
    out.col_means.push_back(means[j]);
    out.col_stds.push_back(stds[j]);
    const double* src = d.col(j);
    double* dst = out.col(k);
    for (std::size_t i = 0; i < d.n; ++i)
      dst[i] = (src[i] - means[j]) / stds[j];
  }
  res.data = std::move(out);
  return res;
}

// Applies a training-set standardization to new raw data: same columns kept,
// same means and scales. Used for held-out folds and test splits.
inline Dataset apply_standardization(const Dataset& raw,
                                     const StandardizeResult& ref) {
  validate(raw);
  if (raw.standardized) throw DataError("dataset is already standardized");
  if (raw.p < ref.data.p + ref.dropped_names.size() &&
      raw.p != ref.data.p + ref.dropped_names.size())
    throw DataError("column count does not match the standardization reference");
  Dataset out;
  out.n = raw.n;
  out.p = ref.data.p;
  out.y = raw.y;
  out.standardized = true;
  out.names = ref.data.names;
  out.col_means = ref.data.col_means;
  out.col_stds = ref.data.col_stds;
  out.x.resize(out.n * out.p);
  for (std::size_t k = 0; k < ref.kept_indices.size(); ++k) {
    const std::size_t j = ref.kept_indices[k];
    if (j >= raw.p) throw DataError("standardization reference column out of range");
    if (raw.names[j] != ref.data.names[k])
      throw DataError("column name mismatch against standardization reference: " +
                      raw.names[j] + " vs " + ref.data.names[k]);
    const double* src = raw.col(j);
    double* dst = out.col(k);
    for (std::size_t i = 0; i < raw.n; ++i)
      dst[i] = (src[i] - out.col_means[k]) / out.col_stds[k];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stratified train/test split.

struct SplitPair {
  Dataset train;
  Dataset test;
  double train_fraction = 0.0;
  std::uint64_t seed = 0;
};

// Per-class train counts follow largest-remainder apportionment of the total
// round(fraction * n): every class keeps floor(fraction * count) rows, then
// leftover slots go to the classes with the largest fractional remainders
// (ties favour the lower class index). Row order within each side preserves
// the original order.
inline SplitPair split(const Dataset& d, double train_fraction,
                       std::uint64_t seed) {
  validate(d);
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
    throw ConfigError("train fraction must lie strictly between 0 and 1");
  const auto counts = class_counts(d);
  if (counts[0] < 2 || counts[1] < 2)
    throw DataError("each class needs at least two rows to stratify a split");

  const std::size_t total_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(d.n)));
  double exact[2];
  std::size_t take[2];
  for (int c = 0; c < 2; ++c) {
    exact[c] = train_fraction * static_cast<double>(counts[c]);
    take[c] = static_cast<std::size_t>(std::floor(exact[c]));
  }
  std::size_t assigned = take[0] + take[1];
  // At most two leftover slots across two classes.
  while (assigned < total_train) {
    const double r0 = exact[0] - std::floor(exact[0]);
    const double r1 = exact[1] - std::floor(exact[1]);
    const bool zero_first =
        (take[0] < counts[0]) && (r0 >= r1 || take[1] >= counts[1]);
    ++take[zero_first ? 0 : 1];
    ++assigned;
    if (zero_first)
      exact[0] = std::floor(exact[0]);  // remainder consumed
    else
      exact[1] = std::floor(exact[1]);
  }

  std::vector<std::size_t> class_rows[2];
  for (std::size_t i = 0; i < d.n; ++i)
    class_rows[static_cast<std::size_t>(d.y[i])].push_back(i);

  std::vector<std::size_t> train_rows, test_rows;
  for (int c = 0; c < 2; ++c) {
    Rng rng(derive_seed(seed, streams::kSplit, static_cast<std::uint64_t>(c)));
    std::vector<std::size_t> rows = class_rows[static_cast<std::size_t>(c)];
    rng.shuffle(rows);
    rows.resize(take[c]);
    std::sort(rows.begin(), rows.end());
    std::vector<char> in_train(d.n, 0);
    for (std::size_t r : rows) in_train[r] = 1;
    for (std::size_t r : class_rows[static_cast<std::size_t>(c)]) {
      if (in_train[r])
        train_rows.push_back(r);
      else
        test_rows.push_back(r);
    }
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());

  SplitPair pair;
  pair.train = subset_rows(d, train_rows);
  pair.test = subset_rows(d, test_rows);
  pair.train_fraction = train_fraction;
  pair.seed = seed;
  return pair;
}

}  // namespace splogsum
