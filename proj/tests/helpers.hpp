#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "splogsum/dataset.hpp"
#include "splogsum/rng.hpp"

namespace test_helpers {

// Small random standardized dataset with a planted logistic signal on the
// first few coefficients; handy across solver-level tests.
inline splogsum::Dataset random_dataset(std::size_t n, std::size_t p,
                                        std::uint64_t seed,
                                        const std::vector<double>& signal = {}) {
  splogsum::Rng rng(seed);
  splogsum::Dataset d;
  d.n = n;
  d.p = p;
  d.x.resize(n * p);
  for (std::size_t j = 0; j < p; ++j) {
    d.names.push_back("f" + std::to_string(j));
    double* c = d.col(j);
    for (std::size_t i = 0; i < n; ++i) c[i] = rng.normal();
  }
  d.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < signal.size() && j < p; ++j)
      eta += signal[j] * d.at(i, j);
    const double f = 1.0 / (1.0 + std::exp(-eta));
    d.y[i] = rng.uniform() < f ? 1 : 0;
  }
  return splogsum::standardize(d).data;
}

}  // namespace test_helpers
