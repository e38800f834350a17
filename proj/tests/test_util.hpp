#ifndef LOWRANKBP_TEST_UTIL_HPP
#define LOWRANKBP_TEST_UTIL_HPP

#include "lowrankbp/core.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testutil {

using lowrankbp::Matrix;
using lowrankbp::Vector;

inline Matrix gaussian_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n01;
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = n01(rng);
  return m;
}

inline Vector gaussian_vector(std::mt19937_64& rng, int n) { return gaussian_matrix(rng, n, 1).col(0); }

inline lowrankbp::Subspace random_subspace(std::mt19937_64& rng, int d, int k) {
  return lowrankbp::orthonormalize(gaussian_matrix(rng, d, k));
}

/// Uniform size-s subset of {0, ..., d-1} by rejection, independent of the library's sampler.
inline std::vector<int> random_subset(std::mt19937_64& rng, int d, int s) {
  std::vector<int> all(d);
  for (int i = 0; i < d; ++i) all[i] = i;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(s);
  std::sort(all.begin(), all.end());
  return all;
}

inline double binom(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  double out = 1.0;
  for (int i = 1; i <= r; ++i) out = out * (n - r + i) / i;
  return out;
}

}  // namespace testutil

#endif
