#pragma once

// Test-side oracles, deliberately independent of the library internals they
// check: plain-loop energy sums, a hand-rolled LU determinant, power
// iteration, the two-sample KS statistic, and a jackknife covariance check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "fbmcap/capacity.hpp"
#include "fbmcap/fbm.hpp"
#include "fbmcap/rng.hpp"

namespace testutil {

// literal double sum over ordered pairs, no symmetry shortcut
inline double brute_force_energy(const fbmcap::DiscreteMeasure& mu,
                                 const fbmcap::Kernel& kernel) {
  double total = 0.0;
  const std::size_t n = mu.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double r2 = 0.0;
      for (int c = 0; c < mu.dim; ++c) {
        const double d = mu.atom(i)[c] - mu.atom(j)[c];
        r2 += d * d;
      }
      total += mu.weights[i] * mu.weights[j] *
               fbmcap::kernel_eval(kernel, std::sqrt(r2));
    }
  return total;
}

// determinant by partial-pivot LU, independent of any library routine
inline double lu_determinant(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) return 0.0;
    if (piv != col) {
      std::swap(a[piv], a[col]);
      det = -det;
    }
    det *= a[col][col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
    }
  }
  return det;
}

// largest eigenvalue of a symmetric matrix by power iteration
inline double power_iteration_max(const std::vector<std::vector<double>>& m,
                                  int iters = 500) {
  const std::size_t n = m.size();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = 1.0 + 1e-3 * static_cast<double>(i);  // break symmetry ties
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) w[i] += m[i][j] * v[j];
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
    lambda = norm;
  }
  return lambda;
}

// two-sample Kolmogorov-Smirnov statistic
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    const double fa = static_cast<double>(i) / static_cast<double>(a.size());
    const double fb = static_cast<double>(j) / static_cast<double>(b.size());
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

// Empirical covariance check over component 0 of generated paths, with
// standard errors over path batches. For equal batch sizes the
// delete-one-batch jackknife SE reduces to sd(batch means)/sqrt(B), which is
// what this computes. Returns the largest |empirical - analytic| / SE.
inline double max_cov_zscore_gen(
    const fbmcap::FbmParams& params, const fbmcap::TimeGrid& grid,
    long n_paths, int n_batches,
    const std::function<fbmcap::PathSample(long)>& make_path) {
  const std::size_t g = grid.count;
  const std::size_t nb = static_cast<std::size_t>(n_batches);
  std::vector<std::vector<double>> batch_mean(nb,
                                              std::vector<double>(g * g, 0.0));
  std::vector<long> batch_n(nb, 0);
  for (long p = 0; p < n_paths; ++p) {
    const auto path = make_path(p);
    const std::size_t b = static_cast<std::size_t>(p) * nb /
                          static_cast<std::size_t>(n_paths);
    ++batch_n[b];
    for (std::size_t i = 0; i < g; ++i)
      for (std::size_t j = 0; j < g; ++j)
        batch_mean[b][i * g + j] += path.value(i, 0) * path.value(j, 0);
  }
  for (std::size_t b = 0; b < nb; ++b)
    for (double& v : batch_mean[b]) v /= static_cast<double>(batch_n[b]);

  double worst = 0.0;
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < g; ++j) {
      double mean = 0.0;
      for (std::size_t b = 0; b < nb; ++b) mean += batch_mean[b][i * g + j];
      mean /= static_cast<double>(nb);
      double var = 0.0;
      for (std::size_t b = 0; b < nb; ++b) {
        const double d = batch_mean[b][i * g + j] - mean;
        var += d * d;
      }
      var /= static_cast<double>(nb - 1);
      const double se = std::sqrt(var / static_cast<double>(nb));
      const double analytic =
          fbmcap::covariance(params, grid.time(i), grid.time(j));
      if (se == 0.0) continue;
      worst = std::max(worst, std::abs(mean - analytic) / se);
    }
  return worst;
}

inline double max_cov_zscore(const fbmcap::FbmParams& params,
                             const fbmcap::TimeGrid& grid, long n_paths,
                             std::uint64_t seed, fbmcap::SimMethod method,
                             int n_batches = 25) {
  return max_cov_zscore_gen(
      params, grid, n_paths, n_batches, [&](long p) {
        return fbmcap::simulate_path(
            params, grid,
            fbmcap::derive_seed(seed, static_cast<std::uint64_t>(p),
                                fbmcap::kStreamPath),
            method);
      });
}

}  // namespace testutil
