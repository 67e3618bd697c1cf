#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fbmcap/fbm.hpp"

namespace fbmcap {

// Strictly increasing, nonnegative times. May be empty (unconditional case).
struct TimeTuple {
  std::vector<double> times;

  TimeTuple() = default;
  explicit TimeTuple(std::vector<double> times_);

  std::size_t size() const { return times.size(); }
};

struct CovMatrix {
  Eigen::MatrixXd entries;
  bool normalized = false;  // true when rows/cols are scaled to unit variance

  CovMatrix(Eigen::MatrixXd entries_, bool normalized_);

  Eigen::Index order() const { return entries.rows(); }
};

struct LndConfig {
  double t = 0.0;
  std::vector<double> conditioning;
};

// Empirical scan of the two-sided local-nondeterminism bound
//   C0 * min_i |t-s_i|^{2H} <= Var(B_t | B_{s_1..n}) <= min_i |t-s_i|^{2H}.
// min_ratio is the empirical stand-in for the (unknown) constant C0.
struct LndScanResult {
  long configs_tested = 0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  LndConfig argmin;
};

/// Covariance matrix of one component at the tuple's times. Times must be
/// strictly positive; including 0 would make the matrix singular.
CovMatrix build_cov(const FbmParams& params, const TimeTuple& tuple);

/// Var(B_t | B at cond times), the squared L2 distance of B_t from the span
/// of the conditioning variables: Var(B_t) - c^T K^{-1} c via an SPD solve.
/// Empty cond returns the unconditional variance t^{2H}.
double conditional_variance(const FbmParams& params, double t,
                            const TimeTuple& cond);

/// det Cov(B_{t_1},..,B_{t_n}) as Var(B_{t_1}) * prod_j Var(B_{t_j} | past).
double detcov_product(const FbmParams& params, const TimeTuple& tuple);

/// Gershgorin bound: max over rows of diagonal + sum of |off-diagonals|.
/// Always >= the true largest eigenvalue for symmetric matrices.
double gershgorin_max(const CovMatrix& m);

/// Correlation matrix of the normalized variables
///   X_j = B_{s_j}/s_j^H,  Xhat_j = (B_{shat_j}-B_{s_j})/(shat_j-s_j)^H
/// for an interleaved tuple s_1 < shat_1 < ... < s_k < shat_k (2k times).
CovMatrix normalize_increments(const FbmParams& params,
                               const TimeTuple& tuple);

/// Samples random (t; s_1..s_n) configurations with times in [lo, hi] and
/// conditioning sets of size 1..max_cond, skipping near-degenerate configs
/// with min |t-s_i| below 1e-4 of the range. Throws if any ratio exceeds
/// 1 + 1e-8, since the upper bound is a theorem.
LndScanResult lnd_scan(const FbmParams& params, long n_configs, int max_cond,
                       double lo, double hi, std::uint64_t seed,
                       int threads = 1);

}  // namespace fbmcap
