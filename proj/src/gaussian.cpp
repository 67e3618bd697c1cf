#include "fbmcap/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace fbmcap {

namespace {

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXld = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

long double cov_ld(double hurst, double t, double s) {
  const long double h2 = 2.0L * static_cast<long double>(hurst);
  return 0.5L * (std::pow(static_cast<long double>(t), h2) +
                 std::pow(static_cast<long double>(s), h2) -
                 std::pow(std::abs(static_cast<long double>(t - s)), h2));
}

// Var(B_t | B at cond times) in extended precision. The ratio tests divide
// by min-gap^{2H}, which amplifies round-off when the gap is small relative
// to t; the extra mantissa keeps the theorem-level bounds clean.
long double conditional_variance_impl(const FbmParams& params, double t,
                                      const std::vector<double>& cond) {
  if (t < 0.0)
    throw std::invalid_argument("conditional_variance: t must be >= 0");
  const long double var_t = cov_ld(params.hurst, t, t);
  const std::size_t n = cond.size();
  if (n == 0) return var_t;

  MatrixXld K(n, n);
  VectorXld c(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (cond[i] == t)
      throw std::invalid_argument(
          "conditional_variance: conditioning time equals t");
    c(static_cast<Eigen::Index>(i)) = cov_ld(params.hurst, t, cond[i]);
    for (std::size_t j = 0; j <= i; ++j) {
      const long double v = cov_ld(params.hurst, cond[i], cond[j]);
      K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      K(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  Eigen::LDLT<MatrixXld> ldlt(K);
  if (ldlt.info() != Eigen::Success ||
      ldlt.vectorD().minCoeff() <= 1e-14L * std::max(1.0L, ldlt.vectorD().maxCoeff()))
    throw std::runtime_error(
        "conditional_variance: near-degenerate conditioning set");
  const long double reduction = c.dot(ldlt.solve(c));
  long double v = var_t - reduction;
  if (v < 0.0L) v = 0.0L;  // projection residual, tiny negatives are round-off
  return v;
}

}  // namespace

TimeTuple::TimeTuple(std::vector<double> times_) : times(std::move(times_)) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0)
      throw std::invalid_argument("TimeTuple: times must be nonnegative");
    if (i > 0 && times[i] <= times[i - 1])
      throw std::invalid_argument("TimeTuple: times must be strictly increasing");
  }
}

CovMatrix::CovMatrix(Eigen::MatrixXd entries_, bool normalized_)
    : entries(std::move(entries_)), normalized(normalized_) {
  const Eigen::Index n = entries.rows();
  if (n == 0 || entries.cols() != n)
    throw std::invalid_argument("CovMatrix: matrix must be square, nonempty");
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  if ((entries - entries.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale)
    throw std::invalid_argument("CovMatrix: matrix must be symmetric");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(entries(i, i) > 0.0))
      throw std::invalid_argument("CovMatrix: diagonal must be positive");
    if (normalized && entries(i, i) != 1.0)
      throw std::invalid_argument("CovMatrix: normalized diagonal must be 1");
  }
}

CovMatrix build_cov(const FbmParams& params, const TimeTuple& tuple) {
  const std::size_t n = tuple.size();
  if (n == 0) throw std::invalid_argument("build_cov: tuple must be nonempty");
  if (tuple.times.front() <= 0.0)
    throw std::invalid_argument(
        "build_cov: time 0 gives a singular row; times must be positive");
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = covariance(params, tuple.times[i], tuple.times[j]);
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  return CovMatrix(std::move(m), false);
}

double conditional_variance(const FbmParams& params, double t,
                            const TimeTuple& cond) {
  return static_cast<double>(conditional_variance_impl(params, t, cond.times));
}

double detcov_product(const FbmParams& params, const TimeTuple& tuple) {
  const std::size_t n = tuple.size();
  if (n == 0)
    throw std::invalid_argument("detcov_product: tuple must be nonempty");
  if (tuple.times.front() <= 0.0)
    throw std::invalid_argument("detcov_product: times must be positive");
  long double det = cov_ld(params.hurst, tuple.times[0], tuple.times[0]);
  std::vector<double> past;
  past.reserve(n);
  past.push_back(tuple.times[0]);
  for (std::size_t j = 1; j < n; ++j) {
    det *= conditional_variance_impl(params, tuple.times[j], past);
    past.push_back(tuple.times[j]);
  }
  return static_cast<double>(det);
}

double gershgorin_max(const CovMatrix& m) {
  const Eigen::Index n = m.order();
  double bound = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = m.entries(i, i);
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) row += std::abs(m.entries(i, j));
    bound = std::max(bound, row);
  }
  return bound;
}

CovMatrix normalize_increments(const FbmParams& params,
                               const TimeTuple& tuple) {
  const std::size_t n = tuple.size();
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument(
        "normalize_increments: need an interleaved tuple of 2k times");
  if (tuple.times.front() <= 0.0)
    throw std::invalid_argument("normalize_increments: times must be positive");
  const std::size_t k = n / 2;
  const double h = params.hurst;

  // variable r is (a_r, b_r) with value (B_{b_r} - B_{a_r}) / (b_r - a_r)^H;
  // the plain B_{s_j}/s_j^H rows use a_r = 0.
  std::vector<double> lo(n), hi(n), sd(n);
  for (std::size_t j = 0; j < k; ++j) {
    const double s = tuple.times[2 * j];
    const double shat = tuple.times[2 * j + 1];
    lo[2 * j] = 0.0;
    hi[2 * j] = s;
    sd[2 * j] = std::pow(s, h);
    lo[2 * j + 1] = s;
    hi[2 * j + 1] = shat;
    sd[2 * j + 1] = std::pow(shat - s, h);
  }

  auto cov_incr = [&](std::size_t r, std::size_t q) {
    // Cov(B_b - B_a, B_d - B_c) by bilinearity
    return covariance(params, hi[r], hi[q]) - covariance(params, hi[r], lo[q]) -
           covariance(params, lo[r], hi[q]) + covariance(params, lo[r], lo[q]);
  };

  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double v = cov_incr(i, j) / (sd[i] * sd[j]);
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return CovMatrix(std::move(m), true);
}

namespace {

struct LndSample {
  double ratio;
  LndConfig config;
};

LndSample lnd_one_config(const FbmParams& params, int max_cond, double lo,
                         double hi, std::uint64_t config_seed) {
  RandomStream rs(config_seed);
  const double range = hi - lo;
  const double exclusion = 1e-4 * range;
  std::uint64_t draw = 0;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double t = lo + rs.uniform(draw++) * range;
    const int n_cond = 1 + static_cast<int>(rs.uniform(draw++) * max_cond);
    std::vector<double> cond(static_cast<std::size_t>(n_cond));
    for (double& s : cond) s = lo + rs.uniform(draw++) * range;
    std::sort(cond.begin(), cond.end());

    double min_gap = std::numeric_limits<double>::infinity();
    bool distinct = true;
    for (std::size_t i = 0; i < cond.size(); ++i) {
      min_gap = std::min(min_gap, std::abs(t - cond[i]));
      if (i > 0 && cond[i] <= cond[i - 1]) distinct = false;
    }
    if (!distinct || min_gap < exclusion) continue;

    double var;
    try {
      var = static_cast<double>(
          conditional_variance_impl(params, t, cond));
    } catch (const std::runtime_error&) {
      continue;  // conditioning times landed too close together; redraw
    }
    const double ratio = var / std::pow(min_gap, 2.0 * params.hurst);
    return {ratio, LndConfig{t, std::move(cond)}};
  }
  throw std::runtime_error("lnd_scan: could not sample a valid configuration");
}

}  // namespace

LndScanResult lnd_scan(const FbmParams& params, long n_configs, int max_cond,
                       double lo, double hi, std::uint64_t seed, int threads) {
  if (n_configs < 1)
    throw std::invalid_argument("lnd_scan: n_configs must be >= 1");
  if (max_cond < 1)
    throw std::invalid_argument("lnd_scan: max_cond must be >= 1");
  if (!(lo > 0.0) || !(hi > lo))
    throw std::invalid_argument("lnd_scan: need 0 < lo < hi");

  std::vector<LndSample> samples(static_cast<std::size_t>(n_configs),
                                 LndSample{0.0, {}});
  const int n_threads = std::max(1, threads);
  auto worker = [&](long begin, long end) {
    for (long i = begin; i < end; ++i)
      samples[static_cast<std::size_t>(i)] = lnd_one_config(
          params, max_cond, lo, hi,
          derive_seed(seed, static_cast<std::uint64_t>(i), kStreamLndConfig));
  };
  if (n_threads == 1) {
    worker(0, n_configs);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (n_configs + n_threads - 1) / n_threads;
    for (int th = 0; th < n_threads; ++th) {
      const long b = th * chunk;
      const long e = std::min(n_configs, b + chunk);
      if (b < e) pool.emplace_back(worker, b, e);
    }
    for (auto& t : pool) t.join();
  }

  LndScanResult out;
  out.configs_tested = n_configs;
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.max_ratio = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    if (s.ratio < out.min_ratio) {
      out.min_ratio = s.ratio;
      out.argmin = s.config;
    }
    out.max_ratio = std::max(out.max_ratio, s.ratio);
  }
  if (out.max_ratio > 1.0 + 1e-8)
    throw std::logic_error(
        "lnd_scan: ratio exceeded the theorem's upper bound 1; this signals "
        "an implementation bug");
  return out;
}

}  // namespace fbmcap
