#include "fbmcap/fbm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "fbmcap/fft.hpp"

namespace fbmcap {

FbmParams::FbmParams(double hurst_, int dim_) : hurst(hurst_), dim(dim_) {
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::invalid_argument("FbmParams: hurst must be in (0, 1)");
  if (dim < 1) throw std::invalid_argument("FbmParams: dim must be >= 1");
}

TimeGrid::TimeGrid(double start_, double step_, std::size_t count_)
    : start(start_), step(step_), count(count_) {
  if (start < 0.0) throw std::invalid_argument("TimeGrid: start must be >= 0");
  if (!(step > 0.0)) throw std::invalid_argument("TimeGrid: step must be > 0");
  if (count < 1) throw std::invalid_argument("TimeGrid: count must be >= 1");
}

double covariance(const FbmParams& params, double t, double s) {
  if (t < 0.0 || s < 0.0)
    throw std::invalid_argument("covariance: times must be nonnegative");
  const double h2 = 2.0 * params.hurst;
  return 0.5 *
         (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

namespace detail {

// fGn autocovariance at lag k for increments of size `step`
static double fgn_autocov(double hurst, double step, std::size_t k) {
  const double h2 = 2.0 * hurst;
  const double kk = static_cast<double>(k);
  const double base = std::pow(kk + 1.0, h2) - 2.0 * std::pow(kk, h2) +
                      std::pow(std::abs(kk - 1.0), h2);
  return 0.5 * std::pow(step, h2) * base;
}

std::vector<double> circulant_eigenvalues(double hurst, double step,
                                          std::size_t m, std::size_t M) {
  if (M < 2 * m) throw std::invalid_argument("embedding order too small");
  std::vector<std::complex<double>> row(M, 0.0);
  for (std::size_t j = 0; j <= M / 2; ++j) row[j] = fgn_autocov(hurst, step, j);
  for (std::size_t j = M / 2 + 1; j < M; ++j) row[j] = row[M - j];
  fft_pow2(row, false);
  std::vector<double> eig(M);
  for (std::size_t j = 0; j < M; ++j) eig[j] = row[j].real();
  return eig;
}

bool clamp_embedding_eigenvalues(std::vector<double>& eig, double rel_tol) {
  double max_eig = 0.0;
  for (double v : eig) max_eig = std::max(max_eig, v);
  for (double& v : eig) {
    if (v < 0.0) {
      if (-v > rel_tol * max_eig) return false;
      v = 0.0;
    }
  }
  return true;
}

}  // namespace detail

namespace {

// Davies-Harte: one exact fGn sample of length m from the embedding
// eigenvalues, consuming normal(0..M-1) of the given stream.
std::vector<double> sample_fgn(const std::vector<double>& eig,
                               const RandomStream& rs, std::size_t m) {
  const std::size_t M = eig.size();
  std::vector<std::complex<double>> xi(M);
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(M));
  xi[0] = std::sqrt(eig[0]) * rs.normal(0) * inv_sqrt_m;
  xi[M / 2] = std::sqrt(eig[M / 2]) * rs.normal(1) * inv_sqrt_m;
  for (std::size_t k = 1; k < M / 2; ++k) {
    const double amp = std::sqrt(0.5 * eig[k]) * inv_sqrt_m;
    xi[k] = std::complex<double>(amp * rs.normal(2 * k),
                                 amp * rs.normal(2 * k + 1));
    xi[M - k] = std::conj(xi[k]);
  }
  fft_pow2(xi, false);
  std::vector<double> fgn(m);
  for (std::size_t i = 0; i < m; ++i) fgn[i] = xi[i].real();
  return fgn;
}

// one component by factoring the full covariance of the positive grid times
std::vector<double> simulate_component_cholesky(
    const TimeGrid& grid, const Eigen::LLT<Eigen::MatrixXd>& llt,
    const RandomStream& rs) {
  const std::size_t n = grid.count;
  std::vector<double> b(n, 0.0);
  const std::size_t i0 = (grid.start == 0.0) ? 1 : 0;  // B_0 = 0 exactly
  const std::size_t np = n - i0;
  if (np == 0) return b;
  Eigen::VectorXd z(np);
  for (std::size_t i = 0; i < np; ++i)
    z(static_cast<Eigen::Index>(i)) = rs.normal(i);
  Eigen::VectorXd v = llt.matrixL() * z;
  for (std::size_t i = 0; i < np; ++i)
    b[i0 + i] = v(static_cast<Eigen::Index>(i));
  return b;
}

Eigen::LLT<Eigen::MatrixXd> factor_grid_covariance(const FbmParams& params,
                                                   const TimeGrid& grid) {
  const std::size_t i0 = (grid.start == 0.0) ? 1 : 0;
  const std::size_t np = grid.count - i0;
  Eigen::MatrixXd K(np, np);
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v =
          covariance(params, grid.time(i0 + i), grid.time(i0 + j));
      K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      K(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (np > 0 && llt.info() != Eigen::Success)
    throw std::runtime_error(
        "simulate_path: covariance matrix not numerically positive definite");
  return llt;
}

}  // namespace

PathSample simulate_path(const FbmParams& params, const TimeGrid& grid,
                         std::uint64_t seed, SimMethod method) {
  PathSample out{params, grid, {}, seed, method, false};
  const std::size_t n = grid.count;
  const std::size_t d = static_cast<std::size_t>(params.dim);
  out.values.assign(n * d, 0.0);

  bool use_circulant = (method == SimMethod::circulant);
  std::size_t offset = 0;   // lattice index of grid.start when simulating from 0
  std::size_t n_ext = n;
  std::vector<double> eig;
  if (use_circulant) {
    if (grid.start > 0.0) {
      const double ratio = grid.start / grid.step;
      const double r = std::round(ratio);
      if (std::abs(ratio - r) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument(
            "simulate_path: circulant method needs start to be a multiple of "
            "step (use cholesky for off-lattice grids)");
      offset = static_cast<std::size_t>(r);
      n_ext = n + offset;
    }
    const std::size_t m = n_ext - 1;
    if (m > 0) {
      const std::size_t M = std::max<std::size_t>(2, next_pow2(2 * m));
      eig = detail::circulant_eigenvalues(params.hurst, grid.step, m, M);
      if (!detail::clamp_embedding_eigenvalues(eig)) {
        use_circulant = false;
        out.used_fallback = true;
        out.method = SimMethod::cholesky;
        offset = 0;
      }
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt;
  if (!use_circulant) llt = factor_grid_covariance(params, grid);

  for (std::size_t c = 0; c < d; ++c) {
    RandomStream rs(derive_seed(seed, c, kStreamComponent));
    std::vector<double> comp;
    if (use_circulant) {
      comp.assign(n_ext, 0.0);
      if (n_ext > 1) {
        const auto fgn = sample_fgn(eig, rs, n_ext - 1);
        for (std::size_t i = 1; i < n_ext; ++i)
          comp[i] = comp[i - 1] + fgn[i - 1];
      }
    } else {
      comp = simulate_component_cholesky(grid, llt, rs);
    }
    for (std::size_t i = 0; i < n; ++i)
      out.values[i * d + c] = comp[offset + i];
  }
  return out;
}

PathSample scale_path(const PathSample& path, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("scale_path: c must be > 0");
  PathSample out = path;
  out.grid = TimeGrid(path.grid.start / c, path.grid.step / c, path.grid.count);
  const double factor = std::pow(c, -path.params.hurst);
  for (double& v : out.values) v *= factor;
  return out;
}

}  // namespace fbmcap
