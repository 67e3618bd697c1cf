#pragma once

#include <cstdint>
#include <vector>

#include "fbmcap/rng.hpp"

namespace fbmcap {

struct FbmParams {
  double hurst;
  int dim;

  FbmParams(double hurst_, int dim_);
};

// Uniform grid start + i*step, i = 0..count-1.
struct TimeGrid {
  double start;
  double step;
  std::size_t count;

  TimeGrid(double start_, double step_, std::size_t count_);

  double time(std::size_t i) const {
    return start + static_cast<double>(i) * step;
  }
  double last() const { return time(count - 1); }
};

enum class SimMethod { circulant, cholesky };

// One d-dimensional trajectory on a grid. values is count x dim, row-major.
struct PathSample {
  FbmParams params;
  TimeGrid grid;
  std::vector<double> values;
  std::uint64_t seed = 0;
  SimMethod method = SimMethod::circulant;
  // set when the circulant embedding was rejected and cholesky took over
  bool used_fallback = false;

  double value(std::size_t i, int c) const {
    return values[i * static_cast<std::size_t>(params.dim) + c];
  }
};

/// E(B_t B_s) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2 for one component.
double covariance(const FbmParams& params, double t, double s);

/// Exact draw of fBm at the grid times. Identical (params, grid, seed,
/// method) give bit-identical output. The circulant method requires the grid
/// to lie on a lattice through 0 (start an integer multiple of step); it
/// simulates from 0 and slices.
PathSample simulate_path(const FbmParams& params, const TimeGrid& grid,
                         std::uint64_t seed,
                         SimMethod method = SimMethod::circulant);

/// Self-similarity: maps {B_t} to {c^{-H} B_{ct}}, i.e. grid times divide by
/// c and values scale by c^{-H}. The result is again fBm on the new grid.
PathSample scale_path(const PathSample& path, double c);

namespace detail {

// Eigenvalues of the circulant embedding of fGn autocovariance; m increments
// of size `step`, embedded in a circulant of power-of-two order M >= 2m.
std::vector<double> circulant_eigenvalues(double hurst, double step,
                                          std::size_t m, std::size_t M);

// Clamp tiny negative eigenvalues in place; returns false when a negative
// eigenvalue is too large to clamp and the caller must fall back.
bool clamp_embedding_eigenvalues(std::vector<double>& eig,
                                 double rel_tol = 1e-10);

}  // namespace detail

}  // namespace fbmcap
