#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "fbmcap/fbm.hpp"

namespace fbmcap {

// The two capacity kernels:
//   log_plus_pow: phi(s) = (max(log(1/s), 0))^k          (the Hd = 1 kernel)
//   riesz:        phi(s) = s^{-k(d-1/H)}                 (the Hd > 1 kernel)
struct Kernel {
  enum class Kind { log_plus_pow, riesz };

  Kind kind;
  int multiplicity;  // k
  double exponent;   // riesz only, stored precomputed

  static Kernel log_pow(int k);
  static Kernel riesz(int k, const FbmParams& params);  // exponent k(d - 1/H)
  static Kernel riesz_with_exponent(int k, double exponent);
};

/// phi(s); +infinity at s = 0, throws on negative s.
double kernel_eval(const Kernel& kernel, double s);

// Atoms with probability weights, the discrete surrogate for a measure mu on
// a compact set. Atoms are n x dim, row-major, pairwise distinct; weights are
// nonnegative and sum to 1.
struct DiscreteMeasure {
  int dim;
  std::vector<double> atoms;
  std::vector<double> weights;

  DiscreteMeasure(int dim_, std::vector<double> atoms_,
                  std::vector<double> weights_);
  static DiscreteMeasure uniform(int dim, std::vector<double> atoms);

  std::size_t size() const { return weights.size(); }
  const double* atom(std::size_t i) const {
    return atoms.data() + i * static_cast<std::size_t>(dim);
  }
};

struct EnergyResult {
  double energy = 0.0;  // may be +infinity sentinel
  Kernel kernel;
  std::size_t n_atoms = 0;
};

/// Double sum  sum_{i != j} w_i w_j phi(|z_i - z_j|). The diagonal is
/// excluded: the atoms stand in for cells of a non-atomic measure, whose
/// diagonal contributes nothing, and phi(0) is infinite.
EnergyResult energy(const DiscreteMeasure& measure, const Kernel& kernel);

struct MinimizeResult {
  DiscreteMeasure measure;       // optimized weights on the given atoms
  EnergyResult energy;           // off-diagonal energy of those weights
  std::vector<double> objective; // descent objective value per iteration
  double final_gap = 0.0;        // Frank-Wolfe duality gap at the last step
  long iterations = 0;
};

/// Frank-Wolfe minimization of the energy quadratic over the probability
/// simplex, starting from uniform weights. Moves toward the steepest-descent
/// vertex with step 2/(iter+2), capped by exact line search so the objective
/// never increases; stops when the duality gap drops below tol.
MinimizeResult minimize_energy(int dim, const std::vector<double>& atoms,
                               const Kernel& kernel, long max_iters,
                               double tol);

/// Pushforward under z -> lambda z: atoms scale, weights stay.
DiscreteMeasure scale_measure(const DiscreteMeasure& measure, double lambda);

enum class TestShape { disk, segment, grid_square, two_points };

/// Deterministic planar point clouds used as concrete compact sets:
/// disk of radius `scale` (golden-angle spiral), segment of length `scale`,
/// square of side `scale` (cell centers), or two points `scale` apart.
std::vector<double> make_test_set(TestShape shape, double scale,
                                  std::size_t n_atoms, std::uint64_t seed);

inline constexpr double kEnergyInfinite =
    std::numeric_limits<double>::infinity();

}  // namespace fbmcap
