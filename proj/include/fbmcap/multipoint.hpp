#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fbmcap/capacity.hpp"
#include "fbmcap/fbm.hpp"

namespace fbmcap {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Everything a Monte Carlo run of the near-k-tuple functional needs:
//   I_eps = eps^{-kd} int mu(dz) prod_j int_{I_j} 1{|B_s - z| <= eps} ds,
// discretized as a Riemann sum over grid nodes with the indicator evaluated
// at the nodes. grid_step <= eps^{1/H} keeps the per-step RMS displacement
// below ~eps so the indicator cannot be stepped over.
struct MultipointConfig {
  FbmParams params;
  int k = 2;
  double epsilon = 0.1;
  std::vector<Interval> intervals;  // k disjoint, ordered, positive
  double grid_step = 0.0;
  DiscreteMeasure measure;
  long n_paths = 0;
  std::uint64_t seed = 0;

  static std::vector<Interval> default_intervals(int k);  // [2j-1, 2j]
  void validate() const;
};

struct MomentReport {
  double mean_I = 0.0;
  double stderr_I = 0.0;
  double mean_I_sq = 0.0;
  double stderr_I_sq = 0.0;
  double F_part = 0.0;  // atom pairs with |z1 - z2| <= 4 eps
  double S_part = 0.0;  // atom pairs with |z1 - z2| >  4 eps
  double pz_bound = 0.0;  // mean_I^2 / mean_I_sq, the second-moment bound
  double hit_freq = 0.0;  // fraction of paths with I_eps > 0
  long n_paths = 0;
  double epsilon = 0.0;
};

/// Riemann-sum I_eps of one path. Nonnegative; zero as soon as some interval
/// never comes within eps of any atom.
double compute_I_eps(const PathSample& path, const MultipointConfig& config);

// per-path contributions: I, and the exact F/S split of I^2 over atom pairs
struct PathMoments {
  double I = 0.0;
  double F = 0.0;
  double S = 0.0;
};
PathMoments path_moments(const PathSample& path,
                         const MultipointConfig& config);

// reduce per-path moments into a report; batch-means stderr over n_batches
MomentReport assemble_report(const std::vector<PathMoments>& paths,
                             double epsilon, int n_batches = 20);

/// Simulates n_paths independent paths (seeds derived per path index) and
/// estimates E(I_eps), E(I_eps^2) with its F/S decomposition, the
/// Paley-Zygmund lower bound on P(I_eps > 0), and the empirical hit
/// frequency. Identical (config, seed) give identical reports at any thread
/// count.
MomentReport mc_moments(const MultipointConfig& config, int threads = 1);

/// One report per epsilon, decreasing list; the grid step is rescaled per
/// epsilon to keep step/eps^{1/H} fixed, and the master seed is offset by
/// the sweep index.
std::vector<MomentReport> epsilon_sweep(const MultipointConfig& config,
                                        const std::vector<double>& eps_list,
                                        int threads = 1);

// Nearest-to-k-tuple witness: times (one grid node per interval), the
// centroid z* of the k values, and min_spread = max_j |B_{t_j} - z*|.
struct KTupleWitness {
  double min_spread = 0.0;
  std::vector<double> times;
  std::vector<double> center;
};

/// Greedy search over grid tuples, pruned by spatial hashing: every node of
/// the first interval is a candidate center, later intervals contribute
/// their nearest node. min_spread <= eps means a measure with an atom at the
/// returned center makes I_eps positive on this path.
KTupleWitness detect_near_ktuple(const PathSample& path,
                                 const MultipointConfig& config);

}  // namespace fbmcap
