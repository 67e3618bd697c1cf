#include "fbmcap/multipoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "fbmcap/spatial_hash.hpp"

namespace fbmcap {

// ---------------------------------------------------------------------------
// SpatialHash

SpatialHash::SpatialHash(int dim, double cell, std::vector<double> points)
    : dim_(dim), cell_(cell), pts_(std::move(points)) {
  n_ = pts_.size() / static_cast<std::size_t>(dim_);
  std::vector<std::int64_t> c(static_cast<std::size_t>(dim_));
  for (std::size_t i = 0; i < n_; ++i) {
    for (int k = 0; k < dim_; ++k)
      c[static_cast<std::size_t>(k)] = cell_coord(pts_[i * dim_ + k]);
    buckets_[cell_key(c)].push_back(static_cast<int>(i));
  }
}

std::int64_t SpatialHash::cell_coord(double x) const {
  return static_cast<std::int64_t>(std::floor(x / cell_));
}

std::uint64_t SpatialHash::cell_key(const std::vector<std::int64_t>& c) const {
  std::uint64_t h = 0x9E3779B97F4A7C15ull;
  for (std::int64_t v : c) {
    std::uint64_t x = static_cast<std::uint64_t>(v);
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 31;
    h = (h ^ x) * 0x94D049BB133111EBull;
  }
  return h;
}

double SpatialHash::dist2(const double* a, std::size_t idx) const {
  double s = 0.0;
  for (int k = 0; k < dim_; ++k) {
    const double d = a[k] - pts_[idx * dim_ + k];
    s += d * d;
  }
  return s;
}

void SpatialHash::query_ball(const double* center, double radius,
                             std::vector<int>& out) const {
  out.clear();
  if (n_ == 0) return;
  const double r2 = radius * radius;
  const std::int64_t reach =
      static_cast<std::int64_t>(std::ceil(radius / cell_));
  std::vector<std::int64_t> base(static_cast<std::size_t>(dim_)),
      c(static_cast<std::size_t>(dim_));
  for (int k = 0; k < dim_; ++k)
    base[static_cast<std::size_t>(k)] = cell_coord(center[k]);

  std::vector<std::int64_t> off(static_cast<std::size_t>(dim_), -reach);
  while (true) {
    for (int k = 0; k < dim_; ++k)
      c[static_cast<std::size_t>(k)] =
          base[static_cast<std::size_t>(k)] + off[static_cast<std::size_t>(k)];
    auto it = buckets_.find(cell_key(c));
    if (it != buckets_.end())
      for (int idx : it->second)
        if (dist2(center, static_cast<std::size_t>(idx)) <= r2)
          out.push_back(idx);
    int k = 0;
    for (; k < dim_; ++k) {
      if (++off[static_cast<std::size_t>(k)] <= reach) break;
      off[static_cast<std::size_t>(k)] = -reach;
    }
    if (k == dim_) break;
  }
  std::sort(out.begin(), out.end());
}

int SpatialHash::linear_nearest(const double* center) const {
  int best = -1;
  double best2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_; ++i) {
    const double d2 = dist2(center, i);
    if (d2 < best2) {
      best2 = d2;
      best = static_cast<int>(i);
    }
  }
  return best;
}

int SpatialHash::nearest(const double* center) const {
  if (n_ == 0) return -1;
  std::vector<std::int64_t> base(static_cast<std::size_t>(dim_)),
      c(static_cast<std::size_t>(dim_));
  for (int k = 0; k < dim_; ++k)
    base[static_cast<std::size_t>(k)] = cell_coord(center[k]);

  int best = -1;
  double best2 = std::numeric_limits<double>::infinity();
  std::int64_t guaranteed_ring = -1;  // rings <= this cover dist sqrt(best2)
  for (std::int64_t ring = 0;; ++ring) {
    // give up on ring growth once the box dwarfs the cloud
    double box = 1.0;
    for (int k = 0; k < dim_; ++k) box *= static_cast<double>(2 * ring + 1);
    if (box > 8.0 * static_cast<double>(n_) + 64.0) return linear_nearest(center);

    std::vector<std::int64_t> off(static_cast<std::size_t>(dim_), -ring);
    while (true) {
      std::int64_t cheb = 0;
      for (int k = 0; k < dim_; ++k)
        cheb = std::max(cheb, std::abs(off[static_cast<std::size_t>(k)]));
      if (cheb == ring) {  // shell only; inner cells were already visited
        for (int k = 0; k < dim_; ++k)
          c[static_cast<std::size_t>(k)] = base[static_cast<std::size_t>(k)] +
                                           off[static_cast<std::size_t>(k)];
        auto it = buckets_.find(cell_key(c));
        if (it != buckets_.end())
          for (int idx : it->second) {
            const double d2 = dist2(center, static_cast<std::size_t>(idx));
            if (d2 < best2 || (d2 == best2 && idx < best)) {
              best2 = d2;
              best = idx;
            }
          }
      }
      int k = 0;
      for (; k < dim_; ++k) {
        if (++off[static_cast<std::size_t>(k)] <= ring) break;
        off[static_cast<std::size_t>(k)] = -ring;
      }
      if (k == dim_) break;
    }
    if (best >= 0) {
      if (guaranteed_ring < 0)
        guaranteed_ring =
            ring + 1 +
            static_cast<std::int64_t>(std::ceil(std::sqrt(best2) / cell_));
      if (ring >= guaranteed_ring) return best;
    }
  }
}

// ---------------------------------------------------------------------------
// MultipointConfig

std::vector<Interval> MultipointConfig::default_intervals(int k) {
  std::vector<Interval> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int j = 1; j <= k; ++j)
    out.push_back(Interval{2.0 * j - 1.0, 2.0 * j});
  return out;
}

void MultipointConfig::validate() const {
  if (k < 1) throw std::invalid_argument("MultipointConfig: k must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("MultipointConfig: epsilon must be in (0, 1)");
  if (intervals.size() != static_cast<std::size_t>(k))
    throw std::invalid_argument("MultipointConfig: need one interval per j");
  for (std::size_t j = 0; j < intervals.size(); ++j) {
    const auto& iv = intervals[j];
    if (!(iv.lo > 0.0) || !(iv.hi > iv.lo))
      throw std::invalid_argument(
          "MultipointConfig: intervals must be positive and nondegenerate");
    if (j > 0 && !(iv.lo > intervals[j - 1].hi))
      throw std::invalid_argument(
          "MultipointConfig: intervals must be ordered and disjoint");
  }
  if (!(grid_step > 0.0))
    throw std::invalid_argument("MultipointConfig: grid_step must be > 0");
  const double resolution = std::pow(epsilon, 1.0 / params.hurst);
  if (grid_step > resolution * (1.0 + 1e-12))
    throw std::invalid_argument(
        "MultipointConfig: grid_step must be <= epsilon^{1/H}");
  if (measure.dim != params.dim)
    throw std::invalid_argument(
        "MultipointConfig: measure dimension must match params.dim");
  if (n_paths < 1)
    throw std::invalid_argument("MultipointConfig: n_paths must be >= 1");
}

namespace {

// grid node indices [first, last) whose times fall in [lo, hi); half-open so
// the Riemann weights of an aligned interval sum exactly to its length
std::pair<std::size_t, std::size_t> node_range(const TimeGrid& grid, double lo,
                                               double hi) {
  const double eps = 1e-12 * std::max(1.0, std::abs(hi));
  double first_f = std::ceil((lo - grid.start) / grid.step - eps);
  if (first_f < 0.0) first_f = 0.0;
  std::size_t first = static_cast<std::size_t>(first_f);
  while (first < grid.count && grid.time(first) < lo - eps) ++first;
  std::size_t last = first;
  while (last < grid.count && grid.time(last) < hi - eps) ++last;
  return {first, last};
}

void check_coverage(const PathSample& path, const MultipointConfig& config) {
  const TimeGrid& g = path.grid;
  if (std::abs(g.step - config.grid_step) >
      1e-9 * std::max(g.step, config.grid_step))
    throw std::invalid_argument("path grid step does not match config");
  const double eps = 1e-9 * g.step;
  for (const auto& iv : config.intervals) {
    if (g.start > iv.lo + eps || g.last() + g.step < iv.hi - eps)
      throw std::invalid_argument(
          "path grid does not cover a config interval");
  }
}

// per-atom Riemann factors: a_m = eps^{-kd} w_m prod_j (step * count_mj),
// returned sparse as (atom index, value) for atoms hit in every interval
std::vector<std::pair<int, double>> atom_factors(
    const PathSample& path, const MultipointConfig& config) {
  check_coverage(path, config);
  const int d = config.params.dim;
  const std::size_t n_atoms = config.measure.size();
  const SpatialHash hash(d, config.epsilon, config.measure.atoms);

  std::vector<std::uint32_t> counts(n_atoms *
                                    static_cast<std::size_t>(config.k));
  std::vector<int> near;
  for (int j = 0; j < config.k; ++j) {
    const auto [first, last] = node_range(path.grid, config.intervals[j].lo,
                                          config.intervals[j].hi);
    for (std::size_t i = first; i < last; ++i) {
      hash.query_ball(&path.values[i * static_cast<std::size_t>(d)],
                      config.epsilon, near);
      for (int m : near)
        ++counts[static_cast<std::size_t>(m) * config.k + j];
    }
  }

  const double pref =
      std::pow(config.epsilon, -static_cast<double>(config.k) * d);
  std::vector<std::pair<int, double>> out;
  for (std::size_t m = 0; m < n_atoms; ++m) {
    double prod = 1.0;
    bool all = true;
    for (int j = 0; j < config.k && all; ++j) {
      const std::uint32_t c = counts[m * config.k + j];
      if (c == 0)
        all = false;
      else
        prod *= path.grid.step * static_cast<double>(c);
    }
    if (all)
      out.emplace_back(static_cast<int>(m),
                       pref * config.measure.weights[m] * prod);
  }
  return out;
}

}  // namespace

double compute_I_eps(const PathSample& path, const MultipointConfig& config) {
  double total = 0.0;
  for (const auto& [m, a] : atom_factors(path, config)) total += a;
  return total;
}

PathMoments path_moments(const PathSample& path,
                         const MultipointConfig& config) {
  const auto factors = atom_factors(path, config);
  PathMoments pm{0.0, 0.0, 0.0};
  for (const auto& [m, a] : factors) pm.I += a;
  const int d = config.params.dim;
  const double near_cut = 4.0 * config.epsilon;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    pm.F += factors[i].second * factors[i].second;  // diagonal pair, r = 0
    for (std::size_t j = 0; j < i; ++j) {
      double r2 = 0.0;
      for (int c = 0; c < d; ++c) {
        const double diff =
            config.measure.atom(static_cast<std::size_t>(factors[i].first))[c] -
            config.measure.atom(static_cast<std::size_t>(factors[j].first))[c];
        r2 += diff * diff;
      }
      const double contrib = 2.0 * factors[i].second * factors[j].second;
      if (r2 <= near_cut * near_cut)
        pm.F += contrib;
      else
        pm.S += contrib;
    }
  }
  return pm;
}

MomentReport assemble_report(const std::vector<PathMoments>& paths,
                             double epsilon, int n_batches) {
  const std::size_t n = paths.size();
  if (static_cast<long>(n) < n_batches)
    throw std::invalid_argument(
        "assemble_report: need at least n_batches paths for batch-mean "
        "standard errors");

  MomentReport rep;
  rep.epsilon = epsilon;
  rep.n_paths = static_cast<long>(n);

  double sum_I = 0.0, sum_Isq = 0.0, sum_F = 0.0, sum_S = 0.0;
  long hits = 0;
  for (const auto& pm : paths) {
    sum_I += pm.I;
    sum_F += pm.F;
    sum_S += pm.S;
    sum_Isq += pm.F + pm.S;
    if (pm.I > 0.0) ++hits;
  }
  rep.mean_I = sum_I / static_cast<double>(n);
  rep.mean_I_sq = sum_Isq / static_cast<double>(n);
  rep.F_part = sum_F / static_cast<double>(n);
  rep.S_part = sum_S / static_cast<double>(n);
  rep.hit_freq = static_cast<double>(hits) / static_cast<double>(n);
  rep.pz_bound =
      rep.mean_I_sq > 0.0 ? rep.mean_I * rep.mean_I / rep.mean_I_sq : 0.0;

  // batch-means standard errors over contiguous index blocks
  const int B = n_batches;
  std::vector<double> bm_I(static_cast<std::size_t>(B), 0.0),
      bm_Isq(static_cast<std::size_t>(B), 0.0);
  for (int b = 0; b < B; ++b) {
    const std::size_t lo = n * static_cast<std::size_t>(b) /
                           static_cast<std::size_t>(B);
    const std::size_t hi = n * static_cast<std::size_t>(b + 1) /
                           static_cast<std::size_t>(B);
    for (std::size_t i = lo; i < hi; ++i) {
      bm_I[static_cast<std::size_t>(b)] += paths[i].I;
      bm_Isq[static_cast<std::size_t>(b)] += paths[i].F + paths[i].S;
    }
    const double sz = static_cast<double>(hi - lo);
    bm_I[static_cast<std::size_t>(b)] /= sz;
    bm_Isq[static_cast<std::size_t>(b)] /= sz;
  }
  auto batch_se = [B](const std::vector<double>& bm) {
    double mean = 0.0;
    for (double v : bm) mean += v;
    mean /= B;
    double var = 0.0;
    for (double v : bm) var += (v - mean) * (v - mean);
    var /= (B - 1);
    return std::sqrt(var / B);
  };
  rep.stderr_I = batch_se(bm_I);
  rep.stderr_I_sq = batch_se(bm_Isq);
  return rep;
}

MomentReport mc_moments(const MultipointConfig& config, int threads) {
  config.validate();
  if (config.n_paths < 20)
    throw std::invalid_argument(
        "mc_moments: need at least 20 paths for batch-mean standard errors");

  // grid from 0 over all intervals at the configured step
  const double end = config.intervals.back().hi;
  const std::size_t count =
      static_cast<std::size_t>(std::ceil(end / config.grid_step - 1e-9)) + 1;
  const TimeGrid grid(0.0, config.grid_step, count);

  std::vector<PathMoments> per_path(static_cast<std::size_t>(config.n_paths));
  const int n_threads = std::max(1, threads);
  auto worker = [&](long begin, long endi) {
    for (long p = begin; p < endi; ++p) {
      const auto path = simulate_path(
          config.params, grid,
          derive_seed(config.seed, static_cast<std::uint64_t>(p), kStreamPath),
          SimMethod::circulant);
      per_path[static_cast<std::size_t>(p)] = path_moments(path, config);
    }
  };
  if (n_threads == 1) {
    worker(0, config.n_paths);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (config.n_paths + n_threads - 1) / n_threads;
    for (int th = 0; th < n_threads; ++th) {
      const long b = th * chunk;
      const long e = std::min(config.n_paths, b + chunk);
      if (b < e) pool.emplace_back(worker, b, e);
    }
    for (auto& t : pool) t.join();
  }
  return assemble_report(per_path, config.epsilon, 20);
}

std::vector<MomentReport> epsilon_sweep(const MultipointConfig& config,
                                        const std::vector<double>& eps_list,
                                        int threads) {
  if (eps_list.empty())
    throw std::invalid_argument("epsilon_sweep: eps_list must be nonempty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0))
      throw std::invalid_argument("epsilon_sweep: eps must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw std::invalid_argument("epsilon_sweep: eps_list must decrease");
  }
  // keep the step/eps^{1/H} resolution ratio of the base config
  const double ratio =
      config.grid_step / std::pow(config.epsilon, 1.0 / config.params.hurst);

  std::vector<MomentReport> out;
  out.reserve(eps_list.size());
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    MultipointConfig c = config;
    c.epsilon = eps_list[i];
    c.grid_step = ratio * std::pow(c.epsilon, 1.0 / c.params.hurst);
    c.seed = config.seed + i;  // master seed offset by sweep index
    out.push_back(mc_moments(c, threads));
  }
  return out;
}

KTupleWitness detect_near_ktuple(const PathSample& path,
                                 const MultipointConfig& config) {
  check_coverage(path, config);
  const int d = config.params.dim;
  const int k = config.k;

  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (const auto& iv : config.intervals)
    ranges.push_back(node_range(path.grid, iv.lo, iv.hi));
  for (const auto& [first, last] : ranges)
    if (first >= last)
      throw std::invalid_argument("detect_near_ktuple: empty interval grid");

  // spatial hash of the path values inside each later interval
  std::vector<SpatialHash> hashes;
  std::vector<std::size_t> bases;
  hashes.reserve(static_cast<std::size_t>(k) - 1);
  for (int j = 1; j < k; ++j) {
    const auto [first, last] = ranges[static_cast<std::size_t>(j)];
    std::vector<double> nodes(
        path.values.begin() + static_cast<std::ptrdiff_t>(first * d),
        path.values.begin() + static_cast<std::ptrdiff_t>(last * d));
    hashes.emplace_back(d, config.epsilon, std::move(nodes));
    bases.push_back(first);
  }

  KTupleWitness best;
  best.min_spread = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> tuple(static_cast<std::size_t>(k));
  std::vector<double> centroid(static_cast<std::size_t>(d));

  const auto [f0, l0] = ranges[0];
  for (std::size_t i0 = f0; i0 < l0; ++i0) {
    const double* z = &path.values[i0 * static_cast<std::size_t>(d)];
    tuple[0] = i0;
    bool ok = true;
    for (int j = 1; j < k && ok; ++j) {
      const int idx = hashes[static_cast<std::size_t>(j - 1)].nearest(z);
      if (idx < 0)
        ok = false;
      else
        tuple[static_cast<std::size_t>(j)] =
            bases[static_cast<std::size_t>(j - 1)] +
            static_cast<std::size_t>(idx);
    }
    if (!ok) continue;

    for (int c = 0; c < d; ++c) centroid[static_cast<std::size_t>(c)] = 0.0;
    for (int j = 0; j < k; ++j)
      for (int c = 0; c < d; ++c)
        centroid[static_cast<std::size_t>(c)] +=
            path.values[tuple[static_cast<std::size_t>(j)] *
                            static_cast<std::size_t>(d) +
                        static_cast<std::size_t>(c)];
    for (int c = 0; c < d; ++c)
      centroid[static_cast<std::size_t>(c)] /= static_cast<double>(k);

    double spread = 0.0;
    for (int j = 0; j < k; ++j) {
      double d2 = 0.0;
      for (int c = 0; c < d; ++c) {
        const double diff =
            path.values[tuple[static_cast<std::size_t>(j)] *
                            static_cast<std::size_t>(d) +
                        static_cast<std::size_t>(c)] -
            centroid[static_cast<std::size_t>(c)];
        d2 += diff * diff;
      }
      spread = std::max(spread, std::sqrt(d2));
    }
    if (spread < best.min_spread) {
      best.min_spread = spread;
      best.center = centroid;
      best.times.clear();
      for (int j = 0; j < k; ++j)
        best.times.push_back(
            path.grid.time(tuple[static_cast<std::size_t>(j)]));
    }
  }
  if (!std::isfinite(best.min_spread))
    throw std::runtime_error("detect_near_ktuple: no candidate tuple found");
  return best;
}

}  // namespace fbmcap
