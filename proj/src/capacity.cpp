#include "fbmcap/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fbmcap {

Kernel Kernel::log_pow(int k) {
  if (k < 1) throw std::invalid_argument("Kernel: multiplicity must be >= 1");
  return Kernel{Kind::log_plus_pow, k, 0.0};
}

Kernel Kernel::riesz(int k, const FbmParams& params) {
  const double exponent =
      static_cast<double>(k) * (params.dim - 1.0 / params.hurst);
  return riesz_with_exponent(k, exponent);
}

Kernel Kernel::riesz_with_exponent(int k, double exponent) {
  if (k < 1) throw std::invalid_argument("Kernel: multiplicity must be >= 1");
  if (!(exponent > 0.0))
    throw std::invalid_argument(
        "Kernel: riesz exponent must be positive (needs Hd > 1)");
  return Kernel{Kind::riesz, k, exponent};
}

double kernel_eval(const Kernel& kernel, double s) {
  if (s < 0.0) throw std::invalid_argument("kernel_eval: s must be >= 0");
  if (s == 0.0) return kEnergyInfinite;
  switch (kernel.kind) {
    case Kernel::Kind::log_plus_pow: {
      if (s >= 1.0) return 0.0;
      const double l = std::log(1.0 / s);
      double p = l;
      for (int i = 1; i < kernel.multiplicity; ++i) p *= l;
      return p;
    }
    case Kernel::Kind::riesz:
      return std::pow(s, -kernel.exponent);
  }
  return 0.0;  // unreachable
}

namespace {

double point_dist(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int c = 0; c < dim; ++c) {
    const double d = a[c] - b[c];
    s += d * d;
  }
  return std::sqrt(s);
}

void check_atoms_distinct(int dim, const std::vector<double>& atoms) {
  const std::size_t n = atoms.size() / static_cast<std::size_t>(dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      bool same = true;
      for (int c = 0; c < dim && same; ++c)
        same = atoms[i * dim + c] == atoms[j * dim + c];
      if (same)
        throw std::invalid_argument("DiscreteMeasure: atoms must be distinct");
    }
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(int dim_, std::vector<double> atoms_,
                                 std::vector<double> weights_)
    : dim(dim_), atoms(std::move(atoms_)), weights(std::move(weights_)) {
  if (dim < 1) throw std::invalid_argument("DiscreteMeasure: dim must be >= 1");
  if (atoms.size() != weights.size() * static_cast<std::size_t>(dim))
    throw std::invalid_argument("DiscreteMeasure: atoms/weights size mismatch");
  if (weights.empty())
    throw std::invalid_argument("DiscreteMeasure: needs at least one atom");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0)
      throw std::invalid_argument("DiscreteMeasure: weights must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("DiscreteMeasure: weights must sum to 1");
  check_atoms_distinct(dim, atoms);
}

DiscreteMeasure DiscreteMeasure::uniform(int dim, std::vector<double> atoms) {
  const std::size_t n = atoms.size() / static_cast<std::size_t>(dim);
  // n equal weights that sum to 1 exactly in floating point would need n to
  // be a power of two; accept the 1e-12 tolerance instead
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  return DiscreteMeasure(dim, std::move(atoms), std::move(w));
}

EnergyResult energy(const DiscreteMeasure& measure, const Kernel& kernel) {
  const std::size_t n = measure.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double r = point_dist(measure.atom(i), measure.atom(j), measure.dim);
      total += 2.0 * measure.weights[i] * measure.weights[j] *
               kernel_eval(kernel, r);
    }
  return EnergyResult{total, kernel, n};
}

MinimizeResult minimize_energy(int dim, const std::vector<double>& atoms,
                               const Kernel& kernel, long max_iters,
                               double tol) {
  const std::size_t n = atoms.size() / static_cast<std::size_t>(dim);
  if (n < 2)
    throw std::invalid_argument("minimize_energy: need at least 2 atoms");
  check_atoms_distinct(dim, atoms);

  // Descent matrix: off-diagonal kernel values plus a cell self-energy
  // phi(half nearest-neighbour distance) on the diagonal. With a zero
  // diagonal every vertex of the simplex has zero energy and is a global
  // minimizer, so the minimization would collapse onto a single atom; the
  // self-energy term restores the cell-level interaction the atoms stand for.
  std::vector<double> K(n * n, 0.0);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double r = point_dist(&atoms[i * dim], &atoms[j * dim], dim);
      const double phi = kernel_eval(kernel, r);
      K[i * n + j] = phi;
      K[j * n + i] = phi;
      nearest[i] = std::min(nearest[i], r);
      nearest[j] = std::min(nearest[j], r);
    }
  for (std::size_t i = 0; i < n; ++i)
    K[i * n + i] = kernel_eval(kernel, 0.5 * nearest[i]);

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<double> Kw(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += K[i * n + j] * w[j];
    Kw[i] = s;
  }
  double obj = 0.0;
  for (std::size_t i = 0; i < n; ++i) obj += w[i] * Kw[i];

  MinimizeResult out{DiscreteMeasure::uniform(dim, atoms),
                     EnergyResult{}, {}, 0.0, 0};
  out.objective.push_back(obj);

  for (long iter = 0; iter < max_iters; ++iter) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (Kw[i] < Kw[best]) best = i;
    const double gap = 2.0 * (obj - Kw[best]);
    out.final_gap = gap;
    if (gap < tol) break;

    // f(w + g(e-w)) = f(w) - g*gap + g^2*q along the vertex direction;
    // cap the open-loop step at the exact 1-D minimizer so f never increases
    const double q = K[best * n + best] - 2.0 * Kw[best] + obj;
    double gamma = 2.0 / static_cast<double>(iter + 2);
    if (q > 0.0) gamma = std::min(gamma, gap / (2.0 * q));
    gamma = std::min(gamma, 1.0);

    for (std::size_t i = 0; i < n; ++i) w[i] *= (1.0 - gamma);
    w[best] += gamma;
    for (std::size_t i = 0; i < n; ++i)
      Kw[i] = (1.0 - gamma) * Kw[i] + gamma * K[i * n + best];
    obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) obj += w[i] * Kw[i];
    out.objective.push_back(obj);
    out.iterations = iter + 1;
  }

  // renormalize the drift of repeated convex combinations before validating
  double sum = 0.0;
  for (double x : w) sum += x;
  for (double& x : w) x /= sum;

  out.measure = DiscreteMeasure(dim, atoms, std::move(w));
  out.energy = energy(out.measure, kernel);
  return out;
}

DiscreteMeasure scale_measure(const DiscreteMeasure& measure, double lambda) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("scale_measure: lambda must be > 0");
  DiscreteMeasure out = measure;
  for (double& x : out.atoms) x *= lambda;
  return out;
}

std::vector<double> make_test_set(TestShape shape, double scale,
                                  std::size_t n_atoms, std::uint64_t seed) {
  if (n_atoms < 1)
    throw std::invalid_argument("make_test_set: n_atoms must be >= 1");
  std::vector<double> pts;
  pts.reserve(2 * n_atoms);
  switch (shape) {
    case TestShape::two_points: {
      pts = {0.0, 0.0, scale, 0.0};
      break;
    }
    case TestShape::segment: {
      // cell midpoints of [0, scale] on the x-axis
      for (std::size_t i = 0; i < n_atoms; ++i) {
        pts.push_back((static_cast<double>(i) + 0.5) * scale /
                      static_cast<double>(n_atoms));
        pts.push_back(0.0);
      }
      break;
    }
    case TestShape::disk: {
      // golden-angle spiral: area-filling, pairwise distinct, radius <= scale
      const double golden = M_PI * (3.0 - std::sqrt(5.0));
      RandomStream rs(seed);
      const double offset = 2.0 * M_PI * rs.uniform(0);
      for (std::size_t i = 0; i < n_atoms; ++i) {
        const double r = scale * std::sqrt((static_cast<double>(i) + 0.5) /
                                           static_cast<double>(n_atoms));
        const double a = offset + golden * static_cast<double>(i);
        pts.push_back(r * std::cos(a));
        pts.push_back(r * std::sin(a));
      }
      break;
    }
    case TestShape::grid_square: {
      // m x m cell centers of a square of side `scale` centered at 0,
      // row-major, truncated to n_atoms
      const std::size_t m = static_cast<std::size_t>(
          std::ceil(std::sqrt(static_cast<double>(n_atoms))));
      for (std::size_t i = 0; i < n_atoms; ++i) {
        const std::size_t row = i / m;
        const std::size_t col = i % m;
        pts.push_back(scale * ((static_cast<double>(col) + 0.5) /
                                   static_cast<double>(m) -
                               0.5));
        pts.push_back(scale * ((static_cast<double>(row) + 0.5) /
                                   static_cast<double>(m) -
                               0.5));
      }
      break;
    }
  }
  return pts;
}

}  // namespace fbmcap
