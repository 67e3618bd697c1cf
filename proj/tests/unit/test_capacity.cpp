#include <cmath>
#include <numeric>

#include "doctest.h"
#include "fbmcap/capacity.hpp"
#include "helpers.hpp"

using namespace fbmcap;

namespace {

// random atoms inside a ball, pairwise distinct by construction noise
std::vector<double> random_cloud(std::uint64_t seed, std::size_t n,
                                 double radius) {
  RandomStream rs(seed, 0);
  std::vector<double> pts;
  std::uint64_t d = 0;
  while (pts.size() < 2 * n) {
    const double x = (2.0 * rs.uniform(d++) - 1.0) * radius;
    const double y = (2.0 * rs.uniform(d++) - 1.0) * radius;
    if (x * x + y * y <= radius * radius) {
      pts.push_back(x);
      pts.push_back(y);
    }
  }
  return pts;
}

}  // namespace

TEST_SUITE("capacity") {

TEST_CASE("kernel evaluation") {
  auto log1 = Kernel::log_pow(1);
  CHECK(kernel_eval(log1, 1.0 / M_E) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(kernel_eval(log1, 2.0) == 0.0);
  CHECK(kernel_eval(log1, 1.0) == 0.0);
  CHECK(kernel_eval(Kernel::log_pow(3), std::exp(-2.0)) ==
        doctest::Approx(8.0).epsilon(1e-12));
  CHECK(kernel_eval(log1, 0.0) == kEnergyInfinite);

  auto riesz = Kernel::riesz_with_exponent(1, 1.5);
  CHECK(kernel_eval(riesz, 4.0) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(kernel_eval(riesz, 0.0) == kEnergyInfinite);
  CHECK_THROWS_AS(kernel_eval(log1, -0.5), std::invalid_argument);

  // riesz exponent k(d - 1/H) needs Hd > 1
  auto from_params = Kernel::riesz(2, FbmParams(0.75, 2));
  CHECK(from_params.exponent ==
        doctest::Approx(2.0 * (2.0 - 1.0 / 0.75)).epsilon(1e-15));
  CHECK_THROWS_AS(Kernel::riesz(1, FbmParams(0.5, 2)), std::invalid_argument);
}

TEST_CASE("measure validation") {
  CHECK_THROWS_AS(DiscreteMeasure(2, {0.0, 0.0, 0.0, 0.0}, {0.5, 0.5}),
                  std::invalid_argument);  // duplicate atoms
  CHECK_THROWS_AS(DiscreteMeasure(2, {0.0, 0.0, 1.0, 0.0}, {0.7, 0.7}),
                  std::invalid_argument);  // weights sum to 1.4
  CHECK_THROWS_AS(DiscreteMeasure(2, {0.0, 0.0, 1.0, 0.0}, {-0.1, 1.1}),
                  std::invalid_argument);
  auto ok = DiscreteMeasure::uniform(2, {0.0, 0.0, 1.0, 0.0});
  CHECK(ok.size() == 2);
}

TEST_CASE("energy closed forms") {
  // two atoms at distance 1/e, log kernel k=1: 2 * (1/4) * 1
  auto mu = DiscreteMeasure::uniform(2, {0.0, 0.0, 1.0 / M_E, 0.0});
  CHECK(energy(mu, Kernel::log_pow(1)).energy ==
        doctest::Approx(0.5).epsilon(1e-14));

  // all pairwise distances >= 1: the log kernel vanishes
  auto far = DiscreteMeasure::uniform(2, {0.0, 0.0, 3.0, 0.0});
  CHECK(energy(far, Kernel::log_pow(2)).energy == 0.0);
}

TEST_CASE("energy equals the brute-force double sum") {
  // 200-point uniform discretization of a segment of length 1/2
  auto atoms = make_test_set(TestShape::segment, 0.5, 200, 0);
  auto mu = DiscreteMeasure::uniform(2, atoms);
  const auto kernel = Kernel::log_pow(1);
  const double fast = energy(mu, kernel).energy;
  const double brute = testutil::brute_force_energy(mu, kernel);
  CHECK(fast == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("energy is invariant under relabeling and rigid motion") {
  auto atoms = random_cloud(3, 40, 0.4);
  auto mu = DiscreteMeasure::uniform(2, atoms);
  const auto kernel = Kernel::log_pow(2);
  const double base = energy(mu, kernel).energy;

  // reverse the atom order
  std::vector<double> rev;
  for (std::size_t i = mu.size(); i-- > 0;) {
    rev.push_back(mu.atom(i)[0]);
    rev.push_back(mu.atom(i)[1]);
  }
  CHECK(energy(DiscreteMeasure::uniform(2, rev), kernel).energy ==
        doctest::Approx(base).epsilon(1e-12));

  // rotate by 0.7 rad and translate
  std::vector<double> moved;
  const double ct = std::cos(0.7), st = std::sin(0.7);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double x = mu.atom(i)[0], y = mu.atom(i)[1];
    moved.push_back(ct * x - st * y + 10.0);
    moved.push_back(st * x + ct * y - 3.0);
  }
  CHECK(energy(DiscreteMeasure::uniform(2, moved), kernel).energy ==
        doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("minimize_energy: symmetric sets get uniform weights") {
  // two atoms
  auto two = minimize_energy(2, {0.0, 0.0, 0.5, 0.0}, Kernel::log_pow(1),
                             1000, 1e-10);
  CHECK(two.measure.weights[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(two.measure.weights[1] == doctest::Approx(0.5).epsilon(1e-9));
  // optimal two-point energy matches the closed form (1/2) log(1/r)
  CHECK(two.energy.energy ==
        doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-9));

  // regular hexagon of circumradius 0.3
  std::vector<double> hex;
  for (int i = 0; i < 6; ++i) {
    hex.push_back(0.3 * std::cos(i * M_PI / 3.0));
    hex.push_back(0.3 * std::sin(i * M_PI / 3.0));
  }
  auto res = minimize_energy(2, hex, Kernel::log_pow(1), 1000, 1e-10);
  for (double w : res.measure.weights)
    CHECK(w == doctest::Approx(1.0 / 6.0).epsilon(1e-6));

  const double uniform_energy =
      energy(DiscreteMeasure::uniform(2, hex), Kernel::log_pow(1)).energy;
  CHECK(res.energy.energy <= uniform_energy + 1e-10);
}

TEST_CASE("minimize_energy: descent bookkeeping") {
  auto atoms = random_cloud(9, 60, 0.3);
  auto res = minimize_energy(2, atoms, Kernel::log_pow(1), 400, 1e-9);

  for (std::size_t i = 1; i < res.objective.size(); ++i)
    CHECK(res.objective[i] <=
          res.objective[i - 1] + 1e-12 * std::abs(res.objective[i - 1]));

  double sum = 0.0;
  for (double w : res.measure.weights) {
    CHECK(w >= 0.0);
    sum += w;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.final_gap >= 0.0);
  // returned weights are no worse than the uniform start
  const double uniform_energy =
      energy(DiscreteMeasure::uniform(2, atoms), Kernel::log_pow(1)).energy;
  CHECK(res.energy.energy <= uniform_energy + 1e-9);

  CHECK_THROWS_AS(minimize_energy(2, {0.0, 0.0}, Kernel::log_pow(1), 10, 1e-9),
                  std::invalid_argument);
}

TEST_CASE("scale_measure and riesz homogeneity") {
  auto mu = DiscreteMeasure::uniform(2, random_cloud(5, 30, 0.4));
  auto same = scale_measure(mu, 1.0);
  CHECK(same.atoms == mu.atoms);
  CHECK(same.weights == mu.weights);
  CHECK_THROWS_AS(scale_measure(mu, 0.0), std::invalid_argument);

  const auto riesz = Kernel::riesz_with_exponent(2, 1.4);
  const double base = energy(mu, riesz).energy;
  for (double lambda : {0.1, 0.5, 2.0, 10.0}) {
    const double scaled = energy(scale_measure(mu, lambda), riesz).energy;
    CHECK(scaled == doctest::Approx(std::pow(lambda, -riesz.exponent) * base)
                        .epsilon(1e-12));
  }
}

TEST_CASE("log kernel never grows under expansion past unit distances") {
  auto mu = DiscreteMeasure::uniform(2, random_cloud(7, 25, 0.45));
  const auto kernel = Kernel::log_pow(2);
  const double base = energy(mu, kernel).energy;
  for (double lambda : {1.0, 1.5, 3.0})
    CHECK(energy(scale_measure(mu, lambda), kernel).energy <= base + 1e-12);
}

TEST_CASE("shrinking splits like the capacity scaling lemma") {
  // energy(lambda mu, k) <= 2^{k-1}[(log 1/lambda)^k + E_{<=1}] + (log 1/lambda)^k
  // for lambda < 1 and all distances <= 1/lambda
  for (int k : {1, 2, 3}) {
    const auto kernel = Kernel::log_pow(k);
    for (double lambda : {0.2, 0.5, 0.9}) {
      // atoms within a ball of radius 1/(2 lambda) keep distances <= 1/lambda
      auto mu = DiscreteMeasure::uniform(
          2, random_cloud(100 + k, 30, 0.5 / lambda));
      const double lhs = energy(scale_measure(mu, lambda), kernel).energy;
      const double logl = std::pow(std::log(1.0 / lambda), k);

      // energy restricted to pairs at distance <= 1, brute force
      double restricted = 0.0;
      for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < mu.size(); ++j) {
          if (i == j) continue;
          const double dx = mu.atom(i)[0] - mu.atom(j)[0];
          const double dy = mu.atom(i)[1] - mu.atom(j)[1];
          const double r = std::sqrt(dx * dx + dy * dy);
          if (r <= 1.0)
            restricted +=
                mu.weights[i] * mu.weights[j] * kernel_eval(kernel, r);
        }
      const double rhs =
          std::pow(2.0, k - 1) * (logl + restricted) + logl;
      CHECK(lhs <= rhs + 1e-10);
    }
  }
}

TEST_CASE("make_test_set shapes") {
  auto two = make_test_set(TestShape::two_points, 0.5, 2, 0);
  CHECK(two.size() == 4);
  const double dx = two[2] - two[0], dy = two[3] - two[1];
  CHECK(std::sqrt(dx * dx + dy * dy) == doctest::Approx(0.5).epsilon(1e-15));

  auto disk = make_test_set(TestShape::disk, 1.0 / 3.0, 250, 4);
  for (std::size_t i = 0; i < 250; ++i)
    CHECK(disk[2 * i] * disk[2 * i] + disk[2 * i + 1] * disk[2 * i + 1] <=
          (1.0 / 3.0) * (1.0 / 3.0) + 1e-15);

  auto grid = make_test_set(TestShape::grid_square, 1.0, 16, 0);
  CHECK(grid.size() == 32);
  // 4 x 4 lattice: distinct cell centers inside the square
  auto mu = DiscreteMeasure::uniform(2, grid);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(std::abs(grid[2 * i]) <= 0.5);
    CHECK(std::abs(grid[2 * i + 1]) <= 0.5);
  }

  // deterministic in the seed
  CHECK(make_test_set(TestShape::disk, 0.5, 50, 9) ==
        make_test_set(TestShape::disk, 0.5, 50, 9));
}

TEST_CASE("disk energies converge to the continuum equilibrium value") {
  // capacity positivity proxy: the logarithmic capacity of a disk of radius
  // R is R, so the minimized energy must approach log(1/R) = log 3 from
  // below as the discretization refines
  const auto kernel = Kernel::log_pow(1);
  const double limit = std::log(3.0);
  std::vector<double> e;
  for (std::size_t n : {100, 400, 1600}) {
    auto atoms = make_test_set(TestShape::disk, 1.0 / 3.0, n, 1);
    e.push_back(minimize_energy(2, atoms, kernel, 2000, 1e-9).energy.energy);
  }
  for (std::size_t i = 0; i < e.size(); ++i) {
    CHECK(e[i] > 0.0);
    CHECK(e[i] < limit);
    if (i > 0) {
      CHECK(e[i] > e[i - 1]);
      CHECK(limit - e[i] < limit - e[i - 1]);  // gap to the limit shrinks
    }
  }
  CHECK(limit - e.back() < 0.07);
}

}  // TEST_SUITE
