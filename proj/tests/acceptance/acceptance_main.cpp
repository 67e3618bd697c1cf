// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Criteria with runtime budgets enforce them.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "json.hpp"

#include "fbmcap/capacity.hpp"
#include "fbmcap/fbm.hpp"
#include "fbmcap/gaussian.hpp"
#include "fbmcap/multipoint.hpp"
#include "fbmcap/quadrature.hpp"
#include "../unit/helpers.hpp"

namespace fs = std::filesystem;
using namespace fbmcap;

namespace {

int failures = 0;

void report(int n, const std::string& what, bool pass,
            const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion-" << n << ": " << what
            << " (" << detail << ")" << std::endl;
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

std::vector<std::vector<double>> to_rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows[static_cast<std::size_t>(i)].resize(
        static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  }
  return rows;
}

// 1. detcov_product vs direct dense determinant, rel < 1e-9, < 10 s
void criterion_determinant() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  long tested = 0;
  for (double hurst : {0.3, 0.5, 0.75}) {
    FbmParams params(hurst, 1);
    for (std::size_t size = 2; size <= 8; ++size) {
      RandomStream rs(derive_seed(8101, size, 1),
                      static_cast<std::uint64_t>(hurst * 1000.0));
      std::uint64_t draw = 0;
      for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> times(size);
        for (double& t : times) t = 0.1 + 9.9 * rs.uniform(draw++);
        std::sort(times.begin(), times.end());
        bool ok = true;
        for (std::size_t i = 1; i < size; ++i)
          ok = ok && times[i] - times[i - 1] > 1e-6;
        if (!ok) continue;
        TimeTuple tuple(times);
        const double prod = detcov_product(params, tuple);
        const double direct = build_cov(params, tuple).entries.determinant();
        worst = std::max(worst, std::abs(prod - direct) / std::abs(direct));
        ++tested;
      }
    }
  }
  const double dt = seconds_since(t0);
  report(1, "determinant product identity", worst < 1e-9 && dt < 10.0,
         "max rel err " + fmt(worst) + " over " + std::to_string(tested) +
             " tuples, " + fmt(dt) + " s");
}

// 2. empirical covariance of 50,000 circulant paths within 4 jackknife SEs
void criterion_exact_simulation() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double hurst : {0.3, 0.5, 0.75}) {
    FbmParams params(hurst, 1);
    TimeGrid grid(0.25, 0.25, 8);
    const double z = testutil::max_cov_zscore(
        params, grid, 50000, 9901 + static_cast<std::uint64_t>(hurst * 100),
        SimMethod::circulant, 25);
    worst = std::max(worst, z);
  }
  const double dt = seconds_since(t0);
  report(2, "exact circulant simulation", worst < 4.0 && dt < 60.0,
         "max |z| " + fmt(worst) + " over 3 H values x 8^2 entries, " +
             fmt(dt) + " s");
}

// 3. LND two-sided bound over 10,000 configs + Brownian Markov ratio, < 30 s
void criterion_lnd() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  double min_ratio = 1e300;
  std::string detail;
  try {
    long budget[3] = {3334, 3333, 3333};
    int i = 0;
    for (double hurst : {0.3, 0.5, 0.75}) {
      const auto r = lnd_scan(FbmParams(hurst, 1), budget[i++], 6, 0.25, 4.0,
                              6001, 2);
      ok = ok && r.max_ratio <= 1.0 + 1e-8 && r.min_ratio > 0.0;
      min_ratio = std::min(min_ratio, r.min_ratio);
    }
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }

  // H = 1/2 single past-time conditioning is Markov: ratio exactly 1
  FbmParams brown(0.5, 1);
  for (auto [t, s] : {std::pair{2.0, 1.0}, {3.7, 1.9}, {1.1, 0.4}}) {
    const double ratio =
        conditional_variance(brown, t, TimeTuple({s})) / (t - s);
    ok = ok && std::abs(ratio - 1.0) <= 1e-10;
  }
  const double dt = seconds_since(t0);
  report(3, "strong local nondeterminism bounds", ok && dt < 30.0,
         detail.empty() ? "10000 configs, min ratio " + fmt(min_ratio) +
                              ", Markov ratio = 1, " + fmt(dt) + " s"
                        : detail);
}

// 4. Gershgorin bound <= 2k and >= power iteration on 1000 structured configs
void criterion_gershgorin() {
  bool ok = true;
  RandomStream rs(4501, 0);
  std::uint64_t draw = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const double hurst = 0.25 + 0.7 * rs.uniform(draw++);
    const int k = 1 + static_cast<int>(rs.uniform(draw++) * 4.0);
    std::vector<double> times;
    for (int j = 1; j <= k; ++j) {
      double a = 2.0 * j - 1.0 + rs.uniform(draw++) * 0.95;
      double b = 2.0 * j - 1.0 + rs.uniform(draw++) * 0.95;
      if (a > b) std::swap(a, b);
      if (b - a < 1e-3) b = a + 1e-3;
      times.push_back(a);
      times.push_back(b);
    }
    const auto m = normalize_increments(FbmParams(hurst, 1), TimeTuple(times));
    const double bound = gershgorin_max(m);
    const double pi = testutil::power_iteration_max(to_rows(m.entries));
    ok = ok && bound <= 2.0 * k + 1e-12 && bound >= pi - 1e-8;
  }
  report(4, "Gershgorin bound on normalized increments", ok,
         "1000 configs, k <= 4");
}

// 5. closed forms vs quadrature oracle, rel <= 1e-6; M_j bound; < 10 s
void criterion_integrals() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  bool ok = true;
  for (double x : {0.01, 0.05, 0.1, 0.25, 0.5, 0.9}) {
    const auto ql = quad_gap_radial([](double u) { return 1.0 / u; },
                                    GapRelation::greater, x, 1e-10);
    worst = std::max(worst, std::abs(ql.value - closed_form_log(x)) /
                                std::abs(closed_form_log(x)));
    ok = ok && ql.converged;
    for (double hd : {1.2, 1.5, 1.8, 2.5, 3.0}) {
      const double cf = closed_form_power(x, hd);
      const auto qp =
          quad_gap_radial([hd](double u) { return std::pow(u, -hd); },
                          GapRelation::greater, x, std::max(1e-10, 1e-12 * cf));
      worst = std::max(worst, std::abs(qp.value - cf) / cf);
      ok = ok && qp.converged;
    }
  }
  ok = ok && worst <= 1e-6;
  for (double r : {0.01, 0.1, 0.5})
    for (double hurst : {0.4, 0.5, 0.75}) {
      const auto q =
          quad_gap_radial([](double u) { return 1.0 / u; },
                          GapRelation::greater, std::pow(r, 1.0 / hurst), 1e-10);
      ok = ok && q.value <= (2.0 / hurst) * std::log(1.0 / r) + 1e-9;
    }
  const double dt = seconds_since(t0);
  report(5, "integral identities and M_j bound", ok && dt < 10.0,
         "max rel err " + fmt(worst) + ", " + fmt(dt) + " s");
}

// 6. energy vs brute force (1e-12), riesz homogeneity (1e-12), Frank-Wolfe
void criterion_energy() {
  bool ok = true;
  std::string detail;

  auto atoms = make_test_set(TestShape::segment, 0.5, 200, 0);
  auto mu = DiscreteMeasure::uniform(2, atoms);
  const auto kernel = Kernel::log_pow(1);
  const double fast = energy(mu, kernel).energy;
  const double brute = testutil::brute_force_energy(mu, kernel);
  ok = ok && std::abs(fast - brute) <= 1e-12 * std::abs(brute);
  detail += "n=200 rel err " + fmt(std::abs(fast - brute) / std::abs(brute));

  const auto riesz = Kernel::riesz_with_exponent(2, 1.4);
  auto cloud = DiscreteMeasure::uniform(
      2, make_test_set(TestShape::disk, 0.4, 50, 13));
  const double base = energy(cloud, riesz).energy;
  for (double lambda : {0.1, 0.5, 2.0, 10.0}) {
    const double scaled = energy(scale_measure(cloud, lambda), riesz).energy;
    const double expect = std::pow(lambda, -riesz.exponent) * base;
    ok = ok && std::abs(scaled - expect) <= 1e-12 * std::abs(expect);
  }

  auto res = minimize_energy(2, make_test_set(TestShape::disk, 1.0 / 3.0, 300, 1),
                             kernel, 800, 1e-10);
  for (std::size_t i = 1; i < res.objective.size(); ++i)
    ok = ok && res.objective[i] <=
                   res.objective[i - 1] + 1e-12 * std::abs(res.objective[i - 1]);

  std::vector<double> hex;
  for (int i = 0; i < 6; ++i) {
    hex.push_back(0.3 * std::cos(i * M_PI / 3.0));
    hex.push_back(0.3 * std::sin(i * M_PI / 3.0));
  }
  auto sym = minimize_energy(2, hex, kernel, 1000, 1e-10);
  for (double w : sym.measure.weights)
    ok = ok && std::abs(w - 1.0 / 6.0) <= 1e-6;

  report(6, "energy correctness and Frank-Wolfe descent", ok, detail);
}

// 7 + 8. Paley-Zygmund consistency and eps-stability of the first moment
void criterion_multipoint() {
  const auto t0 = std::chrono::steady_clock::now();
  auto atoms = make_test_set(TestShape::disk, 1.0 / 3.0, 200, 2);
  MultipointConfig config{FbmParams(0.5, 2),
                          2,
                          0.2,
                          MultipointConfig::default_intervals(2),
                          0.04,
                          DiscreteMeasure::uniform(2, atoms),
                          2000,
                          20260808};
  const auto reports = epsilon_sweep(config, {0.2, 0.1, 0.05}, 2);

  bool pz_ok = true;
  double lo = 1e300, hi = 0.0, lo_ci = 1e300, hi_ci = 0.0, min_pz = 1e300;
  for (const auto& r : reports) {
    const double sigma = std::sqrt(std::max(0.0, r.hit_freq * (1.0 - r.hit_freq) /
                                                     static_cast<double>(r.n_paths)));
    pz_ok = pz_ok && r.pz_bound <= r.hit_freq + 3.0 * sigma + 1e-12;
    pz_ok = pz_ok && r.pz_bound > 0.0;
    min_pz = std::min(min_pz, r.pz_bound);
    lo = std::min(lo, r.mean_I);
    hi = std::max(hi, r.mean_I);
    lo_ci = std::min(lo_ci, r.mean_I + 1.96 * r.stderr_I);
    hi_ci = std::max(hi_ci, r.mean_I - 1.96 * r.stderr_I);
  }
  const double dt = seconds_since(t0);
  report(7, "Paley-Zygmund consistency across the epsilon sweep",
         pz_ok && dt < 300.0,
         "min pz " + fmt(min_pz) + " over eps {0.2,0.1,0.05}, " + fmt(dt) +
             " s");

  // the 95%-confidence ratio: smallest max/min consistent with the CIs
  const double ratio_ci = hi_ci > 0.0 ? hi_ci / lo_ci : 0.0;
  report(8, "epsilon-stability of the first moment",
         ratio_ci <= 2.0 && lo > 0.0,
         "point ratio " + fmt(hi / lo) + ", CI-adjusted " + fmt(ratio_ci));
}

// 9. CLI determinism: byte-identical outputs across reruns and thread counts
void criterion_determinism() {
  const char* cli = std::getenv("FBMCAP_CLI");
  if (!cli || !*cli) {
    report(9, "CLI output determinism", false, "FBMCAP_CLI not set");
    return;
  }
  const fs::path base =
      fs::temp_directory_path() /
      ("fbmcap_accept_" + std::to_string(static_cast<long>(::getpid())));
  fs::remove_all(base);

  struct Run {
    std::string name;
    std::string args;
  };
  const std::vector<Run> runs = {
      {"lnd", "lnd-scan --n-configs 1500 --hurst 0.75 --seed 21"},
      {"mp", "multipoint --mode moments --n-paths 200 --n-atoms 100 --seed 4"},
  };
  bool ok = true;
  std::string detail;
  for (const auto& run : runs) {
    std::vector<fs::path> dirs;
    for (const std::string variant : {"r1_t1", "r2_t1", "r1_t8", "r2_t8"}) {
      const fs::path dir = base / (run.name + "_" + variant);
      const std::string threads = variant.substr(variant.find('t') + 1);
      const std::string cmd = std::string(cli) + " " + run.args +
                              " --threads " + threads + " --out " +
                              dir.string() + " > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) {
        ok = false;
        detail = run.name + " exited nonzero";
      }
      dirs.push_back(dir);
    }
    // all four runs must agree byte-for-byte on every data artifact; the
    // manifest is compared with its wall-time field masked
    for (std::size_t d = 1; d < dirs.size() && ok; ++d) {
      for (const auto& entry : fs::directory_iterator(dirs[0])) {
        const auto name = entry.path().filename().string();
        std::ifstream fa(entry.path(), std::ios::binary);
        std::ifstream fb(dirs[d] / name, std::ios::binary);
        std::string a((std::istreambuf_iterator<char>(fa)),
                      std::istreambuf_iterator<char>());
        std::string b((std::istreambuf_iterator<char>(fb)),
                      std::istreambuf_iterator<char>());
        if (name == "run_manifest.json") {
          auto ja = nlohmann::json::parse(a);
          auto jb = nlohmann::json::parse(b);
          ja.erase("wall_time_s");
          jb.erase("wall_time_s");
          if (ja != jb) {
            ok = false;
            detail = run.name + "/" + name + " differs";
          }
        } else if (a != b) {
          ok = false;
          detail = run.name + "/" + name + " differs (" + dirs[0].string() +
                   " vs " + dirs[d].string() + ")";
        }
      }
    }
  }
  fs::remove_all(base);
  report(9, "CLI output determinism across reruns and 1 vs 8 threads", ok,
         ok ? "2 subcommands x 4 runs byte-identical" : detail);
}

}  // namespace

int main() {
  criterion_determinant();
  criterion_exact_simulation();
  criterion_lnd();
  criterion_gershgorin();
  criterion_integrals();
  criterion_energy();
  criterion_multipoint();
  criterion_determinism();
  if (failures == 0)
    std::cout << "all acceptance criteria passed" << std::endl;
  else
    std::cout << failures << " acceptance criteria FAILED" << std::endl;
  return failures;
}
