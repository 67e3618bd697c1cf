// fbmcap command-line runner: configuration-driven experiments over the
// library, with deterministic seeding and plot-ready CSV/JSON output.
//
// Exit codes: 0 all invoked checks passed, 1 a check failed, 2 usage or
// configuration error (nothing is written in that case).

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "CLI11.hpp"
#include "json.hpp"

#include "fbmcap/capacity.hpp"
#include "fbmcap/fbm.hpp"
#include "fbmcap/gaussian.hpp"
#include "fbmcap/io.hpp"
#include "fbmcap/multipoint.hpp"
#include "fbmcap/quadrature.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fbmcap;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct Check {
  std::string name;
  bool pass;
};

// Accumulates outputs in memory; nothing touches the filesystem until the
// whole run has succeeded, so a config error leaves no partial output.
struct RunContext {
  std::string command;
  json config_echo;  // result-determining parameters only
  std::vector<Check> checks;
  std::vector<std::pair<std::string, std::string>> files;  // name -> content

  void check(const std::string& name, bool pass) {
    checks.push_back({name, pass});
  }
  void emit(const std::string& name, const std::string& content) {
    files.emplace_back(name, content);
  }

  bool flush(const fs::path& out_dir, double wall_s) const {
    fs::create_directories(out_dir);
    for (const auto& [name, content] : files)
      write_text_file((out_dir / name).string(), content);

    json manifest;
    manifest["schema_version"] = 1;
    manifest["tool_version"] = kToolVersion;
    manifest["command"] = command;
    manifest["config"] = config_echo;
    manifest["wall_time_s"] = wall_s;
    bool all = true;
    manifest["checks"] = json::array();
    for (const auto& c : checks) {
      manifest["checks"].push_back({{"name", c.name}, {"pass", c.pass}});
      all = all && c.pass;
    }
    manifest["all_pass"] = all;
    write_text_file((out_dir / "run_manifest.json").string(),
                    manifest.dump(2) + "\n");
    return all;
  }
};

// Option precedence: explicit flag > config file > built-in default.
struct OptionMerge {
  json file;
  std::vector<std::function<void()>> appliers;

  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
    try {
      in >> file;
    } catch (const json::exception& e) {
      throw CLI::ValidationError("--config", e.what());
    }
    if (file.contains("schema_version") && file["schema_version"] != 1)
      throw CLI::ValidationError("--config", "unsupported schema_version");
  }

  template <class T>
  void bind(CLI::Option* opt, const std::string& key, T& var) {
    appliers.push_back([this, opt, key, &var]() {
      if (opt->count() == 0 && file.contains(key)) {
        try {
          var = file.at(key).get<T>();
        } catch (const json::exception&) {
          throw CLI::ValidationError("--config",
                                     "field '" + key + "' has the wrong type");
        }
      }
    });
  }

  void apply() {
    for (auto& f : appliers) f();
  }
};

double wall_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string compact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

Kernel make_kernel(const std::string& kind, int k, double hurst, int dim,
                   double riesz_exponent) {
  if (kind == "log") return Kernel::log_pow(k);
  if (kind == "riesz") {
    if (riesz_exponent > 0.0)
      return Kernel::riesz_with_exponent(k, riesz_exponent);
    return Kernel::riesz(k, FbmParams(hurst, dim));
  }
  throw CLI::ValidationError("--kernel", "must be 'log' or 'riesz'");
}

TestShape parse_shape(const std::string& s) {
  if (s == "disk") return TestShape::disk;
  if (s == "segment") return TestShape::segment;
  if (s == "grid_square") return TestShape::grid_square;
  if (s == "two_points") return TestShape::two_points;
  throw CLI::ValidationError("--shape", "unknown shape '" + s + "'");
}

std::string path_binary_bytes(const PathSample& path) {
  static long serial = 0;
  const auto tmp = fs::temp_directory_path() /
                   ("fbmcap_tmp_" + std::to_string(static_cast<long>(::getpid())) +
                    "_" + std::to_string(serial++) + ".bin");
  write_path_binary(path, tmp.string());
  std::ifstream in(tmp, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  fs::remove(tmp);
  return bytes;
}

// ---------------------------------------------------------------------------

void run_simulate(RunContext& ctx, double hurst, int dim, double start,
                  double step, std::size_t count, long n_paths,
                  const std::string& method_name, std::uint64_t seed) {
  if (method_name != "cholesky" && method_name != "circulant")
    throw CLI::ValidationError("--method", "must be circulant or cholesky");
  const SimMethod method = method_name == "cholesky" ? SimMethod::cholesky
                                                     : SimMethod::circulant;
  FbmParams params(hurst, dim);
  TimeGrid grid(start, step, count);

  bool zeros_ok = true;
  for (long p = 0; p < n_paths; ++p) {
    const auto path = simulate_path(
        params, grid,
        derive_seed(seed, static_cast<std::uint64_t>(p), kStreamPath), method);
    if (grid.start == 0.0)
      for (int c = 0; c < dim; ++c)
        zeros_ok = zeros_ok && path.value(0, c) == 0.0;
    ctx.emit("path_" + std::to_string(p) + ".csv", path_to_csv(path));
    ctx.emit("path_" + std::to_string(p) + ".bin", path_binary_bytes(path));
  }
  if (grid.start == 0.0) ctx.check("initial_value_zero", zeros_ok);

  const auto a =
      simulate_path(params, grid, derive_seed(seed, 0, kStreamPath), method);
  const auto b =
      simulate_path(params, grid, derive_seed(seed, 0, kStreamPath), method);
  ctx.check("rerun_bit_identical", a.values == b.values);
}

void run_lnd_scan(RunContext& ctx, double hurst, long n_configs, int max_cond,
                  double lo, double hi, std::uint64_t seed, int threads) {
  FbmParams params(hurst, 1);
  bool upper_ok = true;
  LndScanResult result;
  try {
    result = lnd_scan(params, n_configs, max_cond, lo, hi, seed, threads);
  } catch (const std::logic_error&) {
    upper_ok = false;
  }
  ctx.check("ratio_upper_bound", upper_ok && result.max_ratio <= 1.0 + 1e-8);
  ctx.check("min_ratio_positive", upper_ok && result.min_ratio > 0.0);
  if (upper_ok) ctx.emit("lnd_scan.json", lnd_result_to_json(result));
}

DiscreteMeasure build_measure(const std::string& shape, double scale,
                              std::size_t n_atoms, std::uint64_t seed) {
  return DiscreteMeasure::uniform(
      2, make_test_set(parse_shape(shape), scale, n_atoms, seed));
}

void run_energy(RunContext& ctx, const std::string& shape, double scale,
                long n_atoms, const std::string& kernel_kind, int k,
                double hurst, int dim, double riesz_exponent,
                std::uint64_t seed) {
  const auto kernel = make_kernel(kernel_kind, k, hurst, dim, riesz_exponent);
  const auto mu =
      build_measure(shape, scale, static_cast<std::size_t>(n_atoms), seed);
  const auto result = energy(mu, kernel);

  double wsum = 0.0;
  for (double w : mu.weights) wsum += w;
  ctx.check("weights_on_simplex", std::abs(wsum - 1.0) <= 1e-12);

  // energy depends only on the distance multiset, not the atom order
  std::vector<double> rev;
  for (std::size_t i = mu.size(); i-- > 0;) {
    rev.push_back(mu.atom(i)[0]);
    rev.push_back(mu.atom(i)[1]);
  }
  const auto relabeled = energy(DiscreteMeasure::uniform(2, rev), kernel);
  ctx.check("relabel_invariance",
            std::abs(relabeled.energy - result.energy) <=
                1e-12 * std::max(1.0, std::abs(result.energy)));

  ctx.emit("measure.csv", measure_to_csv(mu));
  ctx.emit("energy.json", energy_result_to_json(result));
}

void run_capacity(RunContext& ctx, const std::string& shape, double scale,
                  long n_atoms, const std::string& kernel_kind, int k,
                  double hurst, int dim, double riesz_exponent, long max_iters,
                  double tol, std::uint64_t seed) {
  const auto kernel = make_kernel(kernel_kind, k, hurst, dim, riesz_exponent);
  const auto atoms = make_test_set(parse_shape(shape), scale,
                                   static_cast<std::size_t>(n_atoms), seed);
  const auto result = minimize_energy(2, atoms, kernel, max_iters, tol);

  bool monotone = true;
  for (std::size_t i = 1; i < result.objective.size(); ++i)
    monotone = monotone && result.objective[i] <=
                               result.objective[i - 1] +
                                   1e-12 * std::abs(result.objective[i - 1]);
  ctx.check("objective_nonincreasing", monotone);

  double wsum = 0.0;
  bool nonneg = true;
  for (double w : result.measure.weights) {
    wsum += w;
    nonneg = nonneg && w >= 0.0;
  }
  ctx.check("weights_on_simplex", nonneg && std::abs(wsum - 1.0) <= 1e-12);
  ctx.check("converged_or_budget",
            result.final_gap < tol || result.iterations == max_iters);

  json cap;
  cap["energy"] = result.energy.energy;
  if (result.energy.energy > 0.0)
    cap["capacity_lower_bound"] = 1.0 / result.energy.energy;
  else
    cap["capacity_lower_bound"] = nullptr;
  cap["final_gap"] = result.final_gap;
  cap["iterations"] = result.iterations;
  ctx.emit("capacity.json", cap.dump(2) + "\n");
  ctx.emit("weights.csv", measure_to_csv(result.measure));
}

MultipointConfig make_mp_config(double hurst, int dim, int k, double epsilon,
                                double grid_step, const std::string& shape,
                                double scale, long n_atoms, long n_paths,
                                std::uint64_t seed,
                                const json& intervals_json) {
  FbmParams params(hurst, dim);
  if (grid_step <= 0.0) grid_step = 0.5 * std::pow(epsilon, 1.0 / hurst);
  std::vector<Interval> intervals;
  if (intervals_json.is_array() && !intervals_json.empty()) {
    for (const auto& iv : intervals_json)
      intervals.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
  } else {
    intervals = MultipointConfig::default_intervals(k);
  }
  MultipointConfig config{
      params,
      k,
      epsilon,
      intervals,
      grid_step,
      build_measure(shape, scale, static_cast<std::size_t>(n_atoms), seed),
      n_paths,
      seed};
  config.validate();
  return config;
}

void moment_checks(RunContext& ctx, const std::vector<MomentReport>& reports) {
  bool fs_exact = true, range = true, cs = true, jensen = true;
  for (const auto& r : reports) {
    fs_exact = fs_exact && std::abs(r.F_part + r.S_part - r.mean_I_sq) <=
                               1e-10 * std::max(1.0, std::abs(r.mean_I_sq));
    range = range && r.pz_bound >= 0.0 && r.pz_bound <= 1.0 + 1e-12;
    cs = cs && r.pz_bound <= r.hit_freq + 1e-12;
    jensen = jensen && r.mean_I_sq >= r.mean_I * r.mean_I - 1e-12;
  }
  ctx.check("fs_partition_exact", fs_exact);
  ctx.check("pz_bound_in_range", range);
  ctx.check("pz_le_hit_freq", cs);
  ctx.check("second_moment_dominates", jensen);
}

void run_multipoint(RunContext& ctx, const std::string& mode,
                    const MultipointConfig& config,
                    const std::vector<double>& eps_list, int threads) {
  if (mode == "moments") {
    const auto rep = mc_moments(config, threads);
    moment_checks(ctx, {rep});
    ctx.emit("moments.csv", reports_to_csv({rep}));
    ctx.emit("moments.json", report_to_json(rep));
  } else if (mode == "sweep") {
    std::vector<double> eps = eps_list;
    if (eps.empty()) eps = {config.epsilon};
    const auto reports = epsilon_sweep(config, eps, threads);
    moment_checks(ctx, reports);
    ctx.emit("sweep.csv", reports_to_csv(reports));
  } else if (mode == "detect") {
    const double end = config.intervals.back().hi;
    const std::size_t count =
        static_cast<std::size_t>(std::ceil(end / config.grid_step - 1e-9)) + 1;
    const TimeGrid grid(0.0, config.grid_step, count);
    const auto path =
        simulate_path(config.params, grid,
                      derive_seed(config.seed, 0, kStreamPath),
                      SimMethod::circulant);
    const auto witness = detect_near_ktuple(path, config);
    // the reported spread must reproduce from the reported times and center
    double spread = 0.0;
    for (double t : witness.times) {
      const auto i = static_cast<std::size_t>(
          std::llround((t - grid.start) / grid.step));
      double d2 = 0.0;
      for (int c = 0; c < config.params.dim; ++c) {
        const double diff =
            path.value(i, c) - witness.center[static_cast<std::size_t>(c)];
        d2 += diff * diff;
      }
      spread = std::max(spread, std::sqrt(d2));
    }
    ctx.check("witness_spread_consistent",
              std::abs(spread - witness.min_spread) <= 1e-12);
    ctx.emit("witness.json", witness_to_json(witness));
    ctx.emit("path_0.csv", path_to_csv(path));
  } else {
    throw CLI::ValidationError("--mode", "must be moments, sweep or detect");
  }
}

void run_verify_integrals(RunContext& ctx) {
  std::string csv = "x,hd,closed_form,quadrature,rel_err\n";
  const std::vector<double> xs = {0.01, 0.05, 0.1, 0.25, 0.5, 0.9};
  const std::vector<double> hds = {1.2, 1.5, 1.8, 2.5, 3.0};

  for (double x : xs) {
    const double cf = closed_form_log(x);
    const auto q = quad_gap_radial([](double u) { return 1.0 / u; },
                                   GapRelation::greater, x, 1e-10);
    const double rel = std::abs(q.value - cf) / std::max(1e-300, std::abs(cf));
    csv += format_real(x) + ",1," + format_real(cf) + "," +
           format_real(q.value) + "," + format_real(rel) + "\n";
    ctx.check("log_x_" + compact(x), q.converged && rel <= 1e-6);
  }
  for (double hd : hds)
    for (double x : xs) {
      const double cf = closed_form_power(x, hd);
      const auto q =
          quad_gap_radial([hd](double u) { return std::pow(u, -hd); },
                          GapRelation::greater, x, std::max(1e-10, 1e-12 * cf));
      const double rel = std::abs(q.value - cf) / std::abs(cf);
      csv += format_real(x) + "," + format_real(hd) + "," + format_real(cf) +
             "," + format_real(q.value) + "," + format_real(rel) + "\n";
      ctx.check("power_x_" + compact(x) + "_hd_" + compact(hd),
                q.converged && rel <= 1e-6);
    }
  // M_j: the gap integral of 1/u stays under (2/H) log(1/r)
  for (double r : {0.01, 0.1, 0.5})
    for (double hurst : {0.4, 0.5, 0.75}) {
      const double x = std::pow(r, 1.0 / hurst);
      const auto q = quad_gap_radial([](double u) { return 1.0 / u; },
                                     GapRelation::greater, x, 1e-10);
      ctx.check("mj_r_" + compact(r) + "_H_" + compact(hurst),
                q.converged &&
                    q.value <= (2.0 / hurst) * std::log(1.0 / r) + 1e-9);
    }
  ctx.emit("verify_integrals.csv", csv);
}

void run_verify_detcov(RunContext& ctx, long n_tuples, std::uint64_t seed) {
  std::string csv = "hurst,size,max_rel_err\n";
  for (double hurst : {0.3, 0.5, 0.75}) {
    FbmParams params(hurst, 1);
    double worst_h = 0.0;
    for (std::size_t size = 2; size <= 8; ++size) {
      RandomStream rs(derive_seed(seed, size, kStreamLndConfig),
                      static_cast<std::uint64_t>(hurst * 1000.0));
      double worst = 0.0;
      std::uint64_t draw = 0;
      for (long rep = 0; rep < n_tuples; ++rep) {
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
        worst = std::max(worst, std::abs(prod - direct) /
                                    std::max(1e-300, std::abs(direct)));
      }
      csv += format_real(hurst) + "," + std::to_string(size) + "," +
             format_real(worst) + "\n";
      worst_h = std::max(worst_h, worst);
    }
    ctx.check("detcov_H_" + compact(hurst), worst_h < 1e-9);
  }
  ctx.emit("verify_detcov.csv", csv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fbmcap: fractional Brownian motion multiple-point toolkit"};
  app.require_subcommand(1);
  app.fallthrough(true);

  std::string config_path, out_flag;
  std::uint64_t seed = 1;
  int threads = 1;
  auto* config_opt = app.add_option("--config", config_path, "JSON config file");
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  auto* threads_opt = app.add_option(
      "--threads", threads, "worker threads (must not change results)");
  auto* out_opt = app.add_option("--out", out_flag, "output directory");

  OptionMerge merge;

  // simulate
  auto* sim = app.add_subcommand("simulate", "exact fBm path dumps");
  double s_hurst = 0.5, s_start = 0.0, s_step = 0.015625;
  int s_dim = 1;
  std::size_t s_count = 257;
  long s_npaths = 1;
  std::string s_method = "circulant";
  merge.bind(sim->add_option("--hurst", s_hurst, "Hurst index"), "hurst", s_hurst);
  merge.bind(sim->add_option("--dim", s_dim, "ambient dimension"), "dim", s_dim);
  merge.bind(sim->add_option("--start", s_start, "grid start"), "start", s_start);
  merge.bind(sim->add_option("--step", s_step, "grid step"), "step", s_step);
  merge.bind(sim->add_option("--count", s_count, "grid points"), "count", s_count);
  merge.bind(sim->add_option("--n-paths", s_npaths, "paths to dump"), "n_paths", s_npaths);
  merge.bind(sim->add_option("--method", s_method, "circulant|cholesky"), "method", s_method);

  // lnd-scan
  auto* lnd =
      app.add_subcommand("lnd-scan", "empirical strong-local-nondeterminism scan");
  double l_hurst = 0.5, l_lo = 0.25, l_hi = 4.0;
  long l_nconfigs = 10000;
  int l_maxcond = 6;
  merge.bind(lnd->add_option("--hurst", l_hurst, "Hurst index"), "hurst", l_hurst);
  merge.bind(lnd->add_option("--n-configs", l_nconfigs, "configurations"), "n_configs", l_nconfigs);
  merge.bind(lnd->add_option("--max-cond", l_maxcond, "max conditioning size"), "max_cond", l_maxcond);
  merge.bind(lnd->add_option("--lo", l_lo, "time range low"), "lo", l_lo);
  merge.bind(lnd->add_option("--hi", l_hi, "time range high"), "hi", l_hi);

  // energy / capacity share the measure and kernel options
  std::string e_shape = "disk", e_kernel = "log";
  double e_scale = 1.0 / 3.0, e_hurst = 0.75, e_riesz_exp = 0.0, e_tol = 1e-9;
  int e_k = 1, e_dim = 2;
  long e_natoms = 200, e_maxiters = 2000;

  auto* ener = app.add_subcommand("energy", "kernel energy of a test measure");
  merge.bind(ener->add_option("--shape", e_shape, "disk|segment|grid_square|two_points"), "shape", e_shape);
  merge.bind(ener->add_option("--scale", e_scale, "shape scale"), "scale", e_scale);
  merge.bind(ener->add_option("--n-atoms", e_natoms, "atoms"), "n_atoms", e_natoms);
  merge.bind(ener->add_option("--kernel", e_kernel, "log|riesz"), "kernel", e_kernel);
  merge.bind(ener->add_option("--k", e_k, "kernel multiplicity"), "k", e_k);
  merge.bind(ener->add_option("--hurst", e_hurst, "Hurst (riesz exponent)"), "hurst", e_hurst);
  merge.bind(ener->add_option("--dim", e_dim, "dimension (riesz exponent)"), "dim", e_dim);
  merge.bind(ener->add_option("--riesz-exponent", e_riesz_exp, "explicit riesz exponent"), "riesz_exponent", e_riesz_exp);

  auto* cap =
      app.add_subcommand("capacity", "energy minimization over the weight simplex");
  merge.bind(cap->add_option("--shape", e_shape, "disk|segment|grid_square|two_points"), "shape", e_shape);
  merge.bind(cap->add_option("--scale", e_scale, "shape scale"), "scale", e_scale);
  merge.bind(cap->add_option("--n-atoms", e_natoms, "atoms"), "n_atoms", e_natoms);
  merge.bind(cap->add_option("--kernel", e_kernel, "log|riesz"), "kernel", e_kernel);
  merge.bind(cap->add_option("--k", e_k, "kernel multiplicity"), "k", e_k);
  merge.bind(cap->add_option("--hurst", e_hurst, "Hurst (riesz exponent)"), "hurst", e_hurst);
  merge.bind(cap->add_option("--dim", e_dim, "dimension (riesz exponent)"), "dim", e_dim);
  merge.bind(cap->add_option("--riesz-exponent", e_riesz_exp, "explicit riesz exponent"), "riesz_exponent", e_riesz_exp);
  merge.bind(cap->add_option("--max-iters", e_maxiters, "Frank-Wolfe budget"), "max_iters", e_maxiters);
  merge.bind(cap->add_option("--tol", e_tol, "duality gap target"), "tol", e_tol);

  // multipoint
  auto* mp = app.add_subcommand("multipoint", "Monte Carlo near-k-tuple functional");
  std::string m_mode = "moments", m_shape = "disk";
  double m_hurst = 0.5, m_eps = 0.2, m_step = 0.0, m_scale = 1.0 / 3.0;
  int m_dim = 2, m_k = 2;
  long m_natoms = 200, m_npaths = 2000;
  std::vector<double> m_eps_list;
  merge.bind(mp->add_option("--mode", m_mode, "moments|sweep|detect"), "mode", m_mode);
  merge.bind(mp->add_option("--hurst", m_hurst, "Hurst index"), "hurst", m_hurst);
  merge.bind(mp->add_option("--dim", m_dim, "ambient dimension"), "dim", m_dim);
  merge.bind(mp->add_option("--k", m_k, "multiplicity"), "k", m_k);
  merge.bind(mp->add_option("--epsilon", m_eps, "indicator radius"), "epsilon", m_eps);
  merge.bind(mp->add_option("--eps-list", m_eps_list, "sweep epsilons (decreasing)"), "eps_list", m_eps_list);
  merge.bind(mp->add_option("--grid-step", m_step, "grid step (default eps^{1/H}/2)"), "grid_step", m_step);
  merge.bind(mp->add_option("--shape", m_shape, "measure shape"), "shape", m_shape);
  merge.bind(mp->add_option("--scale", m_scale, "measure scale"), "scale", m_scale);
  merge.bind(mp->add_option("--n-atoms", m_natoms, "measure atoms"), "n_atoms", m_natoms);
  merge.bind(mp->add_option("--n-paths", m_npaths, "Monte Carlo paths"), "n_paths", m_npaths);

  // verify
  auto* vint =
      app.add_subcommand("verify-integrals", "closed forms vs the quadrature oracle");
  auto* vdet =
      app.add_subcommand("verify-detcov", "determinant product formula vs direct LU");
  long v_ntuples = 100;
  merge.bind(vdet->add_option("--n-tuples", v_ntuples, "tuples per (H, size)"), "n_tuples", v_ntuples);

  CLI11_PARSE(app, argc, argv);

  try {
    if (config_opt->count() > 0) merge.load(config_path);
    if (seed_opt->count() == 0 && merge.file.contains("seed"))
      seed = merge.file["seed"].get<std::uint64_t>();
    if (threads_opt->count() == 0 && merge.file.contains("threads"))
      threads = merge.file["threads"].get<int>();
    merge.apply();

    // output dir: flag > FBMCAP_OUT > config file > default
    std::string out_dir = "fbmcap_out";
    if (merge.file.contains("out")) out_dir = merge.file["out"].get<std::string>();
    if (const char* env = std::getenv("FBMCAP_OUT"); env && *env) out_dir = env;
    if (out_opt->count() > 0) out_dir = out_flag;

    const auto t0 = std::chrono::steady_clock::now();
    RunContext ctx;

    if (sim->parsed()) {
      ctx.command = "simulate";
      ctx.config_echo = {{"hurst", s_hurst}, {"dim", s_dim},
                         {"start", s_start}, {"step", s_step},
                         {"count", s_count}, {"n_paths", s_npaths},
                         {"method", s_method}, {"seed", seed}};
      run_simulate(ctx, s_hurst, s_dim, s_start, s_step, s_count, s_npaths,
                   s_method, seed);
    } else if (lnd->parsed()) {
      ctx.command = "lnd-scan";
      ctx.config_echo = {{"hurst", l_hurst}, {"n_configs", l_nconfigs},
                         {"max_cond", l_maxcond}, {"lo", l_lo}, {"hi", l_hi},
                         {"seed", seed}};
      run_lnd_scan(ctx, l_hurst, l_nconfigs, l_maxcond, l_lo, l_hi, seed,
                   threads);
    } else if (ener->parsed()) {
      ctx.command = "energy";
      ctx.config_echo = {{"shape", e_shape}, {"scale", e_scale},
                         {"n_atoms", e_natoms}, {"kernel", e_kernel},
                         {"k", e_k}, {"hurst", e_hurst}, {"dim", e_dim},
                         {"riesz_exponent", e_riesz_exp}, {"seed", seed}};
      run_energy(ctx, e_shape, e_scale, e_natoms, e_kernel, e_k, e_hurst,
                 e_dim, e_riesz_exp, seed);
    } else if (cap->parsed()) {
      ctx.command = "capacity";
      ctx.config_echo = {{"shape", e_shape}, {"scale", e_scale},
                         {"n_atoms", e_natoms}, {"kernel", e_kernel},
                         {"k", e_k}, {"hurst", e_hurst}, {"dim", e_dim},
                         {"riesz_exponent", e_riesz_exp},
                         {"max_iters", e_maxiters}, {"tol", e_tol},
                         {"seed", seed}};
      run_capacity(ctx, e_shape, e_scale, e_natoms, e_kernel, e_k, e_hurst,
                   e_dim, e_riesz_exp, e_maxiters, e_tol, seed);
    } else if (mp->parsed()) {
      ctx.command = "multipoint";
      json intervals_json;
      if (merge.file.contains("intervals"))
        intervals_json = merge.file["intervals"];
      const auto config =
          make_mp_config(m_hurst, m_dim, m_k, m_eps, m_step, m_shape, m_scale,
                         m_natoms, m_npaths, seed, intervals_json);
      json eps_json = json::array();
      for (double e : m_eps_list) eps_json.push_back(e);
      ctx.config_echo = {{"mode", m_mode}, {"hurst", m_hurst}, {"dim", m_dim},
                         {"k", m_k}, {"epsilon", config.epsilon},
                         {"eps_list", eps_json},
                         {"grid_step", config.grid_step}, {"shape", m_shape},
                         {"scale", m_scale}, {"n_atoms", m_natoms},
                         {"n_paths", m_npaths}, {"seed", seed}};
      run_multipoint(ctx, m_mode, config, m_eps_list, threads);
    } else if (vint->parsed()) {
      ctx.command = "verify-integrals";
      ctx.config_echo = json::object();
      run_verify_integrals(ctx);
    } else if (vdet->parsed()) {
      ctx.command = "verify-detcov";
      ctx.config_echo = {{"n_tuples", v_ntuples}, {"seed", seed}};
      run_verify_detcov(ctx, v_ntuples, seed);
    }

    const bool all_pass = ctx.flush(out_dir, wall_seconds(t0));
    for (const auto& c : ctx.checks)
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "\n";
    return all_pass ? 0 : 1;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
