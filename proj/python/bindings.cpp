#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fbmcap/capacity.hpp"
#include "fbmcap/fbm.hpp"
#include "fbmcap/gaussian.hpp"
#include "fbmcap/io.hpp"
#include "fbmcap/multipoint.hpp"
#include "fbmcap/quadrature.hpp"

namespace py = pybind11;
using namespace fbmcap;

namespace {

py::array_t<double> path_values(const PathSample& p) {
  const auto n = static_cast<py::ssize_t>(p.grid.count);
  const auto d = static_cast<py::ssize_t>(p.params.dim);
  py::array_t<double> out({n, d});
  std::copy(p.values.begin(), p.values.end(), out.mutable_data());
  return out;
}

py::array_t<double> grid_times(const TimeGrid& g) {
  py::array_t<double> out(static_cast<py::ssize_t>(g.count));
  auto* data = out.mutable_data();
  for (std::size_t i = 0; i < g.count; ++i) data[i] = g.time(i);
  return out;
}

py::array_t<double> measure_atoms(const DiscreteMeasure& m) {
  const auto n = static_cast<py::ssize_t>(m.size());
  const auto d = static_cast<py::ssize_t>(m.dim);
  py::array_t<double> out({n, d});
  std::copy(m.atoms.begin(), m.atoms.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "fractional Brownian motion multiple-point toolkit";

  py::class_<FbmParams>(m, "FbmParams")
      .def(py::init<double, int>(), py::arg("hurst"), py::arg("dim"))
      .def_readonly("hurst", &FbmParams::hurst)
      .def_readonly("dim", &FbmParams::dim)
      .def("__repr__", [](const FbmParams& p) {
        return "FbmParams(hurst=" + std::to_string(p.hurst) +
               ", dim=" + std::to_string(p.dim) + ")";
      });

  py::class_<TimeGrid>(m, "TimeGrid")
      .def(py::init<double, double, std::size_t>(), py::arg("start"),
           py::arg("step"), py::arg("count"))
      .def_readonly("start", &TimeGrid::start)
      .def_readonly("step", &TimeGrid::step)
      .def_readonly("count", &TimeGrid::count)
      .def("times", &grid_times);

  py::enum_<SimMethod>(m, "SimMethod")
      .value("circulant", SimMethod::circulant)
      .value("cholesky", SimMethod::cholesky);

  py::class_<PathSample>(m, "PathSample")
      .def_readonly("params", &PathSample::params)
      .def_readonly("grid", &PathSample::grid)
      .def_readonly("seed", &PathSample::seed)
      .def_readonly("used_fallback", &PathSample::used_fallback)
      .def_property_readonly("values", &path_values)
      .def("to_csv", &path_to_csv);

  m.def("covariance", &covariance, py::arg("params"), py::arg("t"),
        py::arg("s"));
  m.def("simulate_path", &simulate_path, py::arg("params"), py::arg("grid"),
        py::arg("seed"), py::arg("method") = SimMethod::circulant);
  m.def("scale_path", &scale_path, py::arg("path"), py::arg("c"));

  py::class_<TimeTuple>(m, "TimeTuple")
      .def(py::init<std::vector<double>>(), py::arg("times"))
      .def(py::init<>())
      .def_readonly("times", &TimeTuple::times);

  py::class_<CovMatrix>(m, "CovMatrix")
      .def_readonly("entries", &CovMatrix::entries)
      .def_readonly("normalized", &CovMatrix::normalized);

  py::class_<LndConfig>(m, "LndConfig")
      .def_readonly("t", &LndConfig::t)
      .def_readonly("conditioning", &LndConfig::conditioning);

  py::class_<LndScanResult>(m, "LndScanResult")
      .def_readonly("configs_tested", &LndScanResult::configs_tested)
      .def_readonly("min_ratio", &LndScanResult::min_ratio)
      .def_readonly("max_ratio", &LndScanResult::max_ratio)
      .def_readonly("argmin", &LndScanResult::argmin)
      .def("to_json", &lnd_result_to_json);

  m.def("build_cov", &build_cov, py::arg("params"), py::arg("tuple"));
  m.def("conditional_variance", &conditional_variance, py::arg("params"),
        py::arg("t"), py::arg("cond"));
  m.def("detcov_product", &detcov_product, py::arg("params"),
        py::arg("tuple"));
  m.def("gershgorin_max", &gershgorin_max, py::arg("matrix"));
  m.def("normalize_increments", &normalize_increments, py::arg("params"),
        py::arg("tuple"));
  m.def("lnd_scan", &lnd_scan, py::arg("params"), py::arg("n_configs"),
        py::arg("max_cond"), py::arg("lo"), py::arg("hi"), py::arg("seed"),
        py::arg("threads") = 1);

  py::class_<Kernel> kernel(m, "Kernel");
  kernel.def_static("log_pow", &Kernel::log_pow, py::arg("k"))
      .def_static("riesz", &Kernel::riesz, py::arg("k"), py::arg("params"))
      .def_static("riesz_with_exponent", &Kernel::riesz_with_exponent,
                  py::arg("k"), py::arg("exponent"))
      .def_readonly("multiplicity", &Kernel::multiplicity)
      .def_readonly("exponent", &Kernel::exponent);

  m.def("kernel_eval", &kernel_eval, py::arg("kernel"), py::arg("s"));

  py::class_<DiscreteMeasure>(m, "DiscreteMeasure")
      .def(py::init<int, std::vector<double>, std::vector<double>>(),
           py::arg("dim"), py::arg("atoms"), py::arg("weights"))
      .def_static("uniform", &DiscreteMeasure::uniform, py::arg("dim"),
                  py::arg("atoms"))
      .def_readonly("dim", &DiscreteMeasure::dim)
      .def_readonly("weights", &DiscreteMeasure::weights)
      .def_property_readonly("atoms", &measure_atoms)
      .def("to_csv", &measure_to_csv);

  py::class_<EnergyResult>(m, "EnergyResult")
      .def_readonly("energy", &EnergyResult::energy)
      .def_readonly("n_atoms", &EnergyResult::n_atoms)
      .def("to_json", &energy_result_to_json);

  py::class_<MinimizeResult>(m, "MinimizeResult")
      .def_readonly("measure", &MinimizeResult::measure)
      .def_readonly("energy", &MinimizeResult::energy)
      .def_readonly("objective", &MinimizeResult::objective)
      .def_readonly("final_gap", &MinimizeResult::final_gap)
      .def_readonly("iterations", &MinimizeResult::iterations);

  m.def("energy", &energy, py::arg("measure"), py::arg("kernel"));
  m.def("minimize_energy", &minimize_energy, py::arg("dim"), py::arg("atoms"),
        py::arg("kernel"), py::arg("max_iters"), py::arg("tol"));
  m.def("scale_measure", &scale_measure, py::arg("measure"),
        py::arg("lambda_"));

  py::enum_<TestShape>(m, "TestShape")
      .value("disk", TestShape::disk)
      .value("segment", TestShape::segment)
      .value("grid_square", TestShape::grid_square)
      .value("two_points", TestShape::two_points);
  m.def("make_test_set", &make_test_set, py::arg("shape"), py::arg("scale"),
        py::arg("n_atoms"), py::arg("seed"));

  py::class_<Interval>(m, "Interval")
      .def(py::init([](double lo, double hi) { return Interval{lo, hi}; }),
           py::arg("lo"), py::arg("hi"))
      .def_readonly("lo", &Interval::lo)
      .def_readonly("hi", &Interval::hi);

  py::class_<MultipointConfig>(m, "MultipointConfig")
      .def(py::init([](const FbmParams& params, int k, double epsilon,
                       std::vector<Interval> intervals, double grid_step,
                       const DiscreteMeasure& measure, long n_paths,
                       std::uint64_t seed) {
             MultipointConfig c{params,    k,       epsilon,
                                std::move(intervals), grid_step, measure,
                                n_paths,   seed};
             if (c.intervals.empty())
               c.intervals = MultipointConfig::default_intervals(k);
             c.validate();
             return c;
           }),
           py::arg("params"), py::arg("k"), py::arg("epsilon"),
           py::arg("intervals"), py::arg("grid_step"), py::arg("measure"),
           py::arg("n_paths"), py::arg("seed"))
      .def_static("default_intervals", &MultipointConfig::default_intervals,
                  py::arg("k"))
      .def_readonly("epsilon", &MultipointConfig::epsilon)
      .def_readonly("grid_step", &MultipointConfig::grid_step)
      .def_readonly("k", &MultipointConfig::k);

  py::class_<MomentReport>(m, "MomentReport")
      .def_readonly("mean_I", &MomentReport::mean_I)
      .def_readonly("stderr_I", &MomentReport::stderr_I)
      .def_readonly("mean_I_sq", &MomentReport::mean_I_sq)
      .def_readonly("stderr_I_sq", &MomentReport::stderr_I_sq)
      .def_readonly("F_part", &MomentReport::F_part)
      .def_readonly("S_part", &MomentReport::S_part)
      .def_readonly("pz_bound", &MomentReport::pz_bound)
      .def_readonly("hit_freq", &MomentReport::hit_freq)
      .def_readonly("n_paths", &MomentReport::n_paths)
      .def_readonly("epsilon", &MomentReport::epsilon)
      .def("to_json", &report_to_json);

  py::class_<KTupleWitness>(m, "KTupleWitness")
      .def_readonly("min_spread", &KTupleWitness::min_spread)
      .def_readonly("times", &KTupleWitness::times)
      .def_readonly("center", &KTupleWitness::center)
      .def("to_json", &witness_to_json);

  m.def("compute_I_eps", &compute_I_eps, py::arg("path"), py::arg("config"));
  m.def("mc_moments", &mc_moments, py::arg("config"), py::arg("threads") = 1);
  m.def("epsilon_sweep", &epsilon_sweep, py::arg("config"),
        py::arg("eps_list"), py::arg("threads") = 1);
  m.def("detect_near_ktuple", &detect_near_ktuple, py::arg("path"),
        py::arg("config"));
  m.def("reports_to_csv", &reports_to_csv, py::arg("reports"));

  py::class_<QuadResult>(m, "QuadResult")
      .def_readonly("value", &QuadResult::value)
      .def_readonly("est_error", &QuadResult::est_error)
      .def_readonly("evaluations", &QuadResult::evaluations)
      .def_readonly("converged", &QuadResult::converged);

  py::enum_<GapRelation>(m, "GapRelation")
      .value("none", GapRelation::none)
      .value("greater", GapRelation::greater)
      .value("less", GapRelation::less);

  m.def("closed_form_log", &closed_form_log, py::arg("x"));
  m.def("closed_form_power", &closed_form_power, py::arg("x"), py::arg("hd"));
  m.def("quad_region", &quad_region, py::arg("f"), py::arg("a"),
        py::arg("rel"), py::arg("x"), py::arg("tol"),
        py::arg("max_evals") = 2000000);
  m.def("quad_gap_radial", &quad_gap_radial, py::arg("g"), py::arg("rel"),
        py::arg("x"), py::arg("tol"), py::arg("max_evals") = 200000);

  m.attr("__version__") = "0.1.0";
}
