#include "fbmcap/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace fbmcap {

std::string format_real(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string path_to_csv(const PathSample& path) {
  std::string out = "time";
  for (int c = 0; c < path.params.dim; ++c)
    out += ",component_" + std::to_string(c);
  out += "\n";
  for (std::size_t i = 0; i < path.grid.count; ++i) {
    out += format_real(path.grid.time(i));
    for (int c = 0; c < path.params.dim; ++c) {
      out += ",";
      out += format_real(path.value(i, c));
    }
    out += "\n";
  }
  return out;
}

namespace {
constexpr char kPathMagic[8] = {'F', 'B', 'M', 'P', 'A', 'T', 'H', '\0'};
}

void write_path_binary(const PathSample& path, const std::string& filename) {
  std::ofstream f(filename, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + filename);
  const std::uint64_t version = 1;
  const double hurst = path.params.hurst;
  const std::uint64_t dim = static_cast<std::uint64_t>(path.params.dim);
  const std::uint64_t count = path.grid.count;
  f.write(kPathMagic, 8);
  f.write(reinterpret_cast<const char*>(&version), 8);
  f.write(reinterpret_cast<const char*>(&hurst), 8);
  f.write(reinterpret_cast<const char*>(&dim), 8);
  f.write(reinterpret_cast<const char*>(&count), 8);
  // column-major: time column, then each component column
  for (std::size_t i = 0; i < count; ++i) {
    const double t = path.grid.time(i);
    f.write(reinterpret_cast<const char*>(&t), 8);
  }
  for (std::uint64_t c = 0; c < dim; ++c)
    for (std::size_t i = 0; i < count; ++i) {
      const double v = path.value(i, static_cast<int>(c));
      f.write(reinterpret_cast<const char*>(&v), 8);
    }
  if (!f) throw std::runtime_error("write failed: " + filename);
}

std::vector<double> read_path_binary_columns(const std::string& filename,
                                             double& hurst, std::uint64_t& dim,
                                             std::uint64_t& count) {
  std::ifstream f(filename, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + filename);
  char magic[8];
  std::uint64_t version = 0;
  f.read(magic, 8);
  if (std::memcmp(magic, kPathMagic, 8) != 0)
    throw std::runtime_error("bad magic in " + filename);
  f.read(reinterpret_cast<char*>(&version), 8);
  if (version != 1) throw std::runtime_error("unsupported version");
  f.read(reinterpret_cast<char*>(&hurst), 8);
  f.read(reinterpret_cast<char*>(&dim), 8);
  f.read(reinterpret_cast<char*>(&count), 8);
  std::vector<double> cols((dim + 1) * count);
  f.read(reinterpret_cast<char*>(cols.data()),
         static_cast<std::streamsize>(cols.size() * 8));
  if (!f) throw std::runtime_error("truncated file: " + filename);
  return cols;
}

std::string measure_to_csv(const DiscreteMeasure& measure) {
  std::string out;
  for (int c = 0; c < measure.dim; ++c) {
    if (c) out += ",";
    out += "x" + std::to_string(c);
  }
  out += ",weight\n";
  for (std::size_t i = 0; i < measure.size(); ++i) {
    for (int c = 0; c < measure.dim; ++c) {
      if (c) out += ",";
      out += format_real(measure.atom(i)[c]);
    }
    out += ",";
    out += format_real(measure.weights[i]);
    out += "\n";
  }
  return out;
}

std::string matrix_to_csv(const CovMatrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.order(); ++i) {
    for (Eigen::Index j = 0; j < m.order(); ++j) {
      if (j) out += ",";
      out += format_real(m.entries(i, j));
    }
    out += "\n";
  }
  return out;
}

std::string lnd_result_to_json(const LndScanResult& r) {
  nlohmann::json j;
  j["configs_tested"] = r.configs_tested;
  j["min_ratio"] = r.min_ratio;
  j["max_ratio"] = r.max_ratio;
  j["argmin_config"] = {{"t", r.argmin.t},
                        {"conditioning_times", r.argmin.conditioning}};
  return j.dump(2) + "\n";
}

std::string energy_result_to_json(const EnergyResult& r) {
  nlohmann::json j;
  j["energy"] = r.energy;
  j["n_atoms"] = r.n_atoms;
  j["kernel"]["kind"] =
      r.kernel.kind == Kernel::Kind::log_plus_pow ? "log_plus_pow" : "riesz";
  j["kernel"]["k"] = r.kernel.multiplicity;
  j["kernel"]["exponent"] = r.kernel.exponent;
  return j.dump(2) + "\n";
}

std::string witness_to_json(const KTupleWitness& w) {
  nlohmann::json j;
  j["min_spread"] = w.min_spread;
  j["times"] = w.times;
  j["center"] = w.center;
  return j.dump(2) + "\n";
}

std::string reports_to_csv(const std::vector<MomentReport>& reports) {
  std::string out =
      "epsilon,mean_I,stderr_I,mean_I_sq,F,S,pz_bound,hit_freq,n_paths\n";
  for (const auto& r : reports) {
    out += format_real(r.epsilon) + "," + format_real(r.mean_I) + "," +
           format_real(r.stderr_I) + "," + format_real(r.mean_I_sq) + "," +
           format_real(r.F_part) + "," + format_real(r.S_part) + "," +
           format_real(r.pz_bound) + "," + format_real(r.hit_freq) + "," +
           std::to_string(r.n_paths) + "\n";
  }
  return out;
}

std::string report_to_json(const MomentReport& r) {
  nlohmann::json j;
  j["epsilon"] = r.epsilon;
  j["mean_I"] = r.mean_I;
  j["stderr_I"] = r.stderr_I;
  j["mean_I_sq"] = r.mean_I_sq;
  j["stderr_I_sq"] = r.stderr_I_sq;
  j["F_part"] = r.F_part;
  j["S_part"] = r.S_part;
  j["pz_bound"] = r.pz_bound;
  j["hit_freq"] = r.hit_freq;
  j["n_paths"] = r.n_paths;
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& filename, const std::string& content) {
  std::ofstream f(filename, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + filename);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + filename);
}

}  // namespace fbmcap
