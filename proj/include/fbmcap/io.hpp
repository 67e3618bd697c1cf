#pragma once

#include <string>
#include <vector>

#include "fbmcap/capacity.hpp"
#include "fbmcap/fbm.hpp"
#include "fbmcap/gaussian.hpp"
#include "fbmcap/multipoint.hpp"

namespace fbmcap {

// All CSV reals are written with 17 significant digits so values round-trip
// exactly; identical inputs therefore produce byte-identical files.

std::string format_real(double v);

/// columns: time, component_0..component_{d-1}
std::string path_to_csv(const PathSample& path);

/// Binary column-major dump. Five 8-byte header fields (magic "FBMPATH\0",
/// version, hurst as IEEE-754 double, dim, count), then the time column and
/// each component column as doubles. Little-endian.
void write_path_binary(const PathSample& path, const std::string& filename);
std::vector<double> read_path_binary_columns(const std::string& filename,
                                             double& hurst, std::uint64_t& dim,
                                             std::uint64_t& count);

/// columns: x_0..x_{d-1}, weight
std::string measure_to_csv(const DiscreteMeasure& measure);

std::string matrix_to_csv(const CovMatrix& m);

std::string lnd_result_to_json(const LndScanResult& r);

std::string energy_result_to_json(const EnergyResult& r);

std::string witness_to_json(const KTupleWitness& w);

/// columns: epsilon, mean_I, stderr_I, mean_I_sq, F, S, pz_bound, hit_freq,
/// n_paths
std::string reports_to_csv(const std::vector<MomentReport>& reports);

std::string report_to_json(const MomentReport& r);

void write_text_file(const std::string& filename, const std::string& content);

}  // namespace fbmcap
