#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace fbmcap {

// Uniform-cell spatial hash over points in R^d. Supports radius queries and
// nearest-point lookup by expanding cell rings; falls back to a linear scan
// when the rings grow past the point cloud. Query results are index-ordered,
// so callers get deterministic output.
class SpatialHash {
 public:
  // points: n x dim row-major; cell: bucket edge length
  SpatialHash(int dim, double cell, std::vector<double> points);

  // indices of points with |p - center| <= radius, ascending
  void query_ball(const double* center, double radius,
                  std::vector<int>& out) const;

  // index of the point closest to center (lowest index wins ties);
  // -1 when the cloud is empty
  int nearest(const double* center) const;

  std::size_t size() const { return n_; }

 private:
  std::int64_t cell_coord(double x) const;
  std::uint64_t cell_key(const std::vector<std::int64_t>& c) const;
  double dist2(const double* a, std::size_t idx) const;
  int linear_nearest(const double* center) const;

  int dim_;
  double cell_;
  std::size_t n_;
  std::vector<double> pts_;
  std::unordered_map<std::uint64_t, std::vector<int>> buckets_;
};

}  // namespace fbmcap
