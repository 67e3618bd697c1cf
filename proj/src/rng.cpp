#include "fbmcap/rng.hpp"

#include <cmath>

namespace fbmcap {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kBump0 = 0x9E3779B9u;
constexpr std::uint32_t kBump1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0,
                         std::uint32_t k1) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

// two 32-bit words -> double in [0, 1), 53-bit mantissa
inline double to_unit(std::uint32_t a, std::uint32_t b) {
  const std::uint64_t x = (static_cast<std::uint64_t>(a) << 32) | b;
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::uint64_t key, std::uint64_t block,
                                        std::uint64_t stream) {
  std::array<std::uint32_t, 4> c = {
      static_cast<std::uint32_t>(block),
      static_cast<std::uint32_t>(block >> 32),
      static_cast<std::uint32_t>(stream),
      static_cast<std::uint32_t>(stream >> 32),
  };
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
  philox_round(c, k0, k1);
  for (int r = 1; r < 10; ++r) {
    k0 += kBump0;
    k1 += kBump1;
    philox_round(c, k0, k1);
  }
  return c;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index,
                          std::uint32_t tag) {
  const std::uint64_t stream =
      (static_cast<std::uint64_t>(tag) << 32) | 0x5EEDD00Du;
  const auto w = philox4x32(seed, index, stream);
  return (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
}

double RandomStream::uniform(std::uint64_t i) const {
  const auto w = philox4x32(seed_, i >> 1, stream_);
  return (i & 1) ? to_unit(w[2], w[3]) : to_unit(w[0], w[1]);
}

double RandomStream::normal(std::uint64_t i) const {
  const auto w = philox4x32(seed_, i >> 1, stream_);
  // u1 in (0, 1] so the log is finite
  const double u1 = to_unit(w[0], w[1]) + 0x1.0p-53;
  const double u2 = to_unit(w[2], w[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  return (i & 1) ? r * std::sin(theta) : r * std::cos(theta);
}

}  // namespace fbmcap
