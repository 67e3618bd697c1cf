#pragma once

#include <array>
#include <cstdint>

namespace fbmcap {

// Philox4x32-10 counter-based block cipher (Salmon et al., SC'11).
// One (key, counter) pair deterministically yields a 128-bit block, so any
// draw can be addressed by index without sequencing state. This is what makes
// every stochastic result in this project reproducible across thread counts.
std::array<std::uint32_t, 4> philox4x32(std::uint64_t key,
                                        std::uint64_t block,
                                        std::uint64_t stream);

// Derive an independent 64-bit seed from (seed, index, tag). Used for
// per-path, per-component and per-config substreams; tags keep the
// different uses from colliding.
enum : std::uint32_t {
  kStreamComponent = 1,
  kStreamPath = 2,
  kStreamLndConfig = 3,
  kStreamSweep = 4,
};
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index,
                          std::uint32_t tag);

// Random access stream of i.i.d. draws: draw i is a pure function of
// (seed, stream, i).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  // uniform in [0, 1), 53-bit resolution
  double uniform(std::uint64_t i) const;

  // standard normal; Box-Muller pair per 128-bit block, no rejection
  double normal(std::uint64_t i) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace fbmcap
