#pragma once

#include <complex>
#include <vector>

namespace fbmcap {

// In-place iterative radix-2 FFT. Size must be a power of two; the circulant
// embedding always pads to one, so no general-size machinery is needed.
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse);

std::size_t next_pow2(std::size_t n);

}  // namespace fbmcap
