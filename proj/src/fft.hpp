#pragma once

#include <complex>
#include <span>
#include <vector>

namespace ffou::detail {

// Unnormalized complex DFT, in place. Plans are cached per (size, direction).
void fft_inplace(std::span<std::complex<double>> data, bool forward);

// Linear convolution truncated to the first `a.size()` samples.
std::vector<double> convolve_truncated(std::span<const double> a, std::span<const double> b);

std::size_t next_pow2(std::size_t n);

} // namespace ffou::detail
