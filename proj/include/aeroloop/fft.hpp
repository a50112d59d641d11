#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace aeroloop {

bool is_power_of_two(std::size_t n);

/// In-place iterative radix-2 FFT (decimation in time). `data.size()`
/// must be a power of two. Forward transform, no normalization:
/// X_k = sum_n x_n exp(-2 pi i k n / N).
void fft_radix2(std::vector<std::complex<double>>& data);

} // namespace aeroloop
