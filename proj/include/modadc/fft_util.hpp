// Thin wrapper over the system FFT with serialized planning so callers can
// run from worker threads.
#pragma once

#include <complex>
#include <span>
#include <vector>

namespace modadc::fft {

// Real-input DFT: n samples in, n/2+1 bins out.
std::vector<std::complex<double>> rfft(std::span<const double> x);

// Inverse of rfft with 1/n normalization.
std::vector<double> irfft(std::span<const std::complex<double>> bins, std::size_t n);

}  // namespace modadc::fft
