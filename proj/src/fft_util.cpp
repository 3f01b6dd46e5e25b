#include "modadc/fft_util.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace modadc::fft {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

std::vector<std::complex<double>> rfft(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("rfft: empty input");
    std::size_t n = x.size();
    std::size_t nb = n / 2 + 1;
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(nb);
    for (std::size_t i = 0; i < n; ++i) in[i] = x[i];
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::vector<std::complex<double>> bins(nb);
    for (std::size_t i = 0; i < nb; ++i) bins[i] = {out[i][0], out[i][1]};
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return bins;
}

std::vector<double> irfft(std::span<const std::complex<double>> bins, std::size_t n) {
    std::size_t nb = n / 2 + 1;
    if (bins.size() != nb) throw std::invalid_argument("irfft: bin count does not match n");
    fftw_complex* in = fftw_alloc_complex(nb);
    double* out = fftw_alloc_real(n);
    for (std::size_t i = 0; i < nb; ++i) {
        in[i][0] = bins[i].real();
        in[i][1] = bins[i].imag();
    }
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::vector<double> x(n);
    double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = out[i] * scale;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return x;
}

}  // namespace modadc::fft
