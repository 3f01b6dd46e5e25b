// Evaluation metrics: reconstructed SNR, oversampling factor, SINAD and an
// averaged-periodogram PSD with fixed, documented estimator settings so that
// outputs are reproducible bit for bit.
//
// Conventions (pinned here and in tests):
//   - snr_r returns +infinity on an exact match; CSV writes the string "inf".
//   - sinad: mean removed, Hann window, fundamental = power in the peak bin
//     +-2 neighbors located near f0, bins 0..1 excluded everywhere.
//   - psd: one-sided density in dB/Hz, Hann window by default, 50% overlap
//     Welch averaging; with a rectangular window total PSD power equals the
//     time-domain mean square (Parseval).
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace modadc {

struct PsdPoint {
    double frequency_hz;
    double power_db_per_hz;
};

enum class PsdWindow { Hann, Rect };

double snr_r(std::span<const double> g, std::span<const double> g_tilde,
             std::size_t skip_boundary);

double oversampling_factor(double f_s, double f_nyq);

double sinad(std::span<const double> samples, double f_s, double f0);

std::vector<PsdPoint> psd(std::span<const double> samples, double f_s, std::size_t segment_len,
                          double overlap, PsdWindow window = PsdWindow::Hann);

// Median level of a minus median level of b over the band, in dB. The median
// is robust to isolated signal-harmonic bins.
double noise_floor_delta(std::span<const PsdPoint> psd_a, std::span<const PsdPoint> psd_b,
                         std::pair<double, double> band);

struct MetricsReport {
    std::optional<double> snr_r_db;
    std::optional<double> of;
    std::optional<double> sinad_db;
    std::optional<double> noise_floor_delta_db;
    std::vector<PsdPoint> psd;  // empty when not requested
};

void write_psd_csv(std::span<const PsdPoint> psd, const std::string& path);
void write_metrics_csv(const MetricsReport& report, const std::string& path);

}  // namespace modadc
