#include "modadc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "modadc/csv.hpp"
#include "modadc/fft_util.hpp"

namespace modadc {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

double to_db(double p) { return 10.0 * std::log10(std::max(p, 1e-300)); }

}  // namespace

double snr_r(std::span<const double> g, std::span<const double> g_tilde,
             std::size_t skip_boundary) {
    require(g.size() == g_tilde.size(), "snr_r: length mismatch");
    require(g.size() > 2 * skip_boundary, "snr_r: interior window empty");
    double ps = 0.0, pe = 0.0;
    for (std::size_t k = skip_boundary; k < g.size() - skip_boundary; ++k) {
        double e = g[k] - g_tilde[k];
        ps += g[k] * g[k];
        pe += e * e;
    }
    require(ps > 0.0, "snr_r: zero-signal window is degenerate");
    if (pe == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(ps / pe);
}

double oversampling_factor(double f_s, double f_nyq) {
    require(f_s > 0.0, "oversampling_factor: f_s must be > 0");
    require(f_nyq > 0.0, "oversampling_factor: f_nyq must be > 0");
    return f_s / f_nyq;
}

double sinad(std::span<const double> samples, double f_s, double f0) {
    require(f0 > 0.0 && f0 < f_s / 2.0, "sinad: f0 must be below f_s/2");
    std::size_t n = samples.size();
    require(static_cast<double>(n) >= 10.0 * f_s / f0, "sinad: need at least 10 periods of f0");

    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double w = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
        x[i] = (samples[i] - mean) * w;
    }
    auto bins = fft::rfft(x);
    std::size_t nb = bins.size();
    std::vector<double> p(nb);
    for (std::size_t k = 0; k < nb; ++k) p[k] = std::norm(bins[k]);

    auto nominal = static_cast<std::size_t>(std::llround(f0 * static_cast<double>(n) / f_s));
    std::size_t lo = nominal > 3 ? nominal - 3 : 2;
    std::size_t hi = std::min(nominal + 3, nb - 1);
    std::size_t b0 = lo;
    for (std::size_t k = lo; k <= hi; ++k)
        if (p[k] > p[b0]) b0 = k;

    std::size_t f_lo = b0 > 2 ? b0 - 2 : 2;
    std::size_t f_hi = std::min(b0 + 2, nb - 1);
    double fund = 0.0, rest = 0.0;
    for (std::size_t k = 2; k < nb; ++k) {
        if (k >= f_lo && k <= f_hi) fund += p[k];
        else rest += p[k];
    }
    require(fund > 0.0, "sinad: no fundamental found near f0");
    if (rest <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(fund / rest);
}

std::vector<PsdPoint> psd(std::span<const double> samples, double f_s, std::size_t segment_len,
                          double overlap, PsdWindow window) {
    require(f_s > 0.0, "psd: f_s must be > 0");
    require(segment_len >= 2, "psd: segment_len must be >= 2");
    require(segment_len <= samples.size(), "psd: segment_len exceeds record");
    require(overlap >= 0.0 && overlap < 1.0, "psd: overlap must be in [0, 1)");

    std::vector<double> w(segment_len);
    double u = 0.0;
    for (std::size_t i = 0; i < segment_len; ++i) {
        w[i] = (window == PsdWindow::Hann)
                   ? 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                          static_cast<double>(segment_len))
                   : 1.0;
        u += w[i] * w[i];
    }

    auto hop = static_cast<std::size_t>(
        std::max(1.0, std::round(static_cast<double>(segment_len) * (1.0 - overlap))));
    std::size_t nb = segment_len / 2 + 1;
    std::vector<double> acc(nb, 0.0);
    std::size_t n_seg = 0;
    std::vector<double> seg(segment_len);
    for (std::size_t start = 0; start + segment_len <= samples.size(); start += hop) {
        for (std::size_t i = 0; i < segment_len; ++i) seg[i] = samples[start + i] * w[i];
        auto bins = fft::rfft(seg);
        for (std::size_t k = 0; k < nb; ++k) acc[k] += std::norm(bins[k]);
        ++n_seg;
    }

    std::vector<PsdPoint> out(nb);
    bool even = (segment_len % 2) == 0;
    for (std::size_t k = 0; k < nb; ++k) {
        double one_sided = (k == 0 || (even && k == nb - 1)) ? 1.0 : 2.0;
        double density = one_sided * acc[k] / (static_cast<double>(n_seg) * f_s * u);
        out[k] = {static_cast<double>(k) * f_s / static_cast<double>(segment_len), to_db(density)};
    }
    return out;
}

double noise_floor_delta(std::span<const PsdPoint> psd_a, std::span<const PsdPoint> psd_b,
                         std::pair<double, double> band) {
    require(band.first < band.second, "noise_floor_delta: empty band");
    auto median_in_band = [&](std::span<const PsdPoint> p) {
        std::vector<double> vals;
        for (const PsdPoint& pt : p)
            if (pt.frequency_hz >= band.first && pt.frequency_hz <= band.second)
                vals.push_back(pt.power_db_per_hz);
        require(!vals.empty(), "noise_floor_delta: band outside PSD range");
        std::size_t mid = vals.size() / 2;
        std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid), vals.end());
        double hi = vals[mid];
        if (vals.size() % 2 == 1) return hi;
        double lo = *std::max_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid));
        return 0.5 * (lo + hi);
    };
    return median_in_band(psd_a) - median_in_band(psd_b);
}

void write_psd_csv(std::span<const PsdPoint> psd, const std::string& path) {
    CsvWriter w(path);
    w.raw_line("frequency_hz,power_db_per_hz");
    for (const PsdPoint& p : psd) {
        w.raw_line(fmt_g17(p.frequency_hz) + "," + fmt_f2(p.power_db_per_hz));
    }
}

void write_metrics_csv(const MetricsReport& report, const std::string& path) {
    CsvWriter w(path);
    w.raw_line("metric,value");
    auto db_value = [](double v) {
        return std::isinf(v) ? std::string("inf") : fmt_f2(v);
    };
    if (report.snr_r_db) w.raw_line("snr_r_db," + db_value(*report.snr_r_db));
    if (report.of) w.raw_line("of," + fmt_f2(*report.of));
    if (report.sinad_db) w.raw_line("sinad_db," + db_value(*report.sinad_db));
    if (report.noise_floor_delta_db)
        w.raw_line("noise_floor_delta_db," + db_value(*report.noise_floor_delta_db));
}

}  // namespace modadc
