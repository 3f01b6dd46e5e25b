#include "modadc/signals.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace modadc {

namespace {

constexpr double kPi = std::numbers::pi;

// Fixed 64-bit LCG (Knuth MMIX constants). This is part of the reproducibility
// contract: identical seeds must give identical symbol trains everywhere.
struct Lcg64 {
    std::uint64_t state;
    std::uint64_t next() {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return state;
    }
    std::uint32_t bits(int k) { return static_cast<std::uint32_t>(next() >> (64 - k)); }
};

// Root-raised-cosine pulse, unit peak time scale x = tau/T.
double rrc_pulse(double x, double beta) {
    double ax = std::fabs(x);
    if (ax < 1e-12) return 1.0 - beta + 4.0 * beta / kPi;
    double denom_root = 4.0 * beta * ax;
    if (std::fabs(denom_root - 1.0) < 1e-8) {
        double a = kPi / (4.0 * beta);
        return (beta / std::numbers::sqrt2) *
               ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
    }
    double num = std::sin(kPi * x * (1.0 - beta)) + 4.0 * beta * x * std::cos(kPi * x * (1.0 + beta));
    double den = kPi * x * (1.0 - denom_root * denom_root);
    return num / den;
}

// Pulses further than this many symbol periods from t are ignored.
constexpr int kPulseWindow = 25;

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

ContinuousSignal::ContinuousSignal(const SignalSpec& spec) : spec_(spec) {
    if (const auto* s = std::get_if<SineSpec>(&spec_)) {
        require(s->amplitude > 0.0, "SineSpec.amplitude must be > 0");
        require(s->f_m > 0.0, "SineSpec.f_m must be > 0");
        amplitude_bound_ = s->amplitude;
        bandlimit_omega_ = s->f_m;
    } else if (const auto* p = std::get_if<PeriodicSincSpec>(&spec_)) {
        require(p->amplitude > 0.0, "PeriodicSincSpec.amplitude must be > 0");
        require(p->f_m > 0.0, "PeriodicSincSpec.f_m must be > 0");
        require(p->B >= p->f_m, "PeriodicSincSpec.B must be >= f_m");
        dirichlet_harmonics_ = static_cast<int>(std::floor(p->B / p->f_m + 1e-9));
        require(dirichlet_harmonics_ <= 4096, "PeriodicSincSpec.B/f_m too large");
        amplitude_bound_ = p->amplitude;
        bandlimit_omega_ = p->B;
    } else if (const auto* tr = std::get_if<TriangularSpec>(&spec_)) {
        require(tr->amplitude > 0.0, "TriangularSpec.amplitude must be > 0");
        require(tr->f0 > 0.0, "TriangularSpec.f0 must be > 0");
        amplitude_bound_ = tr->amplitude;
        // Declared effective bandwidth: 11th harmonic carries >= 99% of the power.
        bandlimit_omega_ = 11.0 * tr->f0;
    } else if (const auto* z = std::get_if<ZeroSpec>(&spec_)) {
        require(z->f_nominal > 0.0, "ZeroSpec.f_nominal must be > 0");
        amplitude_bound_ = 0.0;
        bandlimit_omega_ = z->f_nominal;
    } else {
        const auto& c = std::get<CommSpec>(spec_);
        require(c.amplitude > 0.0, "CommSpec.amplitude must be > 0");
        require(c.symbol_rate > 0.0, "CommSpec.symbol_rate must be > 0");
        require(c.B > 0.0, "CommSpec.B must be > 0");
        require(c.num_symbols >= 1, "CommSpec.num_symbols must be >= 1");
        require(c.pulse_rolloff > 0.0 && c.pulse_rolloff <= 1.0,
                "CommSpec.pulse_rolloff must be in (0, 1]");
        carrier_hz_ = c.B / 2.0;
        bandlimit_omega_ = c.B;
        amplitude_bound_ = c.amplitude;

        Lcg64 rng{c.seed};
        int n = c.num_symbols;
        if (c.scheme == CommScheme::Fsk) {
            // Tones separated by the symbol rate need headroom inside B.
            require(c.symbol_rate <= c.B / 2.0, "CommSpec.symbol_rate must be <= B/2 for FSK");
            fsk_bits_.resize(n);
            fsk_phase_base_.resize(n + 1);
            fsk_phase_base_[0] = 0.0;
            for (int j = 0; j < n; ++j) {
                fsk_bits_[j] = (rng.bits(1) != 0) ? 1 : -1;
                // Deviation +-R/2 over one symbol of length 1/R accumulates +-pi.
                fsk_phase_base_[j + 1] = fsk_phase_base_[j] + kPi * fsk_bits_[j];
            }
        } else {
            require((1.0 + c.pulse_rolloff) * c.symbol_rate <= c.B,
                    "CommSpec.symbol_rate too high for bandwidth B");
            sym_i_.resize(n);
            sym_q_.resize(n);
            for (int j = 0; j < n; ++j) {
                if (c.scheme == CommScheme::Bpsk) {
                    sym_i_[j] = (rng.bits(1) != 0) ? 1.0 : -1.0;
                    sym_q_[j] = 0.0;
                } else {  // 16-QAM
                    static const double lvl[4] = {-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0};
                    std::uint32_t b = rng.bits(4);
                    sym_i_[j] = lvl[b & 3];
                    sym_q_[j] = lvl[(b >> 2) & 3];
                }
            }
            // Normalize the complex envelope peak to `amplitude` from a dense
            // scan of one frame; the small margin covers inter-grid peaks.
            double t_sym = 1.0 / c.symbol_rate;
            double peak = 0.0;
            int grid = 128;
            envelope_scale_ = 1.0;
            for (int j = 0; j < n; ++j) {
                for (int m = 0; m < grid; ++m) {
                    double t = (j + m / static_cast<double>(grid)) * t_sym;
                    double ei = 0.0, eq = 0.0;
                    int j0 = static_cast<int>(std::floor(t / t_sym));
                    for (int dj = -kPulseWindow; dj <= kPulseWindow; ++dj) {
                        int ju = j0 + dj;
                        int jw = ((ju % n) + n) % n;
                        double p = rrc_pulse(t / t_sym - ju, c.pulse_rolloff);
                        ei += sym_i_[jw] * p;
                        eq += sym_q_[jw] * p;
                    }
                    peak = std::max(peak, std::hypot(ei, eq));
                }
            }
            envelope_scale_ = c.amplitude / (peak * (1.0 + 1e-3));
        }
    }
}

double ContinuousSignal::eval(double t) const {
    if (const auto* s = std::get_if<SineSpec>(&spec_)) {
        return s->amplitude * std::sin(2.0 * kPi * s->f_m * t + s->phase);
    }
    if (const auto* p = std::get_if<PeriodicSincSpec>(&spec_)) {
        // Dirichlet kernel via the cosine sum: exact, no 0/0 at lobe centers.
        int k_max = dirichlet_harmonics_;
        double acc = 1.0;
        for (int k = 1; k <= k_max; ++k) acc += 2.0 * std::cos(2.0 * kPi * k * p->f_m * t);
        return p->amplitude * acc / (2.0 * k_max + 1.0);
    }
    if (const auto* tr = std::get_if<TriangularSpec>(&spec_)) {
        return tr->amplitude * (2.0 / kPi) * std::asin(std::sin(2.0 * kPi * tr->f0 * t));
    }
    if (std::holds_alternative<ZeroSpec>(spec_)) return 0.0;
    const auto& c = std::get<CommSpec>(spec_);
    int n = c.num_symbols;
    double t_sym = 1.0 / c.symbol_rate;
    if (c.scheme == CommScheme::Fsk) {
        double x = t / t_sym;
        double jf = std::floor(x);
        auto j = static_cast<long long>(jf);
        long long jw = ((j % n) + n) % n;
        long long frames = (j - jw) / n;
        double dev = static_cast<double>(frames) * fsk_phase_base_[n] + fsk_phase_base_[jw] +
                     kPi * fsk_bits_[jw] * (x - jf);
        return c.amplitude * std::cos(2.0 * kPi * carrier_hz_ * t + dev);
    }
    double x = t / t_sym;
    int j0 = static_cast<int>(std::floor(x));
    double ei = 0.0, eq = 0.0;
    for (int dj = -kPulseWindow; dj <= kPulseWindow; ++dj) {
        int ju = j0 + dj;
        int jw = ((ju % n) + n) % n;
        double p = rrc_pulse(x - ju, c.pulse_rolloff);
        ei += sym_i_[jw] * p;
        eq += sym_q_[jw] * p;
    }
    double w = 2.0 * kPi * carrier_hz_ * t;
    return envelope_scale_ * (ei * std::cos(w) - eq * std::sin(w));
}

std::vector<double> ContinuousSignal::sample(double f_s, std::size_t n, double t0) const {
    if (!(f_s > 0.0)) throw std::invalid_argument("sample: f_s must be > 0");
    if (n < 1) throw std::invalid_argument("sample: N must be >= 1");
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = eval(t0 + static_cast<double>(k) / f_s);
    return out;
}

std::string ContinuousSignal::name() const {
    if (std::holds_alternative<SineSpec>(spec_)) return "sine";
    if (std::holds_alternative<PeriodicSincSpec>(spec_)) return "periodic_sinc";
    if (std::holds_alternative<TriangularSpec>(spec_)) return "triangular";
    if (std::holds_alternative<ZeroSpec>(spec_)) return "zero";
    switch (std::get<CommSpec>(spec_).scheme) {
        case CommScheme::Qam: return "qam";
        case CommScheme::Bpsk: return "bpsk";
        default: return "fsk";
    }
}

ContinuousSignal make_signal(const SignalSpec& spec) { return ContinuousSignal(spec); }

}  // namespace modadc
