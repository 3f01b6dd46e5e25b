#include "modadc/loop_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "modadc/calibration.hpp"
#include "modadc/csv.hpp"

namespace modadc {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double uniform01(std::uint64_t& s) {
    return static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
}

// Summing-node noise. White mode draws one Gaussian per analog tick
// (Box-Muller over splitmix64); band-limited mode is a fixed tone sum with
// exact RMS, evaluable at arbitrary t.
class NoiseSource {
  public:
    NoiseSource(double rms, double bandwidth, std::uint64_t seed)
        : rms_(rms), white_(bandwidth <= 0.0), state_(seed) {
        if (rms_ <= 0.0) return;
        if (!white_) {
            const int m = 24;
            double amp = rms_ * std::sqrt(2.0 / m);
            tones_.reserve(m);
            for (int i = 0; i < m; ++i) {
                double jitter = 0.5 * (uniform01(state_) - 0.5);
                double f = bandwidth * (i + 0.5 + jitter) / m;
                double phase = 2.0 * kPi * uniform01(state_);
                tones_.push_back({amp, f, phase});
            }
        }
    }

    bool enabled() const { return rms_ > 0.0; }

    double next_tick(double t) {
        if (rms_ <= 0.0) return 0.0;
        if (!white_) {
            last_ = eval_tones(t);
            return last_;
        }
        if (have_spare_) {
            have_spare_ = false;
            last_ = rms_ * spare_;
            return last_;
        }
        double u1 = uniform01(state_);
        double u2 = uniform01(state_);
        if (u1 < 1e-300) u1 = 1e-300;
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        last_ = rms_ * r * std::cos(2.0 * kPi * u2);
        return last_;
    }

    // Value seen by the ADC at an exact sample instant: tone noise is
    // analytic; white noise holds the covering tick's draw.
    double at_sample(double t) const {
        if (rms_ <= 0.0) return 0.0;
        if (!white_) return eval_tones(t);
        return last_;
    }

  private:
    struct Tone {
        double amp, freq, phase;
    };
    double eval_tones(double t) const {
        double acc = 0.0;
        for (const Tone& tn : tones_) acc += tn.amp * std::cos(2.0 * kPi * tn.freq * t + tn.phase);
        return acc;
    }

    double rms_;
    bool white_;
    std::uint64_t state_;
    std::vector<Tone> tones_;
    bool have_spare_ = false;
    double spare_ = 0.0;
    double last_ = 0.0;
};

}  // namespace

const char* to_string(FsmState s) {
    switch (s) {
        case FsmState::Keep: return "KEEP";
        case FsmState::Increase: return "INCREASE";
        case FsmState::Decrease: return "DECREASE";
        default: return "WAIT";
    }
}

double LoopConfig::step_product() const {
    return g_total * std::ldexp(v_lsb(), q);
}

LoopConfig LoopConfig::resolved() const {
    LoopConfig c = *this;
    require(c.lambda > 0.0, "LoopConfig.lambda must be > 0");
    require(c.q >= 0 && c.q <= 13, "LoopConfig.q must be in [0, 13]");
    require(c.v_fs > 0.0, "LoopConfig.v_fs must be > 0");
    require(c.f_ctrl > 0.0, "LoopConfig.f_ctrl must be > 0");
    require(c.f_adc > 0.0, "LoopConfig.f_adc must be > 0");
    require(c.f_ctrl >= c.f_adc, "LoopConfig.f_ctrl must be >= f_adc");
    require(c.hysteresis >= 0.0 && c.hysteresis < c.lambda,
            "LoopConfig.hysteresis must be in [0, lambda)");
    require(c.comparator_delay >= 0.0, "LoopConfig.comparator_delay must be >= 0");
    require(c.loop_delay_cycles >= 1, "LoopConfig.loop_delay_cycles must be >= 1");
    require(c.adc_latency >= 0.0, "LoopConfig.adc_latency must be >= 0");
    require(c.adc_bits >= 1 && c.adc_bits <= 16, "LoopConfig.adc_bits must be in [1, 16]");
    require(c.analog_ticks_per_cycle >= 2, "LoopConfig.analog_ticks_per_cycle must be >= 2");
    require(c.noise_rms >= 0.0, "LoopConfig.noise_rms must be >= 0");

    if (c.wait_cycles < 0) c.wait_cycles = c.loop_delay_cycles;
    if (c.adc_full_scale <= 0.0) c.adc_full_scale = 2.0 * c.lambda;

    double target_step = 2.0 * c.lambda;
    if (c.calibration != CalibrationMode::Ideal) {
        require(c.undercomp_margin >= 0.0, "LoopConfig.undercomp_margin must be >= 0");
        require(c.undercomp_margin < 2.0 * c.lambda,
                "LoopConfig.undercomp_margin must be < 2*lambda");
        target_step = 2.0 * c.lambda - c.undercomp_margin;
    }
    if (c.g_total <= 0.0) {
        c.g_total = target_step / std::ldexp(c.v_lsb(), c.q);
    }
    if (c.calibration == CalibrationMode::Ideal) {
        // The ideal loop applies an exact 2*lambda correction per fold.
        require(std::fabs(c.step_product() - 2.0 * c.lambda) <= 1e-9 * c.lambda,
                "LoopConfig.g_total violates the ideal gain condition G*2^q*V_LSB = 2*lambda");
    } else {
        require(c.step_product() <= 2.0 * c.lambda + 1e-12,
                "LoopConfig.g_total over-compensates (step product > 2*lambda)");
    }
    return c;
}

ComparatorFlags comparator_step(double y, double lambda, double hysteresis,
                                const ComparatorFlags& prev) {
    require(lambda > hysteresis, "comparator_step: lambda must exceed hysteresis");
    ComparatorFlags f = prev;
    if (y >= lambda) f.ovrp = true;
    else if (y < lambda - hysteresis) f.ovrp = false;
    if (y <= -lambda) f.ovrn = true;
    else if (y > -lambda + hysteresis) f.ovrn = false;
    // A window comparator cannot see both rails at once; with
    // lambda > hysteresis the two release conditions enforce that.
    if (f.ovrp && f.ovrn) {
        if (y > 0) f.ovrn = false;
        else f.ovrp = false;
    }
    return f;
}

FsmResult fsm_step(FsmState /*state*/, const ComparatorFlags& flags, long long c_f, int q) {
    long long hi = max_fold_count(q);
    long long lo = -(hi + 1);  // range is [-2^(13-q), 2^(13-q)-1]
    if (flags.wait) return {FsmState::Wait, c_f, false};
    int code = flags.code();
    if (code == 2) {  // below -lambda: raise y by one fold
        if (c_f + 1 > hi) return {FsmState::Increase, hi, true};
        return {FsmState::Increase, c_f + 1, false};
    }
    if (code == 1) {  // above +lambda: lower y by one fold
        if (c_f - 1 < lo) return {FsmState::Decrease, lo, true};
        return {FsmState::Decrease, c_f - 1, false};
    }
    return {FsmState::Keep, c_f, false};
}

double feedback_voltage(long long c_f, const LoopConfig& cfg) {
    switch (cfg.calibration) {
        case CalibrationMode::Ideal:
            return 2.0 * cfg.lambda * static_cast<double>(c_f);
        case CalibrationMode::Uncalibrated:
            return static_cast<double>(c_f) * cfg.step_product();
        default: {
            auto p = CalibrationParams::make(cfg.lambda, cfg.g_total, cfg.q, cfg.v_lsb());
            return calibrated_feedback(c_f, p);
        }
    }
}

long long max_fold_count(int q) {
    require(q >= 0 && q <= 13, "max_fold_count: q must be in [0, 13]");
    return (1LL << (13 - q)) - 1;
}

QuantResult quantize(double y, int bits, double full_scale) {
    require(bits >= 1 && bits <= 16, "quantize: bits must be in [1, 16]");
    require(full_scale > 0.0, "quantize: full_scale must be > 0");
    double step = 2.0 * full_scale / std::ldexp(1.0, bits);
    long long hi = (1LL << (bits - 1)) - 1;
    long long lo = -(hi + 1);
    auto code = static_cast<long long>(std::llround(y / step));
    code = std::clamp(code, lo, hi);
    return {static_cast<int>(code), static_cast<double>(code) * step};
}

namespace {

// Shared over-fold scan rule: an excursion beyond lambda+hysteresis+margin is
// an event only when a feedback step landed *onto* that side within the
// settling window; the expected same-side excursion while a correction is in
// flight is normal operation.
struct OverfoldScanner {
    double thr;
    long long window_ticks;
    long long last_land_pos = -1;  // tick of last positive-going v_f step
    long long last_land_neg = -1;
    double prev_v_f = 0.0;
    bool in_event = false;
    OverfoldEvent cur{};
    std::vector<OverfoldEvent> events;

    void step(long long tick, double t, double v_f, double y, double lambda, bool* out_flag) {
        if (v_f != prev_v_f) {
            (v_f > prev_v_f ? last_land_pos : last_land_neg) = tick;
            prev_v_f = v_f;
        }
        bool of = false;
        int side = 0;
        if (y > thr && last_land_pos >= 0 && tick - last_land_pos <= window_ticks) {
            of = true;
            side = 1;
        } else if (y < -thr && last_land_neg >= 0 && tick - last_land_neg <= window_ticks) {
            of = true;
            side = -1;
        }
        if (of) {
            double exc = std::fabs(y) - lambda;
            if (!in_event) {
                in_event = true;
                cur = {t, t, exc, side};
            } else {
                cur.t_end = t;
                cur.peak_excursion = std::max(cur.peak_excursion, exc);
            }
        } else if (in_event) {
            events.push_back(cur);
            in_event = false;
        }
        if (out_flag) *out_flag = of;
    }

    void finish() {
        if (in_event) {
            events.push_back(cur);
            in_event = false;
        }
    }
};

}  // namespace

FoldTrace run_loop(const ContinuousSignal& signal, const LoopConfig& cfg_in, double duration) {
    LoopConfig cfg = cfg_in.resolved();
    require(duration > 0.0, "run_loop: duration must be > 0");

    const int tpc = cfg.analog_ticks_per_cycle;
    const double t_c = cfg.t_ctrl();
    const double dt = t_c / tpc;
    const auto n_ticks = static_cast<long long>(std::ceil(duration / dt));
    const double adc_period = 1.0 / cfg.f_adc;
    const double adc_offset = (cfg.adc_phase_deg / 360.0) * adc_period;
    require(adc_offset < duration, "run_loop: duration covers no ADC sample");

    int cmp_delay_ticks = std::max(1LL, std::llround(cfg.comparator_delay / dt));
    int delay_cycles = cfg.loop_delay_cycles +
                       static_cast<int>(std::ceil(cfg.adc_latency * cfg.f_ctrl - 1e-12));

    FoldTrace trace;
    trace.config = cfg;
    trace.ticks_recorded = cfg.record_ticks;
    if (cfg.record_ticks) trace.ticks.reserve(static_cast<std::size_t>(n_ticks));

    // feedback command pipeline: value decided at edge e is applied at e+delay
    std::vector<long long> pipe(static_cast<std::size_t>(delay_cycles) + 1, 0);
    // comparator output history for the propagation delay
    std::vector<ComparatorFlags> hist(static_cast<std::size_t>(cmp_delay_ticks) + 2);

    NoiseSource noise(cfg.noise_rms, cfg.noise_bandwidth, cfg.noise_seed);

    OverfoldScanner scan;
    scan.thr = cfg.lambda + cfg.hysteresis + cfg.overfold_margin;
    scan.window_ticks = static_cast<long long>(cfg.wait_cycles + 2) * tpc;

    FsmState state = FsmState::Keep;
    long long arch_cf = 0;
    long long applied_cf = 0;
    double v_f = 0.0;
    int wait_counter = 0;
    bool saturated_prev = false;
    ComparatorFlags latches;

    std::int64_t adc_k = 0;
    double next_t_k = adc_offset;

    for (long long i = 0; i < n_ticks; ++i) {
        double t = static_cast<double>(i) * dt;

        if (i % tpc == 0) {
            long long e = i / tpc;
            std::size_t len = pipe.size();
            applied_cf = pipe[static_cast<std::size_t>(((e - delay_cycles) % static_cast<long long>(len) +
                                                        static_cast<long long>(len)) %
                                                       static_cast<long long>(len))];
            v_f = feedback_voltage(applied_cf, cfg);

            ComparatorFlags seen;
            if (i >= cmp_delay_ticks) seen = hist[static_cast<std::size_t>((i - cmp_delay_ticks) % static_cast<long long>(hist.size()))];
            seen.wait = wait_counter > 0;

            FsmResult r = fsm_step(state, seen, arch_cf, cfg.q);
            if (r.saturated && !saturated_prev) trace.saturation_events.push_back({t, r.c_f});
            saturated_prev = r.saturated;
            bool acted = (r.state == FsmState::Increase || r.state == FsmState::Decrease);
            if (acted) wait_counter = cfg.wait_cycles;
            else if (wait_counter > 0) --wait_counter;
            state = r.state;
            arch_cf = r.c_f;
            pipe[static_cast<std::size_t>(e % static_cast<long long>(len))] = arch_cf;
        }

        double g = signal.eval(t);
        double n = noise.next_tick(t);
        double y = g + v_f + n;

        latches = comparator_step(y, cfg.lambda, cfg.hysteresis, latches);
        hist[static_cast<std::size_t>(i % static_cast<long long>(hist.size()))] = latches;

        bool of_flag = false;
        scan.step(i, t, v_f, y, cfg.lambda, &of_flag);

        if (cfg.record_ticks) {
            trace.ticks.push_back({t, g, v_f, y, static_cast<std::uint8_t>(latches.code()),
                                   static_cast<std::uint8_t>(wait_counter > 0 ? 1 : 0), arch_cf,
                                   state, of_flag});
        }

        double t_next = static_cast<double>(i + 1) * dt;
        while (next_t_k < t_next && next_t_k < duration) {
            if (next_t_k >= t) {
                double ys = signal.eval(next_t_k) + v_f + noise.at_sample(next_t_k);
                QuantResult qr = quantize(ys, cfg.adc_bits, cfg.adc_full_scale);
                trace.adc.push_back({adc_k, next_t_k, qr.code, qr.volts, applied_cf});
            }
            ++adc_k;
            next_t_k = adc_offset + static_cast<double>(adc_k) * adc_period;
        }
    }
    scan.finish();
    trace.overfold_events = std::move(scan.events);
    return trace;
}

std::vector<OverfoldEvent> detect_overfold(const FoldTrace& trace, double margin) {
    if (!trace.ticks_recorded || trace.ticks.empty())
        throw std::invalid_argument("detect_overfold: trace has no recorded ticks");
    const LoopConfig& cfg = trace.config;
    OverfoldScanner scan;
    scan.thr = cfg.lambda + cfg.hysteresis + margin;
    scan.window_ticks =
        static_cast<long long>(cfg.wait_cycles + 2) * cfg.analog_ticks_per_cycle;
    for (std::size_t i = 0; i < trace.ticks.size(); ++i) {
        const TraceTick& tk = trace.ticks[i];
        scan.step(static_cast<long long>(i), tk.t, tk.v_f, tk.y, cfg.lambda, nullptr);
    }
    scan.finish();
    return scan.events;
}

void write_trace_csv(const FoldTrace& trace, const std::string& path) {
    CsvWriter w(path);
    w.raw_line("t,g,v_f,y,B1B0,B2,C_f,state,overfold");
    static const char* code_str[4] = {"00", "01", "10", "11"};
    for (const TraceTick& tk : trace.ticks) {
        std::string line = fmt_g17(tk.t);
        line += ',';
        line += fmt_g17(tk.g);
        line += ',';
        line += fmt_g17(tk.v_f);
        line += ',';
        line += fmt_g17(tk.y);
        line += ',';
        line += code_str[tk.b1b0 & 3];
        line += ',';
        line += tk.b2 ? '1' : '0';
        line += ',';
        line += std::to_string(tk.c_f);
        line += ',';
        line += to_string(tk.state);
        line += ',';
        line += tk.overfold ? '1' : '0';
        w.raw_line(line);
    }
}

void write_adc_csv(const FoldTrace& trace, const std::string& path) {
    CsvWriter w(path);
    w.raw_line("k,t_k,code,volts,C_f");
    for (const AdcSample& s : trace.adc) {
        std::string line = std::to_string(s.k);
        line += ',';
        line += fmt_g17(s.t_k);
        line += ',';
        line += std::to_string(s.code);
        line += ',';
        line += fmt_g17(s.volts);
        line += ',';
        line += std::to_string(s.c_f);
        w.raw_line(line);
    }
}

void write_overfold_csv(const std::vector<OverfoldEvent>& events, const std::string& path) {
    CsvWriter w(path);
    w.raw_line("t_start,t_end,peak_excursion,side");
    for (const OverfoldEvent& e : events) {
        std::string line = fmt_g17(e.t_start);
        line += ',';
        line += fmt_g17(e.t_end);
        line += ',';
        line += fmt_g17(e.peak_excursion);
        line += ',';
        line += std::to_string(e.side);
        w.raw_line(line);
    }
}

}  // namespace modadc
