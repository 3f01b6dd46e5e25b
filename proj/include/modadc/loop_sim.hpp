// Cycle-accurate model of the mixed-signal folding loop: window comparator
// with hysteresis -> FSM -> fold counter -> delayed ZOH DAC feedback ->
// summing node -> sampling/quantizing ADC. Continuous time is discretized on
// a sub-grid of the control clock so comparator delay and late-correction
// over-folds are resolved without a circuit solver.
//
// Sign convention (pinned by round-trip tests): the summing node computes
// y(t) = g(t) + v_f(t) with v_f = 2*lambda*C_f in the ideal case, so the FSM
// decrements C_f on positive over-range and increments on negative
// over-range, and direct recovery is g~[k] = y^[k] - 2*lambda*C_f.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "modadc/signals.hpp"

namespace modadc {

enum class CalibrationMode { Ideal, Uncalibrated, Calibrated };

enum class FsmState { Keep, Increase, Decrease, Wait };
const char* to_string(FsmState s);

// [B1 B0] = [OVRN, OVRP]: 01 = input > +lambda, 10 = input < -lambda,
// 00 = in range. 11 is never produced by the comparator model. B2 is the
// controller's settling flag.
struct ComparatorFlags {
    bool ovrn = false;  // B1
    bool ovrp = false;  // B0
    bool wait = false;  // B2
    int code() const { return (ovrn ? 2 : 0) | (ovrp ? 1 : 0); }
};

struct LoopConfig {
    double lambda = 0.1;          // fold threshold, volts
    int q = 7;                    // DAC codes per fold = 2^q
    double v_fs = 1.0;            // DAC full scale; V_LSB = v_fs / 2^13
    double g_total = 0.0;         // path gain; <= 0 -> solved from the gain condition
    double f_ctrl = 200e6;        // control-loop clock
    double f_adc = 100e6;         // sampling ADC clock
    double adc_phase_deg = 60.0;  // ADC clock phase advance
    double hysteresis = 3.5e-3;   // comparator Schmitt hysteresis, volts
    double comparator_delay = 4e-9;
    int loop_delay_cycles = 5;    // flag-to-feedback transport delay, control cycles
    double adc_latency = 0.0;     // T_ADC; rounded up to whole control cycles
    int wait_cycles = -1;         // WAIT duration; < 0 -> loop_delay_cycles
    int adc_bits = 8;
    double adc_full_scale = 0.0;  // <= 0 -> 2*lambda
    int analog_ticks_per_cycle = 10;
    CalibrationMode calibration = CalibrationMode::Ideal;
    double undercomp_margin = 0.0;  // target delta_V when calibration != Ideal

    // Additive noise at the summing node. noise_bandwidth == 0 gives white
    // per-tick samples; > 0 gives a seeded band-limited tone sum with the
    // same RMS (deterministic, exactly band-limited).
    double noise_rms = 0.0;
    double noise_bandwidth = 0.0;
    std::uint64_t noise_seed = 1;

    double overfold_margin = 5e-3;  // allowance above hysteresis for event marking
    bool record_ticks = true;

    double t_ctrl() const { return 1.0 / f_ctrl; }
    double v_lsb() const { return v_fs / 8192.0; }
    double step_product() const;  // g_total * 2^q * v_lsb

    // Fills solved fields (g_total, wait_cycles, adc_full_scale) and checks
    // all invariants; throws std::invalid_argument naming the bad field.
    LoopConfig resolved() const;
};

struct TraceTick {
    double t;
    double g;
    double v_f;
    double y;
    std::uint8_t b1b0;  // comparator code
    std::uint8_t b2;
    long long c_f;      // architectural FSM register
    FsmState state;
    bool overfold;
};

struct AdcSample {
    std::int64_t k;
    double t_k;
    int code;
    double volts;
    long long c_f;  // count whose feedback was applied at t_k
};

struct OverfoldEvent {
    double t_start;
    double t_end;
    double peak_excursion;  // |y| - lambda at the worst tick
    int side;               // +1 above +lambda, -1 below -lambda
};

struct SaturationEvent {
    double t;
    long long c_f;
};

struct FoldTrace {
    LoopConfig config;  // resolved
    std::vector<TraceTick> ticks;
    std::vector<AdcSample> adc;
    std::vector<OverfoldEvent> overfold_events;
    std::vector<SaturationEvent> saturation_events;
    bool ticks_recorded = true;
};

struct FsmResult {
    FsmState state;
    long long c_f;
    bool saturated;
};

struct QuantResult {
    int code;
    double volts;
};

// Window comparator with Schmitt hysteresis: a side latches on reaching its
// threshold and releases only once y backs off by `hysteresis`. The
// propagation delay is applied by run_loop, not here.
ComparatorFlags comparator_step(double y, double lambda, double hysteresis,
                                const ComparatorFlags& prev);

// One control-clock decision. B2 holds the counter; otherwise 10 increments,
// 01 decrements, 00/11 hold. Saturation clamps and reports.
FsmResult fsm_step(FsmState state, const ComparatorFlags& flags, long long c_f, int q);

// DAC+gain output for a fold count under the configured calibration mode.
double feedback_voltage(long long c_f, const LoopConfig& cfg);

// Largest representable fold count for a step exponent: 2^(13-q) - 1.
long long max_fold_count(int q);

// Uniform mid-tread quantizer over [-full_scale, +full_scale); codes clamp
// at the rails.
QuantResult quantize(double y, int bits, double full_scale);

FoldTrace run_loop(const ContinuousSignal& signal, const LoopConfig& cfg, double duration);

// Re-scan a recorded trace for over-fold events with a caller-chosen margin.
std::vector<OverfoldEvent> detect_overfold(const FoldTrace& trace, double margin);

void write_trace_csv(const FoldTrace& trace, const std::string& path);
void write_adc_csv(const FoldTrace& trace, const std::string& path);
void write_overfold_csv(const std::vector<OverfoldEvent>& events, const std::string& path);

}  // namespace modadc
