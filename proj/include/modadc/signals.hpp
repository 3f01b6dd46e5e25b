// Analytic test-signal generators. Every signal is a continuous-time model
// evaluable at arbitrary t with a known amplitude bound and bandlimit, so
// the loop simulator can treat them as ideal sources and the recovery
// algorithms know their Nyquist rates.
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace modadc {

struct SineSpec {
    double amplitude;  // volts
    double f_m;        // Hz
    double phase;      // radians
};

// Dirichlet-kernel periodic sinc: repetition frequency f_m, harmonics up to
// the main-lobe bandwidth B, normalized so the lobe peak equals amplitude.
struct PeriodicSincSpec {
    double amplitude;  // volts
    double B;          // Hz, must be >= f_m
    double f_m;        // Hz
};

struct TriangularSpec {
    double amplitude;  // volts
    double f0;         // Hz
};

enum class CommScheme { Qam, Bpsk, Fsk };

// Pulse-shaped symbol train. QAM/BPSK ride a carrier at B/2 with
// root-raised-cosine pulses; FSK is phase-continuous with tones at
// B/2 +- symbol_rate/2. Symbols come from a fixed 64-bit LCG so traces are
// reproducible across implementations.
struct CommSpec {
    CommScheme scheme;
    double amplitude;      // volts (peak of the complex envelope)
    double symbol_rate;    // Hz
    double B;              // Hz, occupied bandwidth; bandlimit_Omega = B
    int num_symbols;
    std::uint64_t seed;
    double pulse_rolloff = 0.35;  // RRC beta in (0, 1]
};

// Identically-zero input for loop bring-up checks; f_nominal only feeds
// Nyquist-rate bookkeeping.
struct ZeroSpec {
    double f_nominal;  // Hz
};

using SignalSpec =
    std::variant<SineSpec, PeriodicSincSpec, TriangularSpec, CommSpec, ZeroSpec>;

class ContinuousSignal {
  public:
    explicit ContinuousSignal(const SignalSpec& spec);

    double eval(double t) const;
    std::vector<double> sample(double f_s, std::size_t n, double t0 = 0.0) const;

    double amplitude_bound() const { return amplitude_bound_; }
    double bandlimit_omega() const { return bandlimit_omega_; }
    const SignalSpec& spec() const { return spec_; }
    std::string name() const;

  private:
    SignalSpec spec_;
    double amplitude_bound_ = 0.0;
    double bandlimit_omega_ = 0.0;

    // Comm precomputation
    std::vector<double> sym_i_, sym_q_;   // QAM/BPSK constellation points
    std::vector<double> fsk_phase_base_;  // accumulated phase at symbol starts
    std::vector<int> fsk_bits_;
    double carrier_hz_ = 0.0;
    double envelope_scale_ = 1.0;
    int dirichlet_harmonics_ = 0;
};

ContinuousSignal make_signal(const SignalSpec& spec);

}  // namespace modadc
