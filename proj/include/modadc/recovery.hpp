// Reconstruction of the unfolded samples. Direct recovery uses the stored
// fold count; the blind algorithms estimate the 2*lambda-grid residual from
// the folded samples alone:
//   - UsfHighOrder: order-N finite differences, centered modulo, N grid-exact
//     anti-difference stages.
//   - RSoD: the order-2 variant plus a least-squares line consistency step
//     for the two integration constants.
//   - FirstOrderIter: jump detection seeds the residual, then alternate an
//     ideal lowpass projection with grid re-rounding until fixed point.
// Residual estimates are carried as exact int64 multiples of 2*lambda; the
// unresolved whole-record fold offset is fixed by zero-meaning the result
// (valid when |mean g| < lambda).
#pragma once

#include <span>
#include <string>
#include <vector>

namespace modadc {

struct RecoveryInput {
    std::vector<double> y_hat;  // measured modulo samples
    double lambda = 0.1;
    double f_s = 0.0;           // Hz
    double omega = 0.0;         // signal bandlimit, Hz
    std::vector<long long> c_f_at_sample;  // optional, for Direct
    double tolerance = 0.0;     // allowed |y_hat| excess over lambda; <= 0 -> lambda/2
};

enum class RecoveryAlgorithm { Direct, UsfHighOrder, RSoD, FirstOrderIter };
const char* to_string(RecoveryAlgorithm a);

struct RecoveryConfig {
    RecoveryAlgorithm algorithm = RecoveryAlgorithm::RSoD;
    int order_n = 3;      // UsfHighOrder only
    int max_iters = 50;
    double tol = 1e-9;    // volts, FirstOrderIter stop threshold
    bool strict = true;   // sampling-condition violation: throw vs converged=false
};

struct RecoveredSignal {
    std::vector<double> g_tilde;
    std::string algorithm;
    bool converged = false;
    int iters_used = 0;
    int boundary_skip = 0;  // samples at each end affected by differencing
};

// Forward difference applied `order` times; output is shorter by `order`.
std::vector<double> finite_diff(std::span<const double> seq, int order);

RecoveredSignal direct_recover(std::span<const double> y_hat, std::span<const long long> c_f,
                               double lambda);
RecoveredSignal usf_recover(const RecoveryInput& input, int order_n, bool strict = true);
RecoveredSignal rsod_recover(const RecoveryInput& input, bool strict = true);
RecoveredSignal first_order_iter_recover(const RecoveryInput& input, int max_iters, double tol);

// Dispatch on cfg.algorithm.
RecoveredSignal recover(const RecoveryInput& input, const RecoveryConfig& cfg);

void write_recovery_csv(const RecoveryInput& input, const RecoveredSignal& rec,
                        const std::string& path);

}  // namespace modadc
