// Controlled under-compensation algebra: the hardware fold step is made a
// little smaller than the ideal 2*lambda and a digital correction term keeps
// the calibrated feedback a constant delta_V below ideal for every fold count.
#pragma once

namespace modadc {

struct CalibrationParams {
    double lambda;    // volts
    double g_total;   // V/V
    int q;            // multi-bit step exponent
    double v_lsb;     // volts
    double delta_v;   // volts, derived: 2*lambda - g_total*2^q*v_lsb

    // Builds params and derives delta_v; throws if the step over-compensates.
    static CalibrationParams make(double lambda, double g_total, int q, double v_lsb);
    // Convenience: specify the hardware step product directly.
    static CalibrationParams from_step(double lambda, double step_product);

    double step_product() const;  // g_total * 2^q * v_lsb
};

double delta_v(const CalibrationParams& p);

// C_f * step_product; the uncalibrated hardware feedback.
double raw_feedback(long long c_f, const CalibrationParams& p);

// raw + (C_f - 1)*delta_V == 2*lambda*C_f - delta_V for C_f >= 1; odd
// symmetry for negative counts, zero at zero.
double calibrated_feedback(long long c_f, const CalibrationParams& p);

// Ideal-minus-raw gap C_f * delta_V.
double deviation(long long c_f, double delta_v_volts);

double ideal_feedback(long long c_f, double lambda);

}  // namespace modadc
