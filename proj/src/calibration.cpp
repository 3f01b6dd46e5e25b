#include "modadc/calibration.hpp"

#include <cmath>
#include <stdexcept>

namespace modadc {

CalibrationParams CalibrationParams::make(double lambda, double g_total, int q, double v_lsb) {
    if (!(lambda > 0.0)) throw std::invalid_argument("CalibrationParams.lambda must be > 0");
    if (q < 0 || q > 13) throw std::invalid_argument("CalibrationParams.q must be in [0, 13]");
    CalibrationParams p{lambda, g_total, q, v_lsb, 0.0};
    double dv = 2.0 * lambda - p.step_product();
    if (dv < -1e-12 * lambda)
        throw std::invalid_argument("CalibrationParams.delta_v negative: step over-compensates");
    p.delta_v = std::max(dv, 0.0);
    return p;
}

CalibrationParams CalibrationParams::from_step(double lambda, double step_product) {
    // Fold the whole step into g_total with a unit DAC path.
    return make(lambda, step_product, 0, 1.0);
}

double CalibrationParams::step_product() const {
    return g_total * std::ldexp(v_lsb, q);
}

double delta_v(const CalibrationParams& p) {
    double dv = 2.0 * p.lambda - p.step_product();
    if (dv < -1e-12 * p.lambda)
        throw std::invalid_argument("delta_v negative: step over-compensates");
    return std::max(dv, 0.0);
}

double raw_feedback(long long c_f, const CalibrationParams& p) {
    return static_cast<double>(c_f) * p.step_product();
}

double calibrated_feedback(long long c_f, const CalibrationParams& p) {
    if (c_f == 0) return 0.0;
    if (c_f < 0) return -calibrated_feedback(-c_f, p);
    return raw_feedback(c_f, p) + static_cast<double>(c_f - 1) * p.delta_v;
}

double deviation(long long c_f, double delta_v_volts) {
    return static_cast<double>(c_f) * delta_v_volts;
}

double ideal_feedback(long long c_f, double lambda) {
    return 2.0 * lambda * static_cast<double>(c_f);
}

}  // namespace modadc
