#include "modadc/modulo_math.hpp"

#include <cmath>
#include <stdexcept>

namespace modadc {

namespace {

void check_args(double x, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("modulo_math: lambda must be > 0");
    if (!std::isfinite(x)) throw std::invalid_argument("modulo_math: x must be finite");
}

}  // namespace

double modulo_fold(double x, double lambda) {
    check_args(x, lambda);
    double two_l = 2.0 * lambda;
    double n = std::floor((x + lambda) / two_l);
    double r = x - two_l * n;
    // floor() rounding can leave r a hair outside [-lambda, lambda)
    if (r >= lambda) r -= two_l;
    if (r < -lambda) r += two_l;
    return r;
}

std::int64_t fold_count(double x, double lambda) {
    check_args(x, lambda);
    double two_l = 2.0 * lambda;
    double n = std::floor((x + lambda) / two_l);
    double r = x - two_l * n;
    if (r >= lambda) n += 1.0;
    if (r < -lambda) n -= 1.0;
    return static_cast<std::int64_t>(n);
}

ResidualSequence residual(std::span<const double> g, double lambda) {
    ResidualSequence out;
    out.lambda = lambda;
    out.values.reserve(g.size());
    for (double v : g) {
        out.values.push_back(2.0 * lambda * static_cast<double>(fold_count(v, lambda)));
    }
    return out;
}

double rho(double amplitude_bound, double lambda) {
    if (!(amplitude_bound > 0.0)) throw std::invalid_argument("rho: amplitude_bound must be > 0");
    if (!(lambda > 0.0)) throw std::invalid_argument("rho: lambda must be > 0");
    return amplitude_bound / lambda;
}

}  // namespace modadc
