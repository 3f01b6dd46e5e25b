// Ideal modulo algebra: the centered folding operator, fold counts and the
// residual decomposition. Everything in here is exact up to floating point
// and serves as the ground-truth oracle for the loop simulator and the
// recovery algorithms.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace modadc {

// Fold threshold; the fold interval is [-lambda, lambda).
struct Threshold {
    double lambda;
};

// Sequence of values that are integer multiples of 2*lambda.
struct ResidualSequence {
    std::vector<double> values;
    double lambda;
};

// Centered modulo: result in [-lambda, lambda), x - result is a multiple of
// 2*lambda. The boundary maps as fold(lambda) == -lambda.
double modulo_fold(double x, double lambda);

// Number of 2*lambda wraps removed by modulo_fold:
//   x == modulo_fold(x, lambda) + 2*lambda*fold_count(x, lambda)
std::int64_t fold_count(double x, double lambda);

// g[k] - modulo_fold(g[k]); each value lies on the 2*lambda grid.
ResidualSequence residual(std::span<const double> g, double lambda);

// Dynamic-range expansion factor ||g||inf / lambda.
double rho(double amplitude_bound, double lambda);

}  // namespace modadc
