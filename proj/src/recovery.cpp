#include "modadc/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "modadc/csv.hpp"
#include "modadc/fft_util.hpp"
#include "modadc/modulo_math.hpp"

namespace modadc {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

void validate_input(const RecoveryInput& in) {
    require(in.lambda > 0.0, "RecoveryInput.lambda must be > 0");
    require(in.f_s > 0.0, "RecoveryInput.f_s must be > 0");
    require(in.omega > 0.0, "RecoveryInput.omega must be > 0");
    require(in.y_hat.size() >= 4, "RecoveryInput.y_hat too short");
    double tol = in.tolerance > 0.0 ? in.tolerance : 0.5 * in.lambda;
    for (double v : in.y_hat) {
        require(std::isfinite(v), "RecoveryInput.y_hat contains non-finite values");
        require(std::fabs(v) <= in.lambda + tol,
                "RecoveryInput.y_hat exceeds the fold interval beyond tolerance");
    }
}

// Anti-difference on the 2*lambda integer lattice: prepend a zero constant,
// cumulative-sum, then re-center by the grid-rounded mean. True stage means
// are far below one grid unit for records longer than a few rho.
std::vector<long long> integrate_centered(const std::vector<long long>& d) {
    std::vector<long long> s(d.size() + 1);
    s[0] = 0;
    for (std::size_t k = 0; k < d.size(); ++k) s[k + 1] = s[k] + d[k];
    double mean = 0.0;
    for (long long v : s) mean += static_cast<double>(v);
    mean /= static_cast<double>(s.size());
    long long c = std::llround(mean);
    if (c != 0)
        for (long long& v : s) v -= c;
    return s;
}

// Choose the whole-record fold offset that zero-means the reconstruction.
void center_dc(const std::vector<double>& y, std::vector<long long>& eps, double two_l) {
    double mean = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k)
        mean += y[k] + two_l * static_cast<double>(eps[k]);
    mean /= static_cast<double>(y.size());
    long long c = std::llround(mean / two_l);
    if (c != 0)
        for (long long& v : eps) v -= c;
}

std::vector<double> rebuild(const std::vector<double>& y, const std::vector<long long>& eps,
                            double two_l) {
    std::vector<double> g(y.size());
    for (std::size_t k = 0; k < y.size(); ++k)
        g[k] = y[k] + two_l * static_cast<double>(eps[k]);
    return g;
}

// Shared difference-and-integrate core: returns the estimated residual in
// grid units, already DC-centered.
std::vector<long long> difference_unfold(const std::vector<double>& y, double lambda, int order) {
    double two_l = 2.0 * lambda;
    std::vector<double> d = finite_diff(y, order);
    std::vector<long long> eps;
    eps.reserve(d.size());
    for (double v : d) {
        // M(x) - x is the negated residual of Delta^N y; under the sampling
        // condition it equals Delta^N eps exactly.
        eps.push_back(std::llround((modulo_fold(v, lambda) - v) / two_l));
    }
    for (int stage = 0; stage < order; ++stage) eps = integrate_centered(eps);
    center_dc(y, eps, two_l);
    return eps;
}

// Ideal lowpass: DFT mask on the periodic extension, cutoff inclusive at
// omega, DC kept.
std::vector<double> lowpass_project(const std::vector<double>& x, double omega, double f_s) {
    auto bins = fft::rfft(x);
    std::size_t n = x.size();
    auto keep = static_cast<std::size_t>(std::floor(omega * static_cast<double>(n) / f_s + 1e-9));
    for (std::size_t k = keep + 1; k < bins.size(); ++k) bins[k] = {0.0, 0.0};
    return fft::irfft(bins, n);
}

RecoveredSignal not_converged(const RecoveryInput& in, RecoveryAlgorithm a, int skip) {
    RecoveredSignal out;
    out.g_tilde = in.y_hat;
    out.algorithm = to_string(a);
    out.converged = false;
    out.boundary_skip = skip;
    return out;
}

}  // namespace

const char* to_string(RecoveryAlgorithm a) {
    switch (a) {
        case RecoveryAlgorithm::Direct: return "direct";
        case RecoveryAlgorithm::UsfHighOrder: return "usf_high_order";
        case RecoveryAlgorithm::RSoD: return "rsod";
        default: return "first_order_iter";
    }
}

std::vector<double> finite_diff(std::span<const double> seq, int order) {
    require(order >= 1, "finite_diff: order must be >= 1");
    require(seq.size() > static_cast<std::size_t>(order), "finite_diff: sequence too short");
    std::vector<double> d(seq.begin(), seq.end());
    for (int o = 0; o < order; ++o) {
        for (std::size_t k = 0; k + 1 < d.size(); ++k) d[k] = d[k + 1] - d[k];
        d.pop_back();
    }
    return d;
}

RecoveredSignal direct_recover(std::span<const double> y_hat, std::span<const long long> c_f,
                               double lambda) {
    require(lambda > 0.0, "direct_recover: lambda must be > 0");
    require(y_hat.size() == c_f.size(), "direct_recover: y_hat and C_f length mismatch");
    RecoveredSignal out;
    out.algorithm = to_string(RecoveryAlgorithm::Direct);
    out.converged = true;
    out.g_tilde.resize(y_hat.size());
    for (std::size_t k = 0; k < y_hat.size(); ++k)
        out.g_tilde[k] = y_hat[k] - 2.0 * lambda * static_cast<double>(c_f[k]);
    return out;
}

RecoveredSignal usf_recover(const RecoveryInput& input, int order_n, bool strict) {
    validate_input(input);
    require(order_n >= 1, "usf_recover: order_N must be >= 1");
    require(input.y_hat.size() > static_cast<std::size_t>(order_n) + 1,
            "usf_recover: record shorter than the difference order");
    double t = 1.0 / input.f_s;
    if (!(t <= 1.0 / (2.0 * input.omega * std::numbers::e))) {
        if (strict)
            throw std::invalid_argument("usf_recover: sampling condition T <= 1/(2*Omega*e) violated");
        return not_converged(input, RecoveryAlgorithm::UsfHighOrder, order_n);
    }
    auto eps = difference_unfold(input.y_hat, input.lambda, order_n);
    RecoveredSignal out;
    out.algorithm = to_string(RecoveryAlgorithm::UsfHighOrder);
    out.converged = true;
    out.boundary_skip = order_n;
    out.g_tilde = rebuild(input.y_hat, eps, 2.0 * input.lambda);
    return out;
}

RecoveredSignal rsod_recover(const RecoveryInput& input, bool strict) {
    validate_input(input);
    double t = 1.0 / input.f_s;
    if (!(t < 1.0 / input.omega)) {
        if (strict) throw std::invalid_argument("rsod_recover: sampling condition T < 1/Omega violated");
        return not_converged(input, RecoveryAlgorithm::RSoD, 2);
    }
    double two_l = 2.0 * input.lambda;
    auto eps = difference_unfold(input.y_hat, input.lambda, 2);

    // Bandlimited consistency: a wrong inner integration constant leaves a
    // 2*lambda-per-sample ramp; remove its grid-rounded LS estimate.
    std::size_t n = input.y_hat.size();
    double kbar = 0.5 * static_cast<double>(n - 1);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double dx = static_cast<double>(k) - kbar;
        sxx += dx * dx;
        sxy += dx * (input.y_hat[k] + two_l * static_cast<double>(eps[k]));
    }
    long long m = std::llround(sxy / sxx / two_l);
    if (m != 0) {
        for (std::size_t k = 0; k < n; ++k)
            eps[k] -= m * (static_cast<long long>(k) - static_cast<long long>(n / 2));
        center_dc(input.y_hat, eps, two_l);
    }

    RecoveredSignal out;
    out.algorithm = to_string(RecoveryAlgorithm::RSoD);
    out.converged = true;
    out.boundary_skip = 2;
    out.g_tilde = rebuild(input.y_hat, eps, two_l);
    return out;
}

RecoveredSignal first_order_iter_recover(const RecoveryInput& input, int max_iters, double tol) {
    validate_input(input);
    require(max_iters >= 1, "first_order_iter_recover: max_iters must be >= 1");
    require(input.f_s > 2.0 * input.omega, "first_order_iter_recover: requires OF > 1");
    double two_l = 2.0 * input.lambda;
    const std::vector<double>& y = input.y_hat;
    std::size_t n = y.size();

    // Seed: accumulate fold jumps where the first difference leaves the
    // fold interval.
    std::vector<long long> eps(n, 0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        double d = y[k + 1] - y[k];
        long long step = (std::fabs(d) > input.lambda) ? std::llround(d / two_l) : 0;
        eps[k + 1] = eps[k] - step;
    }
    center_dc(y, eps, two_l);

    RecoveredSignal out;
    out.algorithm = to_string(RecoveryAlgorithm::FirstOrderIter);
    std::vector<double> g = rebuild(y, eps, two_l);
    for (int it = 1; it <= max_iters; ++it) {
        out.iters_used = it;
        std::vector<double> p = lowpass_project(g, input.omega, input.f_s);
        double change = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            long long e = std::llround((p[k] - y[k]) / two_l);
            change = std::max(change, std::fabs(static_cast<double>(e - eps[k])) * two_l);
            eps[k] = e;
        }
        g = rebuild(y, eps, two_l);
        if (change < tol) {
            out.converged = true;
            break;
        }
    }
    center_dc(y, eps, two_l);
    out.g_tilde = rebuild(y, eps, two_l);
    return out;
}

RecoveredSignal recover(const RecoveryInput& input, const RecoveryConfig& cfg) {
    switch (cfg.algorithm) {
        case RecoveryAlgorithm::Direct:
            require(input.c_f_at_sample.size() == input.y_hat.size(),
                    "recover: Direct needs C_f_at_sample of matching length");
            return direct_recover(input.y_hat, input.c_f_at_sample, input.lambda);
        case RecoveryAlgorithm::UsfHighOrder:
            return usf_recover(input, cfg.order_n, cfg.strict);
        case RecoveryAlgorithm::RSoD:
            return rsod_recover(input, cfg.strict);
        default:
            return first_order_iter_recover(input, cfg.max_iters, cfg.tol);
    }
}

void write_recovery_csv(const RecoveryInput& input, const RecoveredSignal& rec,
                        const std::string& path) {
    CsvWriter w(path);
    w.raw_line("k,y_hat,g_tilde,residual_estimate");
    for (std::size_t k = 0; k < rec.g_tilde.size(); ++k) {
        std::string line = std::to_string(k);
        line += ',';
        line += fmt_g17(input.y_hat[k]);
        line += ',';
        line += fmt_g17(rec.g_tilde[k]);
        line += ',';
        line += fmt_g17(rec.g_tilde[k] - input.y_hat[k]);
        w.raw_line(line);
    }
}

}  // namespace modadc
