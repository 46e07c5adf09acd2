#include "fde/specfun.hpp"

#include <cmath>
#include <stdexcept>

#include "fde/errors.hpp"

namespace fde {

namespace {

// Lanczos coefficients for g = 7, kmax = 8 (scaled so the leading term is 1).
const double lanczos_7_c[9] = {
    0.99999999999980993227684700473478,
    676.520368121885098567009190444019,
    -1259.13921672240287047156078755283,
    771.3234287776530788486528258894,
    -176.61502916214059906584551354,
    12.507343278686904814458936853,
    -0.13857109526572011689554707,
    9.984369578019570859563e-6,
    1.50563273514931155834e-7};

constexpr double kLogRoot2Pi = 0.9189385332046727417803297364;  // log(sqrt(2 pi))

}  // namespace

double log_gamma(double x) {
    if (!(x > 0.0))
        throw std::domain_error("log_gamma: argument must be positive");
    // Lanczos series is evaluated at x - 1; valid for all x > 0.
    const double xm1 = x - 1.0;
    double series = lanczos_7_c[0];
    for (int k = 1; k < 9; ++k)
        series += lanczos_7_c[k] / (xm1 + k);
    const double t = xm1 + 7.5;
    return (xm1 + 0.5) * std::log(t) - t + kLogRoot2Pi + std::log(series);
}

double gamma_fn(double x) {
    if (!(x > 0.0))
        throw std::domain_error("gamma_fn: argument must be positive");
    return std::exp(log_gamma(x));
}

double beta_fn(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("beta_fn: both arguments must be positive");
    return std::exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b));
}

double envelope_map(double eps, double beta) {
    if (!(beta > 0.0) || !(beta < 1.0))
        throw std::domain_error("envelope_map: beta must lie in (0, 1)");
    if (!(eps >= 0.0) || !(eps <= 1.0))
        throw std::domain_error("envelope_map: eps must lie in [0, 1]");
    return (1.0 + eps) / (2.0 + eps - beta);
}

double envelope_map_lo(double beta) { return 1.0 / (2.0 - beta); }

double envelope_map_hi(double beta) { return 2.0 / (3.0 - beta); }

double invert_envelope_map(double delta, double beta) {
    if (!(beta > 0.0) || !(beta < 1.0))
        throw std::domain_error("invert_envelope_map: beta must lie in (0, 1)");
    const double lo = envelope_map_lo(beta);
    const double hi = envelope_map_hi(beta);
    if (!(delta - lo > kStrictTol) || !(hi - delta > kStrictTol))
        throw InfeasibleExponentError(
            "invert_envelope_map: delta = " + std::to_string(delta) +
            " is not strictly inside (" + std::to_string(lo) + ", " +
            std::to_string(hi) + ") for beta = " + std::to_string(beta));
    return (delta * (2.0 - beta) - 1.0) / (1.0 - delta);
}

ExponentPair exponent_pair_from_delta(double delta, double beta) {
    ExponentPair p;
    p.delta = delta;
    p.epsilon = invert_envelope_map(delta, beta);
    return p;
}

}  // namespace fde
