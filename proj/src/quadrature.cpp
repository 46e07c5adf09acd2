#include "fde/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fde/specfun.hpp"

namespace fde {

namespace {

// u0^p - u1^p for 0 <= u1 <= u0, avoiding cancellation when u1/u0 is near 1.
double pow_diff(double u0, double u1, double p) {
    if (u1 <= 0.0) return std::pow(u0, p);
    const double r = u1 / u0;
    if (r > 0.5)
        return -std::pow(u0, p) * std::expm1(p * std::log(r));
    return std::pow(u0, p) - std::pow(u1, p);
}

// Contribution of one cell [s0, s1] (with y linear from y0 to y1) to
// integral (t - s)^(-beta) y(s) ds, where s1 <= t.  With u = t - s:
//   I0 = (u0^(1-b) - u1^(1-b)) / (1-b)
//   I1 = u0 * I0 - (u0^(2-b) - u1^(2-b)) / (2-b)
// and the cell adds y0 * I0 + slope * I1.
double cell_weighted(double s0, double s1, double y0, double y1, double beta, double t) {
    const double h = s1 - s0;
    const double u0 = t - s0;
    const double u1 = t - s1;
    const double i0 = pow_diff(u0, u1, 1.0 - beta) / (1.0 - beta);
    const double i1 = u0 * i0 - pow_diff(u0, u1, 2.0 - beta) / (2.0 - beta);
    return y0 * i0 + (y1 - y0) / h * i1;
}

}  // namespace

double abel_integral(const GridFunction& y, double beta, double t) {
    if (!(beta >= 0.0) || !(beta < 1.0))
        throw std::domain_error("abel_integral: beta must lie in [0, 1)");
    const auto& x = y.mesh.nodes;
    if (!(t >= y.mesh.a) || !(t <= y.mesh.b))
        throw std::domain_error("abel_integral: t outside mesh interval");
    if (t == y.mesh.a) return 0.0;

    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double s0 = x[i - 1];
        if (s0 >= t) break;
        const double s1 = x[i];
        if (s1 <= t) {
            acc += cell_weighted(s0, s1, y.values[i - 1], y.values[i], beta, t);
        } else {
            // partial cell: same slope, truncated at t
            const double slope = (y.values[i] - y.values[i - 1]) / (s1 - s0);
            const double yt = y.values[i - 1] + slope * (t - s0);
            acc += cell_weighted(s0, t, y.values[i - 1], yt, beta, t);
            break;
        }
    }
    return acc;
}

double rl_fractional_integral(const GridFunction& y, double alpha, double t) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::domain_error("rl_fractional_integral: alpha must lie in (0, 1)");
    return abel_integral(y, 1.0 - alpha, t) / gamma_fn(alpha);
}

double caputo_derivative(const GridFunction& h, double alpha, double t) {
    if (!(alpha > 0.0) || !(alpha <= 1.0))
        throw std::domain_error("caputo_derivative: alpha must lie in (0, 1]");
    const auto& x = h.mesh.nodes;
    if (!(t > h.mesh.a) || !(t <= h.mesh.b))
        throw std::domain_error("caputo_derivative: t outside (mesh.a, mesh.b]");
    if (alpha == 1.0) {
        // Classical limit: the kernel weight concentrates on the cell
        // containing t, leaving the interpolant's difference quotient there.
        std::size_t i = 1;
        while (i + 1 < x.size() && x[i] < t) ++i;
        return (h.values[i] - h.values[i - 1]) / (x[i] - x[i - 1]);
    }

    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double s0 = x[i - 1];
        if (s0 >= t) break;
        const double s1 = std::min(x[i], t);
        const double slope = (h.values[i] - h.values[i - 1]) / (x[i] - x[i - 1]);
        // slope * integral_{s0}^{s1} (t - s)^(-alpha) ds, integrated exactly
        acc += slope * pow_diff(t - s0, t - s1, 1.0 - alpha) / (1.0 - alpha);
    }
    return acc / gamma_fn(1.0 - alpha);
}

}  // namespace fde
