#pragma once

#include "fde/mesh.hpp"

namespace fde {

// Weakly singular integral
//     integral_a^t y(s) (t - s)^(-beta) ds,   beta in [0, 1),
// with y the piecewise-linear interpolant of the grid function.  Cell
// contributions use closed-form weights, so the result is exact (to
// roundoff) whenever y is linear on every cell; beta = 0 reduces to the
// trapezoid rule.  t must lie in [mesh.a, mesh.b].
double abel_integral(const GridFunction& y, double beta, double t);

// Fractional integral of order alpha in (0, 1):
//     abel_integral(y, 1 - alpha, t) / Gamma(alpha).
double rl_fractional_integral(const GridFunction& y, double alpha, double t);

// Fractional derivative of order alpha in (0, 1] of the grid function h,
// taken from the mesh origin:
//     1/Gamma(1 - alpha) * integral_a^t h'(s) (t - s)^(-alpha) ds,
// with h' the per-cell difference quotient and the singular weight
// integrated exactly on each cell.  Exact for affine h.  alpha = 1 is the
// classical limit (the difference quotient of the cell containing t).
// Requires t in (mesh.a, mesh.b].
double caputo_derivative(const GridFunction& h, double alpha, double t);

}  // namespace fde
