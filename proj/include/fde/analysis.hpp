#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fde/mesh.hpp"
#include "fde/nonlinearity.hpp"

namespace fde {

// How the state x is recovered from y:
//   RawArgument:     x(t) = integral of y(s) (t-s)^(alpha-1) ds  (fed to the
//                    absorbed nonlinearity as-is)
//   DividedByGamma:  the above divided by Gamma(alpha)  (the state of the
//                    original initial-value problem)
// No default anywhere: callers must pick explicitly.
enum class ReconstructionConvention { RawArgument, DividedByGamma };

ReconstructionConvention parse_convention(const std::string& name);
std::string convention_name(ReconstructionConvention conv);

// Applies the weakly singular integral nodewise; alpha in (0, 1].  alpha = 1
// is the classical limit (plain integration of y).
GridFunction reconstruct_x(const GridFunction& y, double alpha,
                           ReconstructionConvention conv);

struct ResidualReport {
    double sup_residual = 0.0;     // y-space: sup |y - g(abel y)|
    double l2_residual = 0.0;      // y-space, discrete L2 over the check nodes
    std::size_t eval_nodes = 0;
    double caputo_sup_residual = 0.0;  // x-space: sup |D^alpha x - g_raw(x)|
    double first_eval_t = 0.0;     // left edge of the evaluated window
};

// Residuals of a candidate solution pair (y on [0,1] with its reconstruction
// x, reconstructed under x_conv) at check_nodes equispaced times in
// [t_skip_below, 1].  The y-space residual uses the absorbed nonlinearity;
// the fractional-derivative residual checks D^alpha x = g_raw(x) on the
// divided-by-gamma state (a raw-argument x is rescaled internally).  Callers
// pass t_skip_below past the first cell right of the takeoff point, where
// the derivative of x is singular.
ResidualReport verify_fde_residual(const GridFunction& y, const GridFunction& x,
                                   ReconstructionConvention x_conv,
                                   const NonlinearitySpec& g_absorbed,
                                   const NonlinearitySpec& g_raw, double alpha,
                                   std::size_t check_nodes, double t_skip_below);

struct FamilyMember {
    double t_start = 0.0;
    GridFunction y;  // extended to [0, 1], identically zero left of t_start
    GridFunction x;  // reconstruction under the requested convention
    bool converged = false;
    double solve_residual = 0.0;  // certified sup |y - O(y)| on the solve grid
    std::size_t iterations = 0;
    ResidualReport residuals;
};

struct SolutionFamily {
    std::vector<FamilyMember> members;          // ascending t_start
    std::vector<double> pairwise_distances;     // upper triangle, row-major
    bool all_converged = false;
    bool distinct = false;  // every pairwise sup distance > 10 * tol
    double tol = 0.0;
};

// Solves the takeoff problem for every t_start in t_list (graded mesh with
// mesh_n cells on [t_start, 1]), extends each solution by zero to [0, 1],
// reconstructs x, and computes pairwise sup distances plus per-member
// residuals.  jobs > 1 solves members concurrently; results are identical to
// the sequential run.  Throws std::invalid_argument for empty or duplicate
// t_list entries or t outside (0, 1).
SolutionFamily build_family(const NonlinearitySpec& g_absorbed, double beta,
                            const std::vector<double>& t_list, std::size_t mesh_n,
                            double mesh_grading, double tol, std::size_t max_iter,
                            ReconstructionConvention conv, std::size_t jobs = 1);

// Sup distance of the piecewise-linear extensions over the union of both
// node sets.
double family_distance(const GridFunction& a, const GridFunction& b);

}  // namespace fde
