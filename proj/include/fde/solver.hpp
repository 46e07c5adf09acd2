#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fde/hypothesis.hpp"
#include "fde/mesh.hpp"
#include "fde/nonlinearity.hpp"
#include "fde/quadrature.hpp"

namespace fde {

// Power cone on [t_start, 1]: functions between
//   lower_scale * (t - t_start)^(1 + lower_eps)  and
//   upper_scale * (t - t_start)^(1 + upper_eps).
struct EnvelopeSet {
    double t_start = 0.5;
    double lower_scale = 1.0;
    double lower_eps = 0.5;
    double upper_scale = 1.0;
    double upper_eps = 0.5;

    double lower(double t) const;
    double upper(double t) const;
};

EnvelopeSet envelope_set_of(const HypothesisCertificate& cert);

struct EnvelopeSetReport {
    bool pass = false;
    double lower_margin = 0.0;  // min over nodes of y - lower
    double upper_margin = 0.0;  // min over nodes of upper - y
    double worst_lower_t = 0.0;
    double worst_upper_t = 0.0;
};

// Nodal membership check; zero margins pass.
EnvelopeSetReport envelope_check(const GridFunction& y, const EnvelopeSet& env);

// y(t) = amplitude * (t - t_start)^exponent for t >= t_start, else 0; the
// exact fixed point of the integral operator for a power-law nonlinearity:
//   exponent = d (1 - beta) / (1 - d),
//   amplitude = (c * B(exponent + 1, 1 - beta)^d)^(1 / (1 - d)).
struct ClosedFormSolution {
    double amplitude = 0.0;
    double exponent = 0.0;
    double t_start = 0.0;

    double value(double t) const;
};

ClosedFormSolution closed_form_power_solution(const PowerLaw& g, double beta,
                                              double t_start);

// One application of the integral operator: out(t) = g(abel_integral(y, t))
// at every node; out(t_start) = g(0) = 0.  The grid must start at t_start.
// Throws std::out_of_range (naming the node) if an inner integral leaves
// g's domain.
GridFunction apply_operator(const NonlinearitySpec& g, double beta, double t_start,
                            const GridFunction& y);

struct InitialIterate {
    enum class Kind { LowerEnvelope, Zero, Custom };
    Kind kind = Kind::LowerEnvelope;
    // LowerEnvelope uses this cone when present; otherwise a power-law g
    // falls back to the unit-amplitude power (t - t_start)^gamma with gamma
    // the closed-form exponent.  Table g without a cone is a configuration
    // error.
    std::optional<EnvelopeSet> envelope;
    std::optional<GridFunction> custom;  // must live on the solve mesh
};

struct IterationRecord {
    std::size_t iter = 0;
    double distance = 0.0;   // sup |y_next - y|
    double residual = 0.0;   // equals distance: sup |y - O(y)| for current y
    int envelope_pass = -1;  // 1/0 verdict of the new iterate; -1 when no cone
};

struct PicardResult {
    GridFunction y;
    bool converged = false;
    std::size_t iterations = 0;  // operator applications performed
    double residual = 0.0;       // certified sup |y - O(y)| of the returned y
    std::vector<IterationRecord> trace;
};

// Fixed-point iteration y_{n+1} = O(y_n).  Returns the first iterate whose
// residual sup|y - O(y)| falls at or below tol; non-convergence within
// max_iter is flagged, not thrown.  Non-finite iterates raise
// NumericalFailureError.
PicardResult picard_solve(const NonlinearitySpec& g, double beta, double t_start,
                          const Mesh& mesh, const InitialIterate& init, double tol,
                          std::size_t max_iter);

// CSV header "iter,distance,residual,envelope_pass"; the last column is
// "na" when no cone was supplied.
void write_trace_csv(const std::vector<IterationRecord>& trace, const std::string& path);

// Random cone member: y = theta * lower + (1 - theta) * upper nodally, with
// theta piecewise linear over 9 equispaced knots, values uniform in [0, 1].
GridFunction random_envelope_member(const EnvelopeSet& env, const Mesh& mesh,
                                    std::mt19937_64& rng);

// Largest observed ratio sup|O(y1) - O(y2)| / sup|y1 - y2| over n_trials
// random pairs from the cone.  Pairs closer than 1e-12 in sup norm are
// redrawn (at most 64 attempts each).  Deterministic given the seed.
double empirical_contraction(const NonlinearitySpec& g, double beta, double t_start,
                             const Mesh& mesh, const EnvelopeSet& env,
                             std::size_t n_trials, std::uint64_t seed);

}  // namespace fde
