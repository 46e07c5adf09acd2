#include "fde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "fde/errors.hpp"
#include "fde/specfun.hpp"

namespace fde {

double EnvelopeSet::lower(double t) const {
    return t <= t_start ? 0.0 : lower_scale * std::pow(t - t_start, 1.0 + lower_eps);
}

double EnvelopeSet::upper(double t) const {
    return t <= t_start ? 0.0 : upper_scale * std::pow(t - t_start, 1.0 + upper_eps);
}

EnvelopeSet envelope_set_of(const HypothesisCertificate& cert) {
    EnvelopeSet env;
    env.t_start = cert.t_start;
    env.lower_scale = cert.lower_scale;
    env.lower_eps = cert.lower_eps;
    env.upper_scale = cert.upper_scale;
    env.upper_eps = cert.upper_eps;
    return env;
}

EnvelopeSetReport envelope_check(const GridFunction& y, const EnvelopeSet& env) {
    EnvelopeSetReport rep;
    rep.lower_margin = std::numeric_limits<double>::infinity();
    rep.upper_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < y.values.size(); ++i) {
        const double t = y.mesh.nodes[i];
        const double lo = y.values[i] - env.lower(t);
        const double hi = env.upper(t) - y.values[i];
        if (lo < rep.lower_margin) {
            rep.lower_margin = lo;
            rep.worst_lower_t = t;
        }
        if (hi < rep.upper_margin) {
            rep.upper_margin = hi;
            rep.worst_upper_t = t;
        }
    }
    rep.pass = rep.lower_margin >= 0.0 && rep.upper_margin >= 0.0;
    return rep;
}

double ClosedFormSolution::value(double t) const {
    return t <= t_start ? 0.0 : amplitude * std::pow(t - t_start, exponent);
}

ClosedFormSolution closed_form_power_solution(const PowerLaw& g, double beta,
                                              double t_start) {
    if (!(g.exponent > 0.0) || !(g.exponent < 1.0))
        throw std::domain_error(
            "closed_form_power_solution: power-law exponent must lie in (0, 1)");
    if (!(g.coefficient > 0.0))
        throw std::domain_error("closed_form_power_solution: coefficient must be positive");
    if (!(beta >= 0.0) || !(beta < 1.0))
        throw std::domain_error("closed_form_power_solution: beta must lie in [0, 1)");
    if (!(t_start >= 0.0) || !(t_start < 1.0))
        throw std::domain_error("closed_form_power_solution: t_start must lie in [0, 1)");
    ClosedFormSolution sol;
    sol.t_start = t_start;
    sol.exponent = g.exponent * (1.0 - beta) / (1.0 - g.exponent);
    sol.amplitude =
        std::pow(g.coefficient *
                     std::pow(beta_fn(sol.exponent + 1.0, 1.0 - beta), g.exponent),
                 1.0 / (1.0 - g.exponent));
    return sol;
}

GridFunction apply_operator(const NonlinearitySpec& g, double beta, double t_start,
                            const GridFunction& y) {
    if (y.mesh.a != t_start)
        throw std::invalid_argument("apply_operator: grid must start at t_start");
    std::vector<double> out(y.values.size());
    out[0] = eval_g(g, 0.0);
    const double u_max = g.u_max();
    for (std::size_t i = 1; i < y.values.size(); ++i) {
        const double t = y.mesh.nodes[i];
        const double inner = abel_integral(y, beta, t);
        if (inner < 0.0 || inner > u_max)
            throw std::out_of_range(
                "apply_operator: inner integral " + std::to_string(inner) +
                " at node " + std::to_string(i) + " (t = " + std::to_string(t) +
                ") leaves the nonlinearity domain");
        out[i] = eval_g(g, inner);
    }
    return make_grid_function(y.mesh, std::move(out));
}

namespace {

GridFunction initial_iterate(const NonlinearitySpec& g, double beta, double t_start,
                             const Mesh& mesh, const InitialIterate& init) {
    switch (init.kind) {
        case InitialIterate::Kind::Zero:
            return make_grid_function(mesh, std::vector<double>(mesh.nodes.size(), 0.0));
        case InitialIterate::Kind::Custom: {
            if (!init.custom)
                throw std::invalid_argument("picard_solve: custom init without grid function");
            if (init.custom->mesh.nodes != mesh.nodes)
                throw std::invalid_argument("picard_solve: custom init lives on another mesh");
            return *init.custom;
        }
        case InitialIterate::Kind::LowerEnvelope: {
            if (init.envelope) {
                const EnvelopeSet& env = *init.envelope;
                return sample(mesh, [&env](double t) { return env.lower(t); });
            }
            if (!g.is_power_law())
                throw std::invalid_argument(
                    "picard_solve: lower-envelope init needs a power-law g or an explicit "
                    "envelope");
            const double gamma = closed_form_power_solution(g.power(), beta, t_start).exponent;
            return sample(mesh, [t_start, gamma](double t) {
                return t <= t_start ? 0.0 : std::pow(t - t_start, gamma);
            });
        }
    }
    throw std::logic_error("picard_solve: unknown init kind");
}

}  // namespace

PicardResult picard_solve(const NonlinearitySpec& g, double beta, double t_start,
                          const Mesh& mesh, const InitialIterate& init, double tol,
                          std::size_t max_iter) {
    if (!(tol > 0.0))
        throw std::invalid_argument("picard_solve: tol must be positive");
    if (max_iter == 0)
        throw std::invalid_argument("picard_solve: max_iter must be positive");

    PicardResult res;
    res.y = initial_iterate(g, beta, t_start, mesh, init);
    for (std::size_t iter = 1; iter <= max_iter; ++iter) {
        GridFunction next = apply_operator(g, beta, t_start, res.y);
        double dist = 0.0;
        for (std::size_t i = 0; i < next.values.size(); ++i) {
            if (!std::isfinite(next.values[i]))
                throw NumericalFailureError("picard_solve: non-finite iterate at iteration " +
                                            std::to_string(iter));
            dist = std::max(dist, std::fabs(next.values[i] - res.y.values[i]));
        }
        IterationRecord rec;
        rec.iter = iter;
        rec.distance = dist;
        rec.residual = dist;  // dist == sup |y - O(y)| for the current iterate
        rec.envelope_pass =
            init.envelope ? (envelope_check(next, *init.envelope).pass ? 1 : 0) : -1;
        res.trace.push_back(rec);
        res.iterations = iter;
        res.residual = dist;
        if (dist <= tol) {
            res.converged = true;  // the pre-image carries the certified residual
            return res;
        }
        res.y = std::move(next);
    }
    res.converged = false;
    return res;
}

void write_trace_csv(const std::vector<IterationRecord>& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("write_trace_csv: cannot open " + path);
    out << "iter,distance,residual,envelope_pass\n";
    for (const IterationRecord& r : trace) {
        out << r.iter << ',' << format_full(r.distance) << ',' << format_full(r.residual)
            << ',';
        if (r.envelope_pass < 0)
            out << "na";
        else
            out << r.envelope_pass;
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("write_trace_csv: write failed for " + path);
}

GridFunction random_envelope_member(const EnvelopeSet& env, const Mesh& mesh,
                                    std::mt19937_64& rng) {
    constexpr int kKnots = 9;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double knots[kKnots];
    for (double& k : knots) k = unit(rng);
    const double span = mesh.b - mesh.a;
    std::vector<double> v(mesh.nodes.size());
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        const double frac = (mesh.nodes[i] - mesh.a) / span * (kKnots - 1);
        const int j = std::min(static_cast<int>(frac), kKnots - 2);
        const double w = frac - j;
        const double theta = knots[j] + w * (knots[j + 1] - knots[j]);
        const double t = mesh.nodes[i];
        v[i] = theta * env.lower(t) + (1.0 - theta) * env.upper(t);
    }
    return make_grid_function(mesh, std::move(v));
}

double empirical_contraction(const NonlinearitySpec& g, double beta, double t_start,
                             const Mesh& mesh, const EnvelopeSet& env,
                             std::size_t n_trials, std::uint64_t seed) {
    if (n_trials == 0)
        throw std::invalid_argument("empirical_contraction: n_trials must be positive");
    std::mt19937_64 rng(seed);
    double k_hat = 0.0;
    for (std::size_t trial = 0; trial < n_trials; ++trial) {
        GridFunction y1 = random_envelope_member(env, mesh, rng);
        GridFunction y2 = random_envelope_member(env, mesh, rng);
        double dist = sup_distance(y1, y2);
        int attempts = 0;
        while (dist < 1e-12 && attempts < 64) {
            y2 = random_envelope_member(env, mesh, rng);
            dist = sup_distance(y1, y2);
            ++attempts;
        }
        if (dist < 1e-12) continue;  // degenerate cone; nothing to measure
        const GridFunction o1 = apply_operator(g, beta, t_start, y1);
        const GridFunction o2 = apply_operator(g, beta, t_start, y2);
        k_hat = std::max(k_hat, sup_distance(o1, o2) / dist);
    }
    return k_hat;
}

}  // namespace fde
