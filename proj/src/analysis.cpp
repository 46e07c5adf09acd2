#include "fde/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "fde/quadrature.hpp"
#include "fde/solver.hpp"
#include "fde/specfun.hpp"

namespace fde {

ReconstructionConvention parse_convention(const std::string& name) {
    if (name == "raw-argument") return ReconstructionConvention::RawArgument;
    if (name == "divided-by-gamma") return ReconstructionConvention::DividedByGamma;
    throw std::invalid_argument("unknown reconstruction convention '" + name +
                                "' (expected raw-argument or divided-by-gamma)");
}

std::string convention_name(ReconstructionConvention conv) {
    return conv == ReconstructionConvention::RawArgument ? "raw-argument"
                                                         : "divided-by-gamma";
}

GridFunction reconstruct_x(const GridFunction& y, double alpha,
                           ReconstructionConvention conv) {
    if (!(alpha > 0.0) || !(alpha <= 1.0))
        throw std::domain_error("reconstruct_x: alpha must lie in (0, 1]");
    const double beta = 1.0 - alpha;
    const double scale =
        conv == ReconstructionConvention::DividedByGamma ? 1.0 / gamma_fn(alpha) : 1.0;
    std::vector<double> v(y.values.size());
    for (std::size_t i = 0; i < y.values.size(); ++i)
        v[i] = scale * abel_integral(y, beta, y.mesh.nodes[i]);
    return make_grid_function(y.mesh, std::move(v));
}

ResidualReport verify_fde_residual(const GridFunction& y, const GridFunction& x,
                                   ReconstructionConvention x_conv,
                                   const NonlinearitySpec& g_absorbed,
                                   const NonlinearitySpec& g_raw, double alpha,
                                   std::size_t check_nodes, double t_skip_below) {
    if (!(alpha > 0.0) || !(alpha <= 1.0))
        throw std::domain_error("verify_fde_residual: alpha must lie in (0, 1]");
    if (check_nodes < 2)
        throw std::invalid_argument("verify_fde_residual: needs at least 2 check nodes");
    const double beta = 1.0 - alpha;
    const double t_lo = std::max(t_skip_below, y.mesh.a);
    const double t_hi = y.mesh.b;
    if (!(t_lo < t_hi))
        throw std::invalid_argument("verify_fde_residual: empty check window");

    // The fractional-derivative identity D^alpha x = g_raw(x) holds for the
    // divided-by-gamma state; a raw-argument x is rescaled before checking.
    const double to_state =
        x_conv == ReconstructionConvention::RawArgument ? 1.0 / gamma_fn(alpha) : 1.0;

    ResidualReport rep;
    rep.eval_nodes = check_nodes;
    rep.first_eval_t = t_lo;
    double sq_sum = 0.0;
    for (std::size_t j = 0; j < check_nodes; ++j) {
        const double t =
            t_lo + (t_hi - t_lo) * static_cast<double>(j) / static_cast<double>(check_nodes - 1);
        const double ry =
            std::fabs(y.value_at(t) - eval_g(g_absorbed, abel_integral(y, beta, t)));
        rep.sup_residual = std::max(rep.sup_residual, ry);
        sq_sum += ry * ry;
        const double rx = std::fabs(to_state * caputo_derivative(x, alpha, t) -
                                    eval_g(g_raw, to_state * x.value_at(t)));
        rep.caputo_sup_residual = std::max(rep.caputo_sup_residual, rx);
    }
    rep.l2_residual = std::sqrt(sq_sum / static_cast<double>(check_nodes) * (t_hi - t_lo));
    return rep;
}

namespace {

// Zero on [0, t_start] glued to the solved branch; t_start is a shared node.
GridFunction extend_by_zero(const GridFunction& branch) {
    const double t_start = branch.mesh.a;
    const std::size_t left_cells =
        std::max<std::size_t>(2, branch.mesh.cells() / 4);
    std::vector<double> nodes;
    std::vector<double> values;
    nodes.reserve(left_cells + branch.mesh.nodes.size());
    values.reserve(left_cells + branch.mesh.nodes.size());
    for (std::size_t i = 0; i < left_cells; ++i) {
        nodes.push_back(t_start * static_cast<double>(i) / static_cast<double>(left_cells));
        values.push_back(0.0);
    }
    nodes.insert(nodes.end(), branch.mesh.nodes.begin(), branch.mesh.nodes.end());
    values.insert(values.end(), branch.values.begin(), branch.values.end());
    Mesh mesh;
    mesh.a = 0.0;
    mesh.b = branch.mesh.b;
    mesh.nodes = std::move(nodes);
    mesh.grading = branch.mesh.grading;
    return make_grid_function(mesh, std::move(values));
}

}  // namespace

double family_distance(const GridFunction& a, const GridFunction& b) {
    std::vector<double> ts;
    ts.reserve(a.mesh.nodes.size() + b.mesh.nodes.size());
    ts.insert(ts.end(), a.mesh.nodes.begin(), a.mesh.nodes.end());
    ts.insert(ts.end(), b.mesh.nodes.begin(), b.mesh.nodes.end());
    std::sort(ts.begin(), ts.end());
    const double lo = std::max(a.mesh.a, b.mesh.a);
    const double hi = std::min(a.mesh.b, b.mesh.b);
    double d = 0.0;
    for (double t : ts) {
        if (t < lo || t > hi) continue;
        d = std::max(d, std::fabs(a.value_at(t) - b.value_at(t)));
    }
    return d;
}

SolutionFamily build_family(const NonlinearitySpec& g_absorbed, double beta,
                            const std::vector<double>& t_list, std::size_t mesh_n,
                            double mesh_grading, double tol, std::size_t max_iter,
                            ReconstructionConvention conv, std::size_t jobs) {
    if (t_list.empty())
        throw std::invalid_argument("build_family: t_list must not be empty");
    std::vector<double> ts = t_list;
    std::sort(ts.begin(), ts.end());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!(ts[i] > 0.0) || !(ts[i] < 1.0))
            throw std::invalid_argument("build_family: takeoff times must lie in (0, 1)");
        if (i > 0 && ts[i] == ts[i - 1])
            throw std::invalid_argument("build_family: duplicate takeoff time " +
                                        std::to_string(ts[i]));
    }
    if (!(beta >= 0.0) || !(beta < 1.0))
        throw std::domain_error("build_family: beta must lie in [0, 1)");
    const double alpha = 1.0 - beta;
    const NonlinearitySpec g_raw = unabsorb_gamma_constant(g_absorbed, alpha);

    SolutionFamily fam;
    fam.tol = tol;
    fam.members.resize(ts.size());

    auto solve_member = [&](std::size_t idx) {
        const double t_start = ts[idx];
        const Mesh mesh = build_graded_mesh(t_start, 1.0, mesh_n, mesh_grading);
        InitialIterate init;
        if (g_absorbed.is_power_law()) {
            init.kind = InitialIterate::Kind::LowerEnvelope;
        } else {
            init.kind = InitialIterate::Kind::Custom;  // generic nonzero ramp
            init.custom = sample(mesh, [t_start](double t) { return t - t_start; });
        }
        PicardResult sol = picard_solve(g_absorbed, beta, t_start, mesh, init, tol, max_iter);
        FamilyMember m;
        m.t_start = t_start;
        m.converged = sol.converged;
        m.solve_residual = sol.residual;
        m.iterations = sol.iterations;
        m.y = extend_by_zero(sol.y);
        m.x = reconstruct_x(m.y, alpha, conv);
        m.residuals = verify_fde_residual(m.y, m.x, conv, g_absorbed, g_raw, alpha, 33,
                                          sol.y.mesh.nodes[1]);
        fam.members[idx] = std::move(m);
    };

    if (jobs <= 1) {
        for (std::size_t i = 0; i < ts.size(); ++i) solve_member(i);
    } else {
        std::atomic<std::size_t> next{0};
        const std::size_t n_threads = std::min(jobs, ts.size());
        std::vector<std::exception_ptr> errors(n_threads);
        auto worker = [&](std::size_t slot) {
            try {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= ts.size()) return;
                    solve_member(i);
                }
            } catch (...) {
                errors[slot] = std::current_exception();
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker, i);
        for (std::thread& th : pool) th.join();
        for (const std::exception_ptr& e : errors)
            if (e) std::rethrow_exception(e);
    }

    fam.all_converged = true;
    for (const FamilyMember& m : fam.members) fam.all_converged = fam.all_converged && m.converged;
    fam.distinct = true;
    for (std::size_t i = 0; i < fam.members.size(); ++i)
        for (std::size_t j = i + 1; j < fam.members.size(); ++j) {
            const double d = family_distance(fam.members[i].y, fam.members[j].y);
            fam.pairwise_distances.push_back(d);
            fam.distinct = fam.distinct && d > 10.0 * tol;
        }
    return fam;
}

}  // namespace fde
