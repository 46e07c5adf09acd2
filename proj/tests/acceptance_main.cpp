// Acceptance gate: one line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "fde/analysis.hpp"
#include "fde/hypothesis.hpp"
#include "fde/solver.hpp"
#include "fde/specfun.hpp"

using namespace fde;

namespace {

int g_failures = 0;

void report(int n, const std::string& slug, bool pass, const std::string& detail) {
    std::printf("%s criterion-%d %s%s%s\n", pass ? "PASS" : "FAIL", n, slug.c_str(),
                detail.empty() ? "" : " ", detail.c_str());
    if (!pass) ++g_failures;
}

std::string num(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", v);
    return b;
}

HypothesisCertificate cert_narrow() {
    return make_certificate(0.5, NonlinearityEnvelope{8.0, 8.0, 0.75, 0.75, 0.01}, 1.0,
                            70000.0, 0.9997);
}

HypothesisCertificate cert_wide() {
    return make_certificate(0.25, NonlinearityEnvelope{8.5, 9.0, 0.62, 0.60, 0.02}, 1.05,
                            600.0, 0.98);
}

double oracle_error(const NonlinearitySpec& g, double beta, double t_start,
                    std::size_t n, bool& converged) {
    const ClosedFormSolution sol = closed_form_power_solution(g.power(), beta, t_start);
    const Mesh mesh = build_graded_mesh(t_start, 1.0, n, 2.0);
    const PicardResult res = picard_solve(g, beta, t_start, mesh, InitialIterate{}, 1e-11, 400);
    converged = res.converged;
    double err = 0.0;
    for (std::size_t i = 0; i < res.y.values.size(); ++i)
        err = std::max(err, std::fabs(res.y.values[i] - sol.value(mesh.nodes[i])));
    return err;
}

void criterion_1() {
    const auto start = std::chrono::steady_clock::now();
    const NonlinearitySpec g = make_power_law(1.0, 0.5);
    bool conv = true, all_conv = true;
    std::vector<double> ladder;
    for (std::size_t n : {128u, 256u, 512u}) {
        ladder.push_back(oracle_error(g, 0.5, 0.5, n, conv));
        all_conv = all_conv && conv;
    }
    const double fine_err = oracle_error(g, 0.5, 0.5, 1024, conv);
    all_conv = all_conv && conv;
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool decreasing = ladder[1] < ladder[0] && ladder[2] < ladder[1];
    report(1, "closed-form-oracle-convergence",
           all_conv && fine_err <= 1e-3 && decreasing && elapsed <= 10.0,
           "sup_err_n1024=" + num(fine_err) + " ladder=" + num(ladder[0]) + "," +
               num(ladder[1]) + "," + num(ladder[2]) + " elapsed=" + num(elapsed) + "s");
}

void criterion_2() {
    const NonlinearitySpec g = make_power_law(1.0, 0.5);
    const Mesh mesh = build_graded_mesh(0.5, 1.0, 512, 2.0);
    const PicardResult res = picard_solve(g, 0.0, 0.5, mesh, InitialIterate{}, 1e-12, 400);
    const GridFunction x =
        reconstruct_x(res.y, 1.0, ReconstructionConvention::DividedByGamma);
    const double y_err = std::fabs(res.y.values.back() - 0.25);
    const double x_err = std::fabs(x.values.back() - 0.0625);
    report(2, "classical-limit", res.converged && y_err <= 1e-8 && x_err <= 1e-8,
           "y_end_err=" + num(y_err) + " x_end_err=" + num(x_err));
}

void criterion_3() {
    const Mesh graded = build_graded_mesh(0.0, 1.0, 2048, 2.0);
    const GridFunction y = sample(graded, [](double t) { return std::pow(t, 1.5); });
    const double ref = 1.1780972450961724644;  // B(2.5, 0.5)
    const double err = std::fabs(abel_integral(y, 0.5, 1.0) - ref);

    std::vector<double> uniform_errs;
    for (std::size_t n : {512u, 1024u}) {
        const Mesh mesh = build_graded_mesh(0.0, 1.0, n, 1.0);
        const GridFunction yu = sample(mesh, [](double t) { return std::pow(t, 1.5); });
        uniform_errs.push_back(std::fabs(abel_integral(yu, 0.5, 1.0) - ref));
    }
    const double order = std::log2(uniform_errs[0] / uniform_errs[1]);
    report(3, "quadrature-monomial", err <= 1e-6 && order >= 1.5,
           "err_n2048=" + num(err) + " uniform_order=" + num(order));
}

void criterion_4() {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> eps_draw(1e-12, 1.0 - 1e-12);
    std::uniform_real_distribution<double> beta_draw(0.0, 1.0 - 1e-12);
    int violations = 0;
    for (int i = 0; i < 1000; ++i) {
        const double eps = eps_draw(rng);
        const double beta = beta_draw(rng);
        const double b = beta_fn(2.0 + eps, 1.0 - beta);
        if (!(b >= 1.0 / (8.0 * (1.0 - beta)) && b <= 1.0 / (1.0 - beta))) ++violations;
    }
    report(4, "beta-kernel-bounds", violations == 0,
           "violations=" + std::to_string(violations) + "/1000");
}

void criterion_5() {
    struct Pair {
        HypothesisCertificate cert;
        NonlinearitySpec g;
    };
    const std::vector<Pair> pairs = {{cert_narrow(), make_power_law(8.0, 0.75)},
                                     {cert_wide(), make_power_law(8.7, 0.61)}};
    int violations = 0;
    bool certs_pass = true, envelopes_hold = true;
    std::mt19937_64 rng(5);
    for (const Pair& p : pairs) {
        certs_pass = certs_pass && check_certificate(p.cert).pass;
        envelopes_hold = envelopes_hold && check_envelope(p.g, p.cert.env).pass;
        const EnvelopeSet env = envelope_set_of(p.cert);
        const Mesh mesh = build_graded_mesh(p.cert.t_start, 1.0, 512, 2.0);
        for (int k = 0; k < 20; ++k) {
            const GridFunction y = random_envelope_member(env, mesh, rng);
            const GridFunction oy = apply_operator(p.g, p.cert.beta, p.cert.t_start, y);
            if (!envelope_check(oy, env).pass) ++violations;
        }
    }
    report(5, "envelope-closure", certs_pass && envelopes_hold && violations == 0,
           "certs_pass=" + std::string(certs_pass ? "yes" : "no") +
               " violations=" + std::to_string(violations) + "/40");
}

void criterion_6() {
    struct Pair {
        HypothesisCertificate cert;
        NonlinearitySpec g;
    };
    // true weighted-Lipschitz coefficients c*d sit below the certified budgets
    const std::vector<Pair> pairs = {{cert_narrow(), make_power_law(0.012, 0.75)},
                                     {cert_wide(), make_power_law(0.03, 0.62)}};
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const HypothesisCertificate& cert = pairs[i].cert;
        ok = ok && check_certificate(cert).pass;
        const Mesh mesh = build_graded_mesh(cert.t_start, 1.0, 256, 2.0);
        const double k_hat = empirical_contraction(pairs[i].g, cert.beta, cert.t_start,
                                                   mesh, envelope_set_of(cert), 100, 6);
        ok = ok && k_hat <= cert.contraction_k + 1e-9;
        detail += (i ? " " : "") + std::string("k_hat") + std::to_string(i) + "=" +
                  num(k_hat) + "<=k=" + num(cert.contraction_k);
    }
    report(6, "contraction-bound", ok, detail);
}

void criterion_7() {
    const NonlinearitySpec g = make_power_law(1.0, 0.5);
    const double tol = 1e-10;
    const SolutionFamily fam =
        build_family(g, 0.5, {0.2, 0.35, 0.5, 0.65, 0.8}, 512, 2.0, tol, 500,
                     ReconstructionConvention::DividedByGamma);
    bool zero_left = true;
    double max_caputo = 0.0;
    for (const FamilyMember& m : fam.members) {
        for (std::size_t k = 0; k < m.y.values.size(); ++k)
            if (m.y.mesh.nodes[k] <= m.t_start)
                zero_left = zero_left && std::fabs(m.y.values[k]) <= 1e-12 &&
                            std::fabs(m.x.values[k]) <= 1e-12;
        max_caputo = std::max(max_caputo, m.residuals.caputo_sup_residual);
    }
    double min_dist = std::numeric_limits<double>::infinity();
    for (double d : fam.pairwise_distances) min_dist = std::min(min_dist, d);
    const bool pass = fam.members.size() == 5 && fam.all_converged && zero_left &&
                      fam.distinct && min_dist > 10.0 * tol && max_caputo <= 5e-3;
    report(7, "multiplicity-witness", pass,
           "members=" + std::to_string(fam.members.size()) +
               " min_pairwise=" + num(min_dist) + " max_caputo=" + num(max_caputo));
}

void criterion_8() {
    const NonlinearityEnvelope env{8.0, 8.0, 0.75, 0.75, 6.0};  // lip = c*d = 8*0.75
    const SearchRanges ranges;
    const SearchOutcome a = search_feasible(env, 0.5, ranges, 2024);
    const SearchOutcome b = search_feasible(env, 0.5, ranges, 2024);
    const bool identical =
        a.feasible == b.feasible && a.binding_id == b.binding_id &&
        a.best.lower_scale == b.best.lower_scale &&
        a.best.upper_scale == b.best.upper_scale && a.best.t_start == b.best.t_start &&
        a.best.contraction_k == b.best.contraction_k;

    // independent grid oracle over (Y1, Y2, 1-T) for the same envelope
    bool any_pass = false;
    double min_k = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 50; ++i) {
        const double y1 = std::exp(std::log(16.0) * i / 49.0);  // [1, 16]
        for (int j = 0; j < 50; ++j) {
            const double y2 = std::exp(std::log(1e7) * j / 49.0);  // [1, 1e7]
            for (int m = 0; m < 50; ++m) {
                const double one_mt =
                    std::exp(std::log(1e-9) + (std::log(0.5) - std::log(1e-9)) * m / 49.0);
                if (!(8.0 * y1 <= 8.0)) continue;                        // coefficient floor
                if (!(8.0 <= 0.5 * std::pow(y2, 0.25))) continue;        // coefficient ceiling
                if (!((y1 + y2) * std::pow(one_mt, 1.5) < 0.5)) continue;  // window
                const double e = 0.5;  // envelope map inverse of 0.75 at beta = 0.5
                const double embed = (y1 + y2) * beta_fn(2.0 + e, 0.5) *
                                     std::pow(one_mt, 1.5 + e);
                if (!(embed < 1.0)) continue;
                const double k =
                    6.0 / std::pow(0.5, 0.75) * std::pow(8.0 / y1, 0.25);
                min_k = std::min(min_k, k);
                if (k < 1.0) any_pass = true;
            }
        }
    }
    const bool agrees = !a.feasible && a.binding_id == "contraction" && !any_pass &&
                        min_k >= 1.0 &&
                        std::fabs(a.best.contraction_k - min_k) <= 1e-9;
    report(8, "hypothesis-reproducibility", identical && agrees,
           "bit_identical=" + std::string(identical ? "yes" : "no") +
               " binding=" + a.binding_id + " search_k=" + num(a.best.contraction_k) +
               " grid_min_k=" + num(min_k));
}

void criterion_9() {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> beta_draw(0.0, 0.999);
    std::uniform_real_distribution<double> unit(1e-6, 1.0 - 1e-6);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double beta = beta_draw(rng);
        const double lo = 1.0 / (2.0 - beta), hi = 2.0 / (3.0 - beta);
        const double delta = lo + (hi - lo) * unit(rng);
        const double eps = invert_envelope_map(delta, beta);
        const double gamma = delta * (1.0 - beta) / (1.0 - delta);
        worst = std::max(worst, std::fabs(eps + 1.0 - gamma));
    }
    report(9, "exponent-consistency", worst <= 1e-12, "worst_err=" + num(worst));
}

}  // namespace

int main() {
    try {
        criterion_1();
        criterion_2();
        criterion_3();
        criterion_4();
        criterion_5();
        criterion_6();
        criterion_7();
        criterion_8();
        criterion_9();
    } catch (const std::exception& e) {
        std::printf("FAIL criterion-unknown exception %s\n", e.what());
        return 1;
    }
    return g_failures == 0 ? 0 : 1;
}
