#include "fde/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fde/errors.hpp"
#include "fde/specfun.hpp"

namespace fde {

namespace {

// 16-point Gauss-Legendre rule on [-1, 1].
const double kGlNode[8] = {
    0.0950125098376374401853193, 0.2816035507792589132304605,
    0.4580167776572273863424194, 0.6178762444026437484466718,
    0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
const double kGlWeight[8] = {
    0.1894506104550684962853967, 0.1826034150449235888667637,
    0.1691565193950025381893121, 0.1495959888165767320815017,
    0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

TableSpec validate_table(std::vector<double> u, std::vector<double> g, bool require_unit_domain) {
    if (u.size() != g.size() || u.size() < 2)
        throw std::invalid_argument("table nonlinearity: needs >= 2 matching samples");
    if (u.front() != 0.0 || g.front() != 0.0)
        throw std::invalid_argument("table nonlinearity: first sample must be (0, 0)");
    for (std::size_t i = 1; i < u.size(); ++i) {
        if (!(u[i] > u[i - 1]))
            throw std::invalid_argument("table nonlinearity: abscissas must increase strictly");
        if (!(g[i] >= 0.0))
            throw std::invalid_argument("table nonlinearity: ordinates must be nonnegative");
    }
    if (require_unit_domain && !(u.back() >= 1.0))
        throw std::invalid_argument("table nonlinearity: domain must extend to u >= 1");
    TableSpec t;
    t.u = std::move(u);
    t.g = std::move(g);
    return t;
}

double eval_table(const TableSpec& t, double u) {
    if (u < 0.0)
        throw std::domain_error("eval_g: negative argument");
    if (u > t.u.back())
        throw std::domain_error("eval_g: argument " + std::to_string(u) +
                                " beyond table domain [0, " + std::to_string(t.u.back()) + "]");
    auto it = std::upper_bound(t.u.begin(), t.u.end(), u);
    if (it == t.u.begin()) return t.g.front();
    if (it == t.u.end()) return t.g.back();
    const std::size_t i = static_cast<std::size_t>(it - t.u.begin());
    const double w = (u - t.u[i - 1]) / (t.u[i] - t.u[i - 1]);
    return t.g[i - 1] + w * (t.g[i] - t.g[i - 1]);
}

// integral of 1/g over [a, b], 0 < a < b, by 16-point Gauss-Legendre.
double reciprocal_integral(const NonlinearitySpec& spec, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (int j = 0; j < 8; ++j) {
        for (double sgn : {-1.0, 1.0}) {
            const double u = mid + sgn * half * kGlNode[j];
            const double gu = eval_g(spec, u);
            if (!(gu > 0.0))
                throw SingularIntegrandError(
                    "osgood_integral: g vanishes at u = " + std::to_string(u));
            acc += kGlWeight[j] / gu;
        }
    }
    return acc * half;
}

}  // namespace

double NonlinearitySpec::u_max() const {
    if (is_power_law()) return std::numeric_limits<double>::infinity();
    return table().u.back();
}

NonlinearitySpec make_power_law(double coefficient, double exponent) {
    if (!(coefficient > 0.0))
        throw std::invalid_argument("power-law nonlinearity: coefficient must be positive");
    if (!(exponent > 0.0) || !(exponent < 1.0))
        throw std::invalid_argument("power-law nonlinearity: exponent must lie in (0, 1)");
    NonlinearitySpec s;
    s.form = PowerLaw{coefficient, exponent};
    return s;
}

NonlinearitySpec make_table(std::vector<double> u, std::vector<double> g) {
    NonlinearitySpec s;
    s.form = validate_table(std::move(u), std::move(g), true);
    return s;
}

NonlinearitySpec load_table_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("load_table_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("load_table_csv: empty file " + path);
    std::vector<double> us, gs;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string uf, gf;
        if (!std::getline(ss, uf, ',') || !std::getline(ss, gf))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected two comma-separated fields");
        try {
            us.push_back(std::stod(uf));
            gs.push_back(std::stod(gf));
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    return make_table(std::move(us), std::move(gs));
}

double eval_g(const NonlinearitySpec& spec, double u) {
    if (spec.is_power_law()) {
        if (u < 0.0)
            throw std::domain_error("eval_g: negative argument");
        const PowerLaw& p = spec.power();
        return p.coefficient * std::pow(u, p.exponent);
    }
    return eval_table(spec.table(), u);
}

NonlinearitySpec absorb_gamma_constant(const NonlinearitySpec& g_raw, double alpha) {
    if (!(alpha > 0.0) || !(alpha <= 1.0))
        throw std::domain_error("absorb_gamma_constant: alpha must lie in (0, 1]");
    const double gam = gamma_fn(alpha);
    NonlinearitySpec s;
    if (g_raw.is_power_law()) {
        const PowerLaw& p = g_raw.power();
        s.form = PowerLaw{p.coefficient / std::pow(gam, p.exponent), p.exponent};
    } else {
        TableSpec t = g_raw.table();
        for (double& ui : t.u) ui *= gam;  // Gamma(alpha) >= 1 on (0,1): domain grows
        s.form = std::move(t);
    }
    return s;
}

NonlinearitySpec unabsorb_gamma_constant(const NonlinearitySpec& g_absorbed, double alpha) {
    if (!(alpha > 0.0) || !(alpha <= 1.0))
        throw std::domain_error("unabsorb_gamma_constant: alpha must lie in (0, 1]");
    const double gam = gamma_fn(alpha);
    NonlinearitySpec s;
    if (g_absorbed.is_power_law()) {
        const PowerLaw& p = g_absorbed.power();
        s.form = PowerLaw{p.coefficient * std::pow(gam, p.exponent), p.exponent};
    } else {
        TableSpec t = g_absorbed.table();
        for (double& ui : t.u) ui /= gam;  // domain may shrink below 1 here
        s.form = validate_table(std::move(t.u), std::move(t.g), false);
    }
    return s;
}

void validate_envelope_shape(const NonlinearityEnvelope& env) {
    if (!(env.lower_coef > 0.0) || !(env.upper_coef > 0.0))
        throw std::invalid_argument("envelope: coefficients must be positive");
    if (!(env.lower_coef <= env.upper_coef))
        throw std::invalid_argument("envelope: lower_coef must not exceed upper_coef");
    if (!(env.lower_exp > 0.0) || !(env.lower_exp < 1.0) ||
        !(env.upper_exp > 0.0) || !(env.upper_exp < 1.0))
        throw std::invalid_argument("envelope: exponents must lie in (0, 1)");
    if (!(env.upper_exp <= env.lower_exp))
        throw std::invalid_argument("envelope: upper_exp must not exceed lower_exp");
    if (!(env.lip_coef > 0.0))
        throw std::invalid_argument("envelope: lip_coef must be positive");
}

EnvelopeCheckReport check_envelope(const NonlinearitySpec& spec,
                                   const NonlinearityEnvelope& env,
                                   std::size_t n_samples) {
    validate_envelope_shape(env);
    if (n_samples < 2)
        throw std::invalid_argument("check_envelope: needs at least 2 samples");
    constexpr double kUMin = 1e-10;
    EnvelopeCheckReport rep;
    rep.samples = n_samples;
    rep.confidence = "sampled";
    rep.lower_margin = std::numeric_limits<double>::infinity();
    rep.upper_margin = std::numeric_limits<double>::infinity();
    const double log_umin = std::log(kUMin);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(n_samples - 1);
        const double u = (i + 1 == n_samples) ? 1.0 : std::exp(log_umin * (1.0 - frac));
        const double gu = eval_g(spec, u);
        const double lo = gu - env.lower_coef * std::pow(u, env.lower_exp);
        const double hi = env.upper_coef * std::pow(u, env.upper_exp) - gu;
        if (lo < rep.lower_margin) {
            rep.lower_margin = lo;
            rep.worst_lower_u = u;
        }
        if (hi < rep.upper_margin) {
            rep.upper_margin = hi;
            rep.worst_upper_u = u;
        }
    }
    rep.pass = rep.lower_margin >= 0.0 && rep.upper_margin >= 0.0;
    return rep;
}

double estimate_lipschitz_constant(const NonlinearitySpec& spec, double lower_exp,
                                   std::size_t n_pairs) {
    if (!(lower_exp > 0.0) || !(lower_exp < 1.0))
        throw std::invalid_argument("estimate_lipschitz_constant: lower_exp must lie in (0, 1)");
    if (n_pairs == 0)
        throw std::invalid_argument("estimate_lipschitz_constant: n_pairs must be positive");

    auto ratio = [&](double y1, double y2) {
        const double diff = std::fabs(y2 - y1);
        if (diff == 0.0) return 0.0;
        const double lo = std::min(y1, y2);
        return std::fabs(eval_g(spec, y2) - eval_g(spec, y1)) *
               std::pow(lo, 1.0 - lower_exp) / diff;
    };

    // Fixed sequence so estimates for growing n_pairs are nested.
    double best = ratio(1.0, 1.0 - 1e-9);
    std::mt19937_64 rng(0x6c697073ULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double log_umin = std::log(1e-8);
    const double log_eta_lo = std::log(1e-9);
    const double log_eta_hi = std::log(1e-1);
    for (std::size_t i = 1; i < n_pairs; ++i) {
        const double y1 = std::exp(log_umin * unit(rng));
        double y2;
        if (i % 2 == 0) {
            y2 = std::exp(log_umin * unit(rng));  // spread pair
        } else {
            const double eta = std::exp(log_eta_lo + (log_eta_hi - log_eta_lo) * unit(rng));
            y2 = y1 * (1.0 - eta);  // nearby pair, probes the local slope
        }
        if (y2 <= 0.0) continue;
        best = std::max(best, ratio(y1, y2));
    }
    return best;
}

OsgoodResult osgood_integral(const NonlinearitySpec& spec, double lower_cut) {
    if (!(lower_cut > 0.0) || !(lower_cut < 1.0))
        throw std::invalid_argument("osgood_integral: lower_cut must lie in (0, 1)");
    if (!spec.is_power_law()) {
        const TableSpec& t = spec.table();
        for (std::size_t i = 1; i < t.u.size(); ++i)
            if (t.u[i] > 0.0 && t.u[i] <= 1.0 && t.g[i] == 0.0)
                throw SingularIntegrandError(
                    "osgood_integral: g vanishes at u = " + std::to_string(t.u[i]));
    }

    // integral over [lower_cut, 1], split at doubling points so each piece is
    // integrated on a scale matched to the integrand.
    double total = 0.0;
    {
        double a = lower_cut;
        while (2.0 * a < 1.0) {
            total += reciprocal_integral(spec, a, 2.0 * a);
            a *= 2.0;
        }
        total += reciprocal_integral(spec, a, 1.0);
    }

    OsgoodResult res;
    double cut = lower_cut;
    double prev_inc = -1.0;
    double inc = -1.0;
    double prev_rho = -1.0;
    int over_threshold_run = 0;
    int flat_run = 0;
    constexpr int kMaxHalvings = 120;
    for (int h = 0; h < kMaxHalvings; ++h) {
        const double older_inc = prev_inc;
        prev_inc = inc;
        inc = reciprocal_integral(spec, cut / 2.0, cut);
        cut /= 2.0;
        total += inc;

        over_threshold_run = (inc > kOsgoodDivergenceIncrement) ? over_threshold_run + 1 : 0;
        if (over_threshold_run >= kOsgoodDivergenceRuns) {
            res.convergent = false;
            res.value = total;
            res.last_cut = cut;
            return res;
        }
        const double rho = (prev_inc > 0.0) ? inc / prev_inc : -1.0;
        flat_run = (rho >= 0.999) ? flat_run + 1 : 0;
        if (flat_run >= 30) {  // increments refuse to decay: sub-threshold divergence
            res.convergent = false;
            res.value = total;
            res.last_cut = cut;
            return res;
        }
        // Geometric tail inc * rho / (1 - rho).  For a power law the increment
        // ratio is exactly constant, so once it stabilizes the Richardson limit
        // is exact up to quadrature error.
        if (rho > 0.0 && rho < 0.99) {
            const double tail = inc * rho / (1.0 - rho);
            const bool rho_stable =
                older_inc > 0.0 && prev_rho > 0.0 && std::fabs(rho - prev_rho) < 1e-4;
            if (rho_stable || tail < 1e-12 * (1.0 + std::fabs(total))) {
                res.convergent = true;
                res.value = total + tail;
                res.last_cut = cut;
                return res;
            }
        }
        if (inc < 1e-14 * (1.0 + std::fabs(total))) {
            res.convergent = true;
            res.value = total;
            res.last_cut = cut;
            return res;
        }
        prev_rho = rho;
    }
    res.convergent = true;
    res.value = (prev_inc > 0.0 && inc / prev_inc < 0.999)
                    ? total + inc / (1.0 - inc / prev_inc) * (inc / prev_inc)
                    : total;
    res.last_cut = cut;
    return res;
}

}  // namespace fde
