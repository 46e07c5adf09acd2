#include "fde/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fde/mesh.hpp"
#include "fde/specfun.hpp"

namespace fde {

namespace {

// Raw inverse of the envelope map; no admissibility window enforced so that
// out-of-window exponents surface as failing conditions, not exceptions.
double raw_eps(double delta, double beta) {
    return (delta * (2.0 - beta) - 1.0) / (1.0 - delta);
}

ConditionReport make_condition(std::string id, std::string expr, double lhs, double rhs,
                               double margin, bool strict) {
    ConditionReport c;
    c.id = std::move(id);
    c.expr = std::move(expr);
    c.lhs = lhs;
    c.rhs = rhs;
    c.margin = margin;
    c.strict = strict;
    c.pass = strict ? margin > kStrictTol : margin >= 0.0;
    return c;
}

double embedding_addend(double scale, double eps, double beta, double t_start) {
    return scale * beta_fn(2.0 + eps, 1.0 - beta) *
           std::pow(1.0 - t_start, 2.0 + eps - beta);
}

double coef_ceiling_floor(const NonlinearityEnvelope& env, double beta) {
    // smallest upper_scale with upper_coef <= (1-beta) * upper_scale^(1-upper_exp)
    return std::pow(env.upper_coef / (1.0 - beta), 1.0 / (1.0 - env.upper_exp));
}

}  // namespace

double contraction_factor(double lip_coef, double beta, double lower_exp,
                          double lower_scale) {
    return lip_coef / std::pow(1.0 - beta, lower_exp) *
           std::pow(8.0 / lower_scale, 1.0 - lower_exp);
}

HypothesisCertificate make_certificate(double beta, const NonlinearityEnvelope& env,
                                       double lower_scale, double upper_scale,
                                       double t_start) {
    if (!(beta > 0.0) || !(beta < 1.0))
        throw std::invalid_argument("make_certificate: beta must lie in (0, 1)");
    validate_envelope_shape(env);
    if (!(lower_scale > 0.0) || !(upper_scale > 0.0))
        throw std::invalid_argument("make_certificate: scales must be positive");
    if (!std::isfinite(t_start))
        throw std::invalid_argument("make_certificate: t_start must be finite");
    HypothesisCertificate cert;
    cert.beta = beta;
    cert.env = env;
    cert.lower_scale = lower_scale;
    cert.upper_scale = upper_scale;
    cert.t_start = t_start;
    cert.lower_eps = raw_eps(env.lower_exp, beta);
    cert.upper_eps = raw_eps(env.upper_exp, beta);
    cert.contraction_k = contraction_factor(env.lip_coef, beta, env.lower_exp, lower_scale);
    return cert;
}

CertificateReport check_certificate(const HypothesisCertificate& cert) {
    const double beta = cert.beta;
    const NonlinearityEnvelope& env = cert.env;
    CertificateReport rep;
    auto add = [&rep](ConditionReport c) { rep.conditions.push_back(std::move(c)); };

    add(make_condition("t_range", "0 < t_start < 1", cert.t_start, 1.0,
                       std::min(cert.t_start, 1.0 - cert.t_start), true));
    add(make_condition("scale_lower_min", "lower_scale >= 1", cert.lower_scale, 1.0,
                       cert.lower_scale - 1.0, false));
    add(make_condition("scale_upper_min", "upper_scale >= 1", cert.upper_scale, 1.0,
                       cert.upper_scale - 1.0, false));
    add(make_condition("exp_upper_window", "lower_exp < 2/(3-beta)", env.lower_exp,
                       envelope_map_hi(beta), envelope_map_hi(beta) - env.lower_exp, true));
    add(make_condition("exp_order", "upper_exp <= lower_exp", env.upper_exp, env.lower_exp,
                       env.lower_exp - env.upper_exp, false));
    add(make_condition("exp_lower_window", "upper_exp > 1/(2-beta)", env.upper_exp,
                       envelope_map_lo(beta), env.upper_exp - envelope_map_lo(beta), true));
    add(make_condition("coef_order", "lower_coef <= upper_coef", env.lower_coef,
                       env.upper_coef, env.upper_coef - env.lower_coef, false));
    {
        const double lhs = (cert.lower_scale + cert.upper_scale) *
                           std::pow(1.0 - cert.t_start, 2.0 - beta);
        add(make_condition("window",
                           "(lower_scale+upper_scale)*(1-t_start)^(2-beta) < 1-beta",
                           lhs, 1.0 - beta, (1.0 - beta) - lhs, true));
    }
    add(make_condition("coef_floor", "8*lower_scale <= lower_coef",
                       8.0 * cert.lower_scale, env.lower_coef,
                       env.lower_coef - 8.0 * cert.lower_scale, false));
    {
        const double rhs = (1.0 - beta) * std::pow(cert.upper_scale, 1.0 - env.upper_exp);
        add(make_condition("coef_ceiling",
                           "upper_coef <= (1-beta)*upper_scale^(1-upper_exp)",
                           env.upper_coef, rhs, rhs - env.upper_coef, false));
    }
    add(make_condition("contraction",
                       "lip_coef/(1-beta)^lower_exp*(8/lower_scale)^(1-lower_exp) < 1",
                       cert.contraction_k, 1.0, 1.0 - cert.contraction_k, true));
    {
        const UnitEmbeddingReport emb = derive_unit_embedding(cert);
        add(make_condition("unit_embedding", "inner integral bound: A_lower + A_upper < 1",
                           emb.total, 1.0, 1.0 - emb.total, true));
    }

    rep.pass = true;
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (const ConditionReport& c : rep.conditions) {
        rep.pass = rep.pass && c.pass;
        if (c.margin < rep.min_margin) {
            rep.min_margin = c.margin;
            rep.binding_id = c.id;
            rep.binding_expr = c.expr;
        }
    }
    return rep;
}

UnitEmbeddingReport derive_unit_embedding(const HypothesisCertificate& cert) {
    UnitEmbeddingReport emb;
    emb.lower_addend =
        embedding_addend(cert.lower_scale, cert.lower_eps, cert.beta, cert.t_start);
    emb.upper_addend =
        embedding_addend(cert.upper_scale, cert.upper_eps, cert.beta, cert.t_start);
    emb.total = emb.lower_addend + emb.upper_addend;
    emb.pass = emb.total < 1.0 - kStrictTol;
    return emb;
}

namespace {

struct GridAxis {
    double lo = 0.0;
    double hi = 0.0;
    bool log_scale = false;
    bool flip = false;  // axis parameterizes 1 - t_start

    double at(double frac) const {  // frac in [0, 1]
        double v;
        if (log_scale)
            v = std::exp(std::log(lo) + frac * (std::log(hi) - std::log(lo)));
        else
            v = lo + frac * (hi - lo);
        return flip ? 1.0 - v : v;
    }
};

// Sorted margin vector, ascending; lexicographically larger is better.
std::vector<double> margin_key(const CertificateReport& rep) {
    std::vector<double> m;
    m.reserve(rep.conditions.size());
    for (const ConditionReport& c : rep.conditions) m.push_back(c.margin);
    std::sort(m.begin(), m.end());
    return m;
}

}  // namespace

SearchOutcome search_feasible(const NonlinearityEnvelope& env, double beta,
                              const SearchRanges& ranges, std::uint64_t seed) {
    if (!(beta > 0.0) || !(beta < 1.0))
        throw std::invalid_argument("search_feasible: beta must lie in (0, 1)");
    validate_envelope_shape(env);
    for (const SearchInterval& iv :
         {ranges.lower_scale, ranges.upper_scale, ranges.t_start})
        if (!(iv.lo <= iv.hi))
            throw std::invalid_argument("search_feasible: empty range");
    if (ranges.lower_scale.hi < 1.0 || ranges.upper_scale.hi < 1.0)
        throw std::invalid_argument(
            "search_feasible: scale ranges must allow values >= 1");
    if (!(ranges.t_start.lo < 1.0) || !(ranges.t_start.hi > 0.0))
        throw std::invalid_argument("search_feasible: t_start range must meet (0, 1)");

    // Structural clamps.
    const double y1_lo_struct = std::max(1.0, ranges.lower_scale.lo);
    const double y2_lo_struct = std::max(1.0, ranges.upper_scale.lo);
    const double t_lo = std::max(1e-9, ranges.t_start.lo);
    const double t_hi = std::min(1.0 - 1e-9, ranges.t_start.hi);

    // Single-variable conditions become interval clamps where satisfiable.
    std::string forced_binding_id, forced_binding_expr;
    double y1_hi = ranges.lower_scale.hi;
    const double y1_cap = env.lower_coef / 8.0;  // from coef_floor
    if (y1_cap < y1_lo_struct) {
        forced_binding_id = "coef_floor";
        forced_binding_expr = "8*lower_scale <= lower_coef";
    } else {
        y1_hi = std::min(y1_hi, y1_cap);
    }
    double y2_lo = y2_lo_struct;
    const double y2_floor = coef_ceiling_floor(env, beta);  // from coef_ceiling
    if (y2_floor > ranges.upper_scale.hi) {
        if (forced_binding_id.empty()) {
            forced_binding_id = "coef_ceiling";
            forced_binding_expr = "upper_coef <= (1-beta)*upper_scale^(1-upper_exp)";
        }
    } else {
        y2_lo = std::max(y2_lo, y2_floor);
    }

    GridAxis ax_y1{y1_lo_struct, std::max(y1_hi, y1_lo_struct), true, false};
    GridAxis ax_y2{y2_lo, std::max(ranges.upper_scale.hi, y2_lo), true, false};
    GridAxis ax_t{1.0 - t_hi, 1.0 - t_lo, true, true};  // log-spaced in 1 - t_start

    HypothesisCertificate best;
    CertificateReport best_rep;
    std::vector<double> best_key;
    auto consider = [&](double y1, double y2, double t) {
        HypothesisCertificate cand = make_certificate(beta, env, y1, y2, t);
        CertificateReport rep = check_certificate(cand);
        std::vector<double> key = margin_key(rep);
        if (best_key.empty() ||
            std::lexicographical_compare(best_key.begin(), best_key.end(), key.begin(),
                                         key.end())) {
            best = cand;
            best_rep = std::move(rep);
            best_key = std::move(key);
        }
    };

    const int kGrid = 33;
    auto sweep = [&](const GridAxis& a1, const GridAxis& a2, const GridAxis& a3, int n) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l)
                    consider(a1.at(i / double(n - 1)), a2.at(j / double(n - 1)),
                             a3.at(l / double(n - 1)));
    };
    sweep(ax_y1, ax_y2, ax_t, kGrid);

    // Refinement: shrink each axis around the incumbent, with seeded samples.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    GridAxis r1 = ax_y1, r2 = ax_y2, r3 = ax_t;
    for (int round = 0; round < 3; ++round) {
        auto shrink = [&](GridAxis& ax, double center_raw) {
            const double c = ax.flip ? 1.0 - center_raw : center_raw;
            if (ax.log_scale) {
                const double span = (std::log(ax.hi) - std::log(ax.lo)) * 0.2;
                const double lc = std::log(std::min(std::max(c, ax.lo), ax.hi));
                ax.lo = std::exp(std::max(std::log(ax.lo), lc - span));
                ax.hi = std::exp(std::min(std::log(ax.hi), lc + span));
            } else {
                const double span = (ax.hi - ax.lo) * 0.2;
                ax.lo = std::max(ax.lo, c - span);
                ax.hi = std::min(ax.hi, c + span);
            }
        };
        shrink(r1, best.lower_scale);
        shrink(r2, best.upper_scale);
        shrink(r3, best.t_start);
        sweep(r1, r2, r3, 17);
        for (int s = 0; s < 200; ++s)
            consider(r1.at(unit(rng)), r2.at(unit(rng)), r3.at(unit(rng)));
    }

    SearchOutcome out;
    out.best = best;
    out.report = best_rep;
    out.feasible = forced_binding_id.empty() && best_rep.pass;
    if (!forced_binding_id.empty()) {
        out.binding_id = forced_binding_id;
        out.binding_expr = forced_binding_expr;
    } else {
        out.binding_id = best_rep.binding_id;
        out.binding_expr = best_rep.binding_expr;
    }
    return out;
}

void write_certificate(const HypothesisCertificate& cert, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("write_certificate: cannot open " + path);
    out << "beta=" << format_full(cert.beta) << '\n'
        << "lower_coef=" << format_full(cert.env.lower_coef) << '\n'
        << "upper_coef=" << format_full(cert.env.upper_coef) << '\n'
        << "lower_exp=" << format_full(cert.env.lower_exp) << '\n'
        << "upper_exp=" << format_full(cert.env.upper_exp) << '\n'
        << "lip_coef=" << format_full(cert.env.lip_coef) << '\n'
        << "lower_scale=" << format_full(cert.lower_scale) << '\n'
        << "upper_scale=" << format_full(cert.upper_scale) << '\n'
        << "t_start=" << format_full(cert.t_start) << '\n'
        << "lower_eps=" << format_full(cert.lower_eps) << '\n'
        << "upper_eps=" << format_full(cert.upper_eps) << '\n'
        << "contraction_k=" << format_full(cert.contraction_k) << '\n';
    if (!out)
        throw std::runtime_error("write_certificate: write failed for " + path);
}

HypothesisCertificate read_certificate(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("read_certificate: cannot open " + path);
    std::map<std::string, double> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        try {
            kv[line.substr(0, eq)] = std::stod(line.substr(eq + 1));
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": malformed number");
        }
    }
    auto need = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end())
            throw std::runtime_error("read_certificate: missing key '" + key + "' in " + path);
        return it->second;
    };
    NonlinearityEnvelope env;
    env.lower_coef = need("lower_coef");
    env.upper_coef = need("upper_coef");
    env.lower_exp = need("lower_exp");
    env.upper_exp = need("upper_exp");
    env.lip_coef = need("lip_coef");
    HypothesisCertificate cert = make_certificate(need("beta"), env, need("lower_scale"),
                                                  need("upper_scale"), need("t_start"));
    // Stored derived fields must agree with recomputation.
    auto close = [](double a, double b) {
        return std::fabs(a - b) <= 1e-9 * (1.0 + std::max(std::fabs(a), std::fabs(b)));
    };
    if (!close(cert.lower_eps, need("lower_eps")) ||
        !close(cert.upper_eps, need("upper_eps")) ||
        !close(cert.contraction_k, need("contraction_k")))
        throw std::runtime_error("read_certificate: derived fields inconsistent in " + path);
    cert.lower_eps = need("lower_eps");
    cert.upper_eps = need("upper_eps");
    cert.contraction_k = need("contraction_k");
    return cert;
}

}  // namespace fde
