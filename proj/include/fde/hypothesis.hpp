#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fde/nonlinearity.hpp"

namespace fde {

// Constants witnessing solvability of the takeoff problem on [t_start, 1]:
// the solution is sought between lower_scale * (t - t_start)^(1 + lower_eps)
// and upper_scale * (t - t_start)^(1 + upper_eps).  The eps fields and the
// contraction factor are derived from (env, beta, lower_scale):
//   lower_eps = inverse envelope map of env.lower_exp,
//   upper_eps = inverse envelope map of env.upper_exp,
//   contraction_k = lip_coef / (1-beta)^lower_exp * (8 / lower_scale)^(1-lower_exp).
struct HypothesisCertificate {
    double beta = 0.5;
    NonlinearityEnvelope env;
    double lower_scale = 1.0;  // >= 1 required for a pass
    double upper_scale = 1.0;  // >= 1 required for a pass
    double t_start = 0.5;      // takeoff time, in (0, 1) for a pass
    double lower_eps = 0.0;    // derived
    double upper_eps = 0.0;    // derived
    double contraction_k = 0.0;  // derived
};

// Builds the certificate and fills the derived fields.  The exponent window
// is NOT enforced here (check_certificate reports it); only structural shape
// is validated.
HypothesisCertificate make_certificate(double beta, const NonlinearityEnvelope& env,
                                       double lower_scale, double upper_scale,
                                       double t_start);

// k = lip / (1-beta)^lower_exp * (8 / lower_scale)^(1-lower_exp).
double contraction_factor(double lip_coef, double beta, double lower_exp,
                          double lower_scale);

struct ConditionReport {
    std::string id;    // stable identifier, e.g. "contraction"
    std::string expr;  // rendered inequality with certificate field names
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // > 0 means satisfied with room
    bool strict = false;  // strict conditions need margin > kStrictTol
    bool pass = false;
};

struct CertificateReport {
    std::vector<ConditionReport> conditions;
    bool pass = false;
    std::string binding_id;    // condition with the smallest margin
    std::string binding_expr;
    double min_margin = 0.0;
};

// Evaluates every hypothesis inequality (takeoff window, scale floors,
// exponent window, coefficient chain, contraction factor) plus the derived
// unit-embedding sum; total function, never throws on finite inputs.
CertificateReport check_certificate(const HypothesisCertificate& cert);

struct UnitEmbeddingReport {
    double lower_addend = 0.0;  // lower_scale * B(2+lower_eps, 1-beta) * (1-t_start)^(2+lower_eps-beta)
    double upper_addend = 0.0;
    double total = 0.0;
    bool pass = false;  // total < 1 strictly
};

// The derived condition keeping the inner integral inside [0, 1]; implied by
// the takeoff-window inequality (since B(2+eps, 1-beta) <= 1/(1-beta)).
UnitEmbeddingReport derive_unit_embedding(const HypothesisCertificate& cert);

struct SearchInterval {
    double lo = 1.0;
    double hi = 1.0;
};

struct SearchRanges {
    SearchInterval lower_scale{1.0, 1e8};
    SearchInterval upper_scale{1.0, 1e8};
    SearchInterval t_start{1e-6, 1.0 - 1e-6};
};

struct SearchOutcome {
    HypothesisCertificate best;
    CertificateReport report;   // report for best
    bool feasible = false;
    std::string binding_id;     // unsatisfiable or minimal-margin condition
    std::string binding_expr;
};

// Searches (lower_scale, upper_scale, t_start) for a passing certificate.
// Conditions monotone in a single scale are first reduced to admissible
// intervals (lower_scale <= lower_coef/8, upper_scale >= the coefficient
// ceiling floor); a deterministic grid plus seeded refinement then maximizes
// the sorted margin vector lexicographically (primary objective: the
// minimum margin).  Deterministic given (env, beta, ranges, seed).  Throws
// std::invalid_argument for empty ranges or ranges excluding scale >= 1.
SearchOutcome search_feasible(const NonlinearityEnvelope& env, double beta,
                              const SearchRanges& ranges, std::uint64_t seed);

// key=value serialization, full precision, round-trips bit-exactly.
void write_certificate(const HypothesisCertificate& cert, const std::string& path);
HypothesisCertificate read_certificate(const std::string& path);

}  // namespace fde
