#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace fde {

// Power-law nonlinearity  u -> coefficient * u^exponent  on [0, inf),
// coefficient > 0, exponent in (0, 1).
struct PowerLaw {
    double coefficient = 1.0;
    double exponent = 0.5;
};

// Tabulated nonlinearity on [0, u.back()], piecewise-linear between samples.
// Requires strictly increasing abscissas starting at 0 with ordinate 0,
// nonnegative ordinates, and u.back() >= 1.
struct TableSpec {
    std::vector<double> u;
    std::vector<double> g;
};

struct NonlinearitySpec {
    std::variant<PowerLaw, TableSpec> form;

    bool is_power_law() const { return std::holds_alternative<PowerLaw>(form); }
    const PowerLaw& power() const { return std::get<PowerLaw>(form); }
    const TableSpec& table() const { return std::get<TableSpec>(form); }
    // Upper end of the evaluation domain (infinity for power laws).
    double u_max() const;
};

NonlinearitySpec make_power_law(double coefficient, double exponent);
NonlinearitySpec make_table(std::vector<double> u, std::vector<double> g);

// Loads a TableSpec from a CSV file with header "u,g".
NonlinearitySpec load_table_csv(const std::string& path);

// g(u); throws std::domain_error for u < 0 or u beyond the table domain.
double eval_g(const NonlinearitySpec& spec, double u);

// Rescales a raw nonlinearity g_raw into the form consumed by the integral
// equation: g(u) = g_raw(u / Gamma(alpha)).  The returned spec absorbs the
// 1/Gamma(alpha) factor of the fractional integral into its argument.
NonlinearitySpec absorb_gamma_constant(const NonlinearitySpec& g_raw, double alpha);

// Inverse rescaling: g_raw(v) = g_absorbed(Gamma(alpha) * v).
NonlinearitySpec unabsorb_gamma_constant(const NonlinearitySpec& g_absorbed, double alpha);

// Two-sided power envelope and weighted Lipschitz data for g on [0, 1]:
//   lower_coef * u^lower_exp <= g(u) <= upper_coef * u^upper_exp,
//   |g(y2) - g(y1)| <= lip_coef * |y2 - y1| / min(y1, y2)^(1 - lower_exp).
// Requires lower_coef <= upper_coef and upper_exp <= lower_exp.
struct NonlinearityEnvelope {
    double lower_coef = 1.0;   // multiplies u^lower_exp from below
    double upper_coef = 1.0;   // multiplies u^upper_exp from above
    double lower_exp = 0.75;   // exponent of the lower bound (the larger one)
    double upper_exp = 0.75;   // exponent of the upper bound
    double lip_coef = 1.0;     // weighted Lipschitz coefficient
};

// Structural validation (beta-independent): positive coefficients,
// exponents in (0, 1), lower_coef <= upper_coef, upper_exp <= lower_exp.
void validate_envelope_shape(const NonlinearityEnvelope& env);

struct EnvelopeCheckReport {
    bool pass = false;
    double lower_margin = 0.0;   // min over samples of g(u) - lower_coef * u^lower_exp
    double upper_margin = 0.0;   // min over samples of upper_coef * u^upper_exp - g(u)
    double worst_lower_u = 0.0;
    double worst_upper_u = 0.0;
    std::size_t samples = 0;
    std::string confidence;      // always "sampled": the check certifies samples only
};

// Samples g on a log-spaced grid in (0, 1] (plus u = 1) and verifies the
// two-sided envelope.  Margins of exactly zero pass.
EnvelopeCheckReport check_envelope(const NonlinearitySpec& spec,
                                   const NonlinearityEnvelope& env,
                                   std::size_t n_samples = 10000);

// Supremum over sampled pairs (y1, y2) in (0, 1]^2 of
//   |g(y2) - g(y1)| * min(y1, y2)^(1 - lower_exp) / |y2 - y1|.
// The pair sequence is deterministic and nested: the estimate is monotone
// nondecreasing in n_pairs.
double estimate_lipschitz_constant(const NonlinearitySpec& spec, double lower_exp,
                                   std::size_t n_pairs = 100000);

struct OsgoodResult {
    bool convergent = false;
    double value = 0.0;     // extrapolated limit when convergent
    double last_cut = 0.0;  // smallest cut reached
};

// Integral of 1/g(u) from a shrinking cut to 1.  The cut is halved
// repeatedly; if the increment added by a halving exceeds
// kOsgoodDivergenceIncrement on kOsgoodDivergenceRuns consecutive halvings,
// the integral is flagged divergent, otherwise the limit is extrapolated
// from the geometric tail.  Throws SingularIntegrandError if g vanishes
// inside (0, 1].
OsgoodResult osgood_integral(const NonlinearitySpec& spec, double lower_cut = 1e-4);

inline constexpr double kOsgoodDivergenceIncrement = 0.1;
inline constexpr int kOsgoodDivergenceRuns = 5;

}  // namespace fde
