#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fde/errors.hpp"
#include "fde/specfun.hpp"

using namespace fde;

namespace {

// 20-digit references computed with an arbitrary-precision evaluator.
struct GammaRef {
    double x;
    double value;
};

constexpr GammaRef kGammaRefs[] = {
    {0.1, 9.5135076986687318363},   {0.25, 3.6256099082219083119},
    {0.5, 1.7724538509055160273},   {0.75, 1.2254167024651776451},
    {1.0, 1.0},                     {1.5, 0.88622692545275801365},
    {2.0, 1.0},                     {2.5, 1.3293403881791370205},
    {3.7, 4.1706517837966031654},   {4.5, 11.631728396567448929},
    {7.3, 1271.4236336639092731},   {10.1, 454760.75144158595087},
};

}  // namespace

TEST_CASE("gamma matches high-precision references") {
    for (const GammaRef& r : kGammaRefs)
        CHECK(gamma_fn(r.x) == doctest::Approx(r.value).epsilon(5e-14));
}

TEST_CASE("log_gamma is the log of gamma") {
    for (const GammaRef& r : kGammaRefs)
        CHECK(log_gamma(r.x) == doctest::Approx(std::log(r.value)).epsilon(1e-13));
    // log form stays finite where gamma overflows
    CHECK(std::isfinite(log_gamma(500.0)));
    CHECK(log_gamma(500.0) == doctest::Approx(2605.1158503617338927).epsilon(1e-13));
}

TEST_CASE("gamma recurrence holds across the domain") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> pick(0.05, 60.0);
    for (int i = 0; i < 10000; ++i) {
        const double x = pick(rng);
        CHECK(log_gamma(x + 1.0) - log_gamma(x) ==
              doctest::Approx(std::log(x)).epsilon(1e-11));
    }
}

TEST_CASE("gamma rejects the nonpositive axis") {
    CHECK_THROWS_AS(gamma_fn(0.0), std::domain_error);
    CHECK_THROWS_AS(gamma_fn(-1.5), std::domain_error);
    CHECK_THROWS_AS(log_gamma(0.0), std::domain_error);
    CHECK_THROWS_AS(beta_fn(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(beta_fn(1.0, -2.0), std::domain_error);
}

TEST_CASE("beta matches closed forms") {
    CHECK(beta_fn(1.5, 0.5) == doctest::Approx(1.5707963267948966192).epsilon(1e-13));
    CHECK(beta_fn(2.5, 0.5) == doctest::Approx(1.1780972450961724644).epsilon(1e-13));
    CHECK(beta_fn(3.0, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(beta_fn(2.0, 1.0) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(beta_fn(1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("beta is symmetric and satisfies its recurrence") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> pick(0.05, 20.0);
    for (int i = 0; i < 10000; ++i) {
        const double a = pick(rng);
        const double b = pick(rng);
        CHECK(beta_fn(a, b) == doctest::Approx(beta_fn(b, a)).epsilon(1e-12));
        // B(a+1, b) = B(a, b) * a / (a + b)
        CHECK(beta_fn(a + 1.0, b) ==
              doctest::Approx(beta_fn(a, b) * a / (a + b)).epsilon(1e-11));
    }
}

TEST_CASE("beta kernel bounds hold for the envelope exponent range") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> pick_eps(0.0, 1.0);
    std::uniform_real_distribution<double> pick_beta(1e-6, 1.0 - 1e-6);
    for (int i = 0; i < 1000; ++i) {
        const double eps = pick_eps(rng);
        const double beta = pick_beta(rng);
        const double val = beta_fn(2.0 + eps, 1.0 - beta);
        CHECK(val >= 1.0 / (8.0 * (1.0 - beta)));
        CHECK(val <= 1.0 / (1.0 - beta));
    }
}

TEST_CASE("envelope map endpoints and monotonicity") {
    for (double beta : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        CHECK(envelope_map(0.0, beta) == doctest::Approx(1.0 / (2.0 - beta)).epsilon(1e-15));
        CHECK(envelope_map(1.0, beta) == doctest::Approx(2.0 / (3.0 - beta)).epsilon(1e-15));
        CHECK(envelope_map_lo(beta) == envelope_map(0.0, beta));
        CHECK(envelope_map_hi(beta) == envelope_map(1.0, beta));
        double prev = envelope_map(0.0, beta);
        for (int i = 1; i <= 20; ++i) {
            const double cur = envelope_map(i / 20.0, beta);
            CHECK(cur > prev);
            prev = cur;
        }
    }
    CHECK_THROWS_AS(envelope_map(-0.1, 0.5), std::domain_error);
    CHECK_THROWS_AS(envelope_map(1.1, 0.5), std::domain_error);
    CHECK_THROWS_AS(envelope_map(0.5, 0.0), std::domain_error);
    CHECK_THROWS_AS(envelope_map(0.5, 1.0), std::domain_error);
}

TEST_CASE("envelope map inverse matches hand values") {
    // (0.7 * 1.5 - 1) / 0.3 = 1/6
    CHECK(invert_envelope_map(0.7, 0.5) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    // delta = 0.75, beta = 0.5: (1.125 - 1) / 0.25 = 0.5
    CHECK(invert_envelope_map(0.75, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("envelope map inverse round-trips inside the window") {
    std::mt19937_64 rng(5150);
    std::uniform_real_distribution<double> pick_beta(0.05, 0.95);
    std::uniform_real_distribution<double> pick_frac(0.02, 0.98);
    for (int i = 0; i < 1000; ++i) {
        const double beta = pick_beta(rng);
        const double lo = envelope_map_lo(beta);
        const double hi = envelope_map_hi(beta);
        const double delta = lo + pick_frac(rng) * (hi - lo);
        const double eps = invert_envelope_map(delta, beta);
        CHECK(eps >= 0.0);
        CHECK(eps <= 1.0);
        CHECK(envelope_map(eps, beta) == doctest::Approx(delta).epsilon(1e-12));
    }
}

TEST_CASE("envelope map inverse rejects the window boundary") {
    const double beta = 0.5;
    const double lo = envelope_map_lo(beta);
    const double hi = envelope_map_hi(beta);
    CHECK_THROWS_AS(invert_envelope_map(lo, beta), InfeasibleExponentError);
    CHECK_THROWS_AS(invert_envelope_map(hi, beta), InfeasibleExponentError);
    CHECK_THROWS_AS(invert_envelope_map(lo - 0.05, beta), InfeasibleExponentError);
    CHECK_THROWS_AS(invert_envelope_map(hi + 0.05, beta), InfeasibleExponentError);
    CHECK_NOTHROW(invert_envelope_map(lo + 1e-6, beta));
    CHECK_NOTHROW(invert_envelope_map(hi - 1e-6, beta));
}

TEST_CASE("one plus the inverse equals the takeoff exponent") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> pick_beta(0.05, 0.95);
    std::uniform_real_distribution<double> pick_frac(0.01, 0.99);
    for (int i = 0; i < 100; ++i) {
        const double beta = pick_beta(rng);
        const double lo = envelope_map_lo(beta);
        const double hi = envelope_map_hi(beta);
        const double delta = lo + pick_frac(rng) * (hi - lo);
        const double gamma = delta * (1.0 - beta) / (1.0 - delta);
        CHECK(std::fabs(1.0 + invert_envelope_map(delta, beta) - gamma) <= 1e-12);
    }
}

TEST_CASE("exponent pair carries a consistent delta") {
    const ExponentPair p = exponent_pair_from_delta(0.75, 0.5);
    CHECK(p.delta == 0.75);
    CHECK(p.epsilon == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(exponent_pair_from_delta(0.2, 0.5), InfeasibleExponentError);
}
