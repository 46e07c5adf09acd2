#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <filesystem>
#include <limits>

#include "fde/errors.hpp"
#include "fde/nonlinearity.hpp"
#include "fde/specfun.hpp"

using namespace fde;

TEST_CASE("power-law construction validates its parameters") {
    const NonlinearitySpec g = make_power_law(2.0, 0.5);
    CHECK(g.is_power_law());
    CHECK(g.power().coefficient == 2.0);
    CHECK(g.power().exponent == 0.5);
    CHECK(std::isinf(g.u_max()));
    CHECK_THROWS_AS(make_power_law(0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(make_power_law(-1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(make_power_law(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_power_law(1.0, 1.0), std::invalid_argument);
}

TEST_CASE("power-law evaluation") {
    const NonlinearitySpec g = make_power_law(2.0, 0.5);
    CHECK(eval_g(g, 0.0) == 0.0);
    CHECK(eval_g(g, 0.25) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eval_g(g, 4.0) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK_THROWS_AS(eval_g(g, -0.1), std::domain_error);
}

TEST_CASE("table construction enforces the anchored increasing shape") {
    const NonlinearitySpec g = make_table({0.0, 0.5, 1.0}, {0.0, 0.3, 1.0});
    CHECK_FALSE(g.is_power_law());
    CHECK(g.u_max() == 1.0);
    CHECK(eval_g(g, 0.25) == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(eval_g(g, 0.75) == doctest::Approx(0.65).epsilon(1e-15));
    CHECK_THROWS_AS(eval_g(g, 1.5), std::domain_error);

    CHECK_THROWS_AS(make_table({0.0}, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_table({0.1, 1.0}, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_table({0.0, 1.0}, {0.5, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_table({0.0, 0.5, 0.5, 1.0}, {0.0, 0.1, 0.2, 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_table({0.0, 1.0}, {0.0, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_table({0.0, 0.9}, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("table CSV loader matches the in-memory constructor") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "fde_table_load.csv";
    {
        std::ofstream out(path);
        out << "u,g\n0,0\n0.5,0.25\n1,1\n";
    }
    const NonlinearitySpec g = load_table_csv(path.string());
    CHECK(eval_g(g, 0.5) == 0.25);
    CHECK(eval_g(g, 0.75) == doctest::Approx(0.625).epsilon(1e-15));
    fs::remove(path);
    CHECK_THROWS_AS(load_table_csv(path.string()), std::runtime_error);
}

TEST_CASE("gamma absorption rescales the argument") {
    const double alpha = 0.5;
    const double gam = gamma_fn(alpha);
    const NonlinearitySpec raw = make_power_law(1.0, 0.5);
    const NonlinearitySpec abs = absorb_gamma_constant(raw, alpha);
    for (double u : {0.1, 0.5, 1.0, 3.0})
        CHECK(eval_g(abs, u) == doctest::Approx(eval_g(raw, u / gam)).epsilon(1e-14));
    const NonlinearitySpec back = unabsorb_gamma_constant(abs, alpha);
    CHECK(back.power().coefficient ==
          doctest::Approx(raw.power().coefficient).epsilon(1e-14));
    CHECK(back.power().exponent == raw.power().exponent);

    const NonlinearitySpec traw = make_table({0.0, 0.5, 1.0}, {0.0, 0.4, 1.0});
    const NonlinearitySpec tabs = absorb_gamma_constant(traw, alpha);
    CHECK(tabs.u_max() == doctest::Approx(gam).epsilon(1e-15));
    for (double u : {0.2, 0.9, 1.5})
        CHECK(eval_g(tabs, u) == doctest::Approx(eval_g(traw, u / gam)).epsilon(1e-14));
    const NonlinearitySpec tback = unabsorb_gamma_constant(tabs, alpha);
    for (double u : {0.2, 0.7, 1.0})
        CHECK(eval_g(tback, u) == doctest::Approx(eval_g(traw, u)).epsilon(1e-14));

    // the classical limit is the identity rescaling
    const NonlinearitySpec same = absorb_gamma_constant(raw, 1.0);
    CHECK(same.power().coefficient == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(absorb_gamma_constant(raw, 0.0), std::domain_error);
    CHECK_THROWS_AS(absorb_gamma_constant(raw, 1.5), std::domain_error);
}

TEST_CASE("envelope shape validation") {
    NonlinearityEnvelope env{1.0, 2.0, 0.75, 0.5, 0.1};
    CHECK_NOTHROW(validate_envelope_shape(env));
    env.lower_coef = -1.0;
    CHECK_THROWS_AS(validate_envelope_shape(env), std::invalid_argument);
    env = {3.0, 2.0, 0.75, 0.5, 0.1};
    CHECK_THROWS_AS(validate_envelope_shape(env), std::invalid_argument);
    env = {1.0, 2.0, 0.5, 0.75, 0.1};
    CHECK_THROWS_AS(validate_envelope_shape(env), std::invalid_argument);
    env = {1.0, 2.0, 1.5, 0.5, 0.1};
    CHECK_THROWS_AS(validate_envelope_shape(env), std::invalid_argument);
    env = {1.0, 2.0, 0.75, 0.5, 0.0};
    CHECK_THROWS_AS(validate_envelope_shape(env), std::invalid_argument);
}

TEST_CASE("envelope check accepts a matching two-sided bound") {
    const NonlinearitySpec g = make_power_law(1.0, 0.5);
    const NonlinearityEnvelope env{1.0, 1.0, 0.75, 0.5, 0.5};
    const EnvelopeCheckReport rep = check_envelope(g, env);
    CHECK(rep.pass);
    CHECK(rep.lower_margin >= 0.0);
    CHECK(rep.upper_margin >= 0.0);
    CHECK(rep.samples >= 2);
    CHECK(rep.confidence == "sampled");
}

TEST_CASE("envelope check passes exact equality with zero margins") {
    const NonlinearitySpec g = make_power_law(8.0, 0.75);
    const NonlinearityEnvelope env{8.0, 8.0, 0.75, 0.75, 6.0};
    const EnvelopeCheckReport rep = check_envelope(g, env);
    CHECK(rep.pass);
    CHECK(rep.lower_margin == 0.0);
    CHECK(rep.upper_margin == 0.0);
}

TEST_CASE("envelope check reports the violating side and abscissa") {
    const NonlinearitySpec g = make_power_law(1.0, 0.5);
    const NonlinearityEnvelope bad_lower{2.0, 2.0, 0.75, 0.5, 0.5};
    const EnvelopeCheckReport rep = check_envelope(g, bad_lower);
    CHECK_FALSE(rep.pass);
    CHECK(rep.lower_margin < 0.0);
    // 2 u^0.75 overtakes u^0.5 for u > 2^(-4); worst at u = 1
    CHECK(rep.worst_lower_u == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.lower_margin == doctest::Approx(-1.0).epsilon(1e-6));

    const NonlinearityEnvelope bad_upper{0.1, 0.5, 0.75, 0.5, 0.5};
    const EnvelopeCheckReport rep2 = check_envelope(g, bad_upper);
    CHECK_FALSE(rep2.pass);
    CHECK(rep2.upper_margin < 0.0);
}

TEST_CASE("lipschitz estimate converges from below for power laws") {
    const NonlinearitySpec g = make_power_law(1.0, 0.5);
    const double small = estimate_lipschitz_constant(g, 0.5, 1000);
    const double mid = estimate_lipschitz_constant(g, 0.5, 10000);
    const double big = estimate_lipschitz_constant(g, 0.5, 100000);
    CHECK(small <= mid);
    CHECK(mid <= big);
    // weighted ratio of c u^d with weight exponent 1 - d tends to c * d
    CHECK(big == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(big <= 0.5 * (1.0 + 1e-6));

    const NonlinearitySpec g2 = make_power_law(3.0, 0.75);
    const double est2 = estimate_lipschitz_constant(g2, 0.75, 100000);
    CHECK(est2 == doctest::Approx(3.0 * 0.75).epsilon(1e-4));
    CHECK(est2 <= 3.0 * 0.75 * (1.0 + 1e-6));
}

TEST_CASE("lipschitz estimate covers tabulated nonlinearities") {
    const NonlinearitySpec lin = make_table({0.0, 1.0}, {0.0, 1.0});
    CHECK(estimate_lipschitz_constant(lin, 0.75, 10000) ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(estimate_lipschitz_constant(lin, 0.0, 100), std::invalid_argument);
    CHECK_THROWS_AS(estimate_lipschitz_constant(lin, 0.5, 0), std::invalid_argument);
}

TEST_CASE("reciprocal integral converges exactly for integrable power laws") {
    // integral_0^1 du / u^d = 1 / (1 - d)
    const OsgoodResult half = osgood_integral(make_power_law(1.0, 0.5));
    CHECK(half.convergent);
    CHECK(half.value == doctest::Approx(2.0).epsilon(1e-6));

    const OsgoodResult threequarter = osgood_integral(make_power_law(1.0, 0.75));
    CHECK(threequarter.convergent);
    CHECK(threequarter.value == doctest::Approx(4.0).epsilon(1e-6));

    const OsgoodResult scaled = osgood_integral(make_power_law(2.5, 0.6));
    CHECK(scaled.convergent);
    CHECK(scaled.value == doctest::Approx(1.0 / (2.5 * 0.4)).epsilon(1e-6));
}

TEST_CASE("reciprocal integral flags the non-multiplicity regime") {
    // g(u) = u: integral du/u diverges at 0, so escape in finite time fails
    const OsgoodResult lin = osgood_integral(make_table({0.0, 1.0}, {0.0, 1.0}));
    CHECK_FALSE(lin.convergent);
    CHECK(lin.last_cut < 1e-4);
}

TEST_CASE("reciprocal integral rejects interior zeros") {
    const NonlinearitySpec flat = make_table({0.0, 0.5, 1.0}, {0.0, 0.0, 1.0});
    CHECK_THROWS_AS(osgood_integral(flat), SingularIntegrandError);
    CHECK_THROWS_AS(osgood_integral(make_power_law(1.0, 0.5), 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(osgood_integral(make_power_law(1.0, 0.5), 1.0),
                    std::invalid_argument);
}

TEST_CASE("divergence thresholds are the documented constants") {
    CHECK(kOsgoodDivergenceIncrement == 0.1);
    CHECK(kOsgoodDivergenceRuns == 5);
}
