#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dichoteq/conjugacy.hpp"
#include "dichoteq/errors.hpp"
#include "dichoteq/scenarios.hpp"
#include "test_oracles.hpp"

using namespace dichoteq;

namespace {
const double LN2 = std::log(2.0);
}

TEST_CASE("diagonal family matches its declared structure") {
    const Scenario sc = make_scenario("paper_diag", {{"c", 1.0}, {"window", {-30, 30}}});
    CHECK(verify_gdd(sc.sys, sc.cert, 1e-9).max_violation <= 1e-12);

    for (int n = 1; n <= 30; ++n) {
        const double b = sc.sys.coeff(n)(0, 0);
        const double bneg = sc.sys.coeff(-n)(0, 0);
        CHECK(b == bneg);                          // even in n
        CHECK(b > sc.sys.coeff(n - 1)(0, 0));      // monotone toward 1
        CHECK(b < 1.0);
        CHECK(sc.cert.a(n) == doctest::Approx(-std::log(b)).epsilon(1e-15));
    }
    CHECK(sc.sys.sup_deviation() == doctest::Approx(sc.expected.at("M")).epsilon(1e-12));

    const auto rows = alpha_rejection_scan(sc.cert, {0.5, 0.3, 0.2}, sc.sys.window());
    for (const auto& row : rows) {
        CHECK(row.found);
        CHECK(row.average < row.alpha);
    }
}

TEST_CASE("unknown families and bad parameters are refused") {
    CHECK_THROWS_AS(make_scenario("nope", {}), UnknownFamily);
    CHECK_THROWS_AS(make_scenario("paper_diag", {{"c", -1.0}}), InvalidParams);
    CHECK_THROWS_AS(make_scenario("const_alpha", {{"alpha", 0.0}}), InvalidParams);
    CHECK_THROWS_AS(make_perturbation(2, {{"family", "mystery"}}), UnknownFamily);
}

TEST_CASE("saturating metadata is tight") {
    const Perturbation p = make_perturbation(2, {{"family", "saturating"}, {"c", 0.25}});
    Sampler s(5);
    const Window w(-10, 10);

    const PerturbationQuotients wide = validate_perturbation(p, 2, w, 500, 3.0, s);
    CHECK(wide.max_bound_quotient <= 1.0);
    CHECK(wide.max_lip_quotient <= 1.0 + 1e-12);

    // near the origin the Lipschitz quotient approaches its declared value
    const PerturbationQuotients tight = validate_perturbation(p, 2, w, 500, 0.05, s);
    CHECK(tight.max_lip_quotient >= 0.95);
}

TEST_CASE("zero-perturbation pipeline collapses to the identity map") {
    nlohmann::json params;
    params["alpha"] = LN2;
    params["window"] = {-15, 15};
    const Scenario sc = make_scenario("const_alpha", params);
    const ConjugacyEngine engine(sc.sys, sc.cert, sc.f, sc.g);
    Sampler s(9);
    for (int i = 0; i < 20; ++i) {
        const int n = s.index(-15, 15);
        const Vec xi = s.box(2, 2.0);
        CHECK(dist_inf(engine.H(n, xi), xi) <= 1e-12);
        CHECK(dist_inf(engine.L(n, xi), xi) <= 1e-12);
    }
}

TEST_CASE("scalar fixed-point oracle") {
    ScalarFixedPointParams linear;
    linear.map = [](double z) { return 0.5 * z + 1.0; };
    CHECK(oracle_scalar_fixed_point(linear) == doctest::Approx(2.0).epsilon(1e-13));

    ScalarFixedPointParams decay;
    decay.map = [](double z) { return 0.5 * z; };
    decay.guess = 7.0;
    CHECK(oracle_scalar_fixed_point(decay) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    ScalarFixedPointParams wavy;
    wavy.map = [](double z) { return 0.5 * z + 0.1 * std::sin(z) + 1.0; };
    wavy.guess = 2.0;
    const double z1 = oracle_scalar_fixed_point(wavy);
    const double z2 = oracles::bisect(
        [](double z) { return 0.5 * z - 0.1 * std::sin(z) - 1.0; }, 1.0, 3.0);
    CHECK(z1 == doctest::Approx(z2).epsilon(1e-12));

    ScalarFixedPointParams runaway;
    runaway.map = [](double z) { return 2.0 * z + 1.0; };
    runaway.guess = 1.0;
    runaway.cap = 2000;
    CHECK_THROWS_AS(oracle_scalar_fixed_point(runaway), NotContractive);
}

TEST_CASE("doubled-window oracle on the stable scalar block") {
    const Window w(-20, 20);
    const LinearSystem sys(1, w, [](int) {
        Matrix A(1);
        A(0, 0) = 0.5;
        return A;
    });
    Matrix P(1);
    P(0, 0) = 1.0;
    const auto cert = DichotomyCertificate::with_alpha(P, 1.0, LN2);

    VecSeq zero;
    zero.first = w.n_min;
    zero.vals.assign(static_cast<size_t>(w.length()) + 1, Vec{0.0});
    const VecSeq trivial = oracle_bounded(sys, cert, zero, w);
    for (const Vec& v : trivial.vals) CHECK(inf_norm(v) == 0.0);

    VecSeq ones = zero;
    for (Vec& v : ones.vals) v[0] = 1.0;
    const VecSeq wide = oracle_bounded(sys, cert, ones, w);
    CHECK(wide.at(5)[0] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("scenario rebuilding keeps generators alive across windows") {
    const Scenario sc = make_scenario("paper_diag", {{"c", 1.0}, {"window", {-10, 10}}});
    const Scenario wide = sc.with_window(Window(-25, 25));
    CHECK(wide.sys.window().n_min == -25);
    CHECK(wide.sys.coeff(-20)(0, 0) ==
          doctest::Approx(std::exp(-1.0 / 21.0)).epsilon(1e-15));
    CHECK(verify_gdd(wide.sys, wide.cert, 1e-9).passed);
}
