#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <thread>

#include "dichoteq/conjugacy.hpp"
#include "dichoteq/errors.hpp"
#include "dichoteq/scenarios.hpp"

using namespace dichoteq;

namespace {

const double LN2 = std::log(2.0);

nlohmann::json saturating(const nlohmann::json& c) {
    return {{"family", "saturating"}, {"c", c}};
}

Scenario diag_scenario(double f_amp = 0.2, double g_amp = 0.16, int half = 20) {
    nlohmann::json params;
    params["c"] = 1.0;
    params["window"] = {-half, half};
    params["f"] = saturating({{"mode", "reciprocal"}, {"c", f_amp}});
    params["g"] = saturating({{"mode", "reciprocal"}, {"c", g_amp}});
    return make_scenario("paper_diag", params);
}

ConjugacyEngine diag_engine(double f_amp = 0.2, double g_amp = 0.16, int half = 20) {
    const Scenario sc = diag_scenario(f_amp, g_amp, half);
    return ConjugacyEngine(sc.sys, sc.cert, sc.f, sc.g);
}

} // namespace

TEST_CASE("equal perturbations make chi vanish and H the identity") {
    const Scenario sc = diag_scenario();
    const ConjugacyEngine engine(sc.sys, sc.cert, sc.f, sc.f);
    Sampler s(41);
    for (int i = 0; i < 100; ++i) {
        const int n = s.index(-20, 20);
        const Vec xi = s.box(2, 2.0);
        CHECK(dist_inf(engine.H(n, xi), xi) <= 10.0 * engine.opts().eps);
        CHECK(inf_norm(engine.chi(n, n, xi)) <= 10.0 * engine.opts().eps);
    }
}

TEST_CASE("with g = 0 chi is the green series of the forcing -f along the orbit") {
    const Scenario sc = diag_scenario();
    const ConjugacyEngine engine(sc.sys, sc.cert, sc.f, Perturbation::zero(2));
    const GreenSeriesOperator series(engine.sys(), engine.cert());
    Sampler s(43);
    for (int i = 0; i < 10; ++i) {
        const int m = s.index(-20, 20);
        const Vec xi = s.box(2, 2.0);
        const AuxSolution sol = engine.solve_chi(m, xi);
        const VecSeq direct =
            series.apply([&](int k) { return scale(-1.0, sc.f(k, sol.traj.at(k))); });
        for (int n = -20; n <= 21; ++n)
            CHECK(dist_inf(sol.w.at(n), direct.at(n)) <= 1e-12);
    }
}

TEST_CASE("chi and vartheta stay inside the bound-transfer budget") {
    const ConjugacyEngine engine = diag_engine();
    const double budget = engine.B() + engine.B_tail();
    Sampler s(47);
    for (int i = 0; i < 40; ++i) {
        const int m = s.index(-20, 20);
        const Vec xi = s.box(2, 3.0);
        CHECK(inf_norm(engine.chi(s.index(-20, 20), m, xi)) <= budget);
        CHECK(inf_norm(engine.vartheta(s.index(-20, 20), m, xi)) <= budget);
    }
}

TEST_CASE("vartheta is chi of the swapped engine") {
    const ConjugacyEngine engine = diag_engine();
    const ConjugacyEngine swapped = engine.swapped();
    Sampler s(53);
    for (int i = 0; i < 10; ++i) {
        const int m = s.index(-20, 20), n = s.index(-20, 20);
        const Vec nu = s.box(2, 2.0);
        CHECK(dist_inf(engine.vartheta(n, m, nu), swapped.chi(n, m, nu)) <= 1e-9);
    }
}

TEST_CASE("H and L invert each other within the solver budget") {
    std::vector<ConjugacyEngine> engines;
    engines.push_back(diag_engine());
    {
        nlohmann::json params;
        params["alpha"] = LN2;
        params["window"] = {-14, 14};
        params["f"] = saturating(0.15);
        params["g"] = saturating(0.1);
        const Scenario sc = make_scenario("const_alpha", params);
        engines.emplace_back(sc.sys, sc.cert, sc.f, sc.g);
    }
    {
        nlohmann::json params;
        params["alpha"] = 2.0;
        params["window"] = {-14, 14};
        params["f"] = saturating(0.1);
        params["g"] = saturating(0.08);
        const Scenario sc = make_scenario("stable_alpha", params);
        engines.emplace_back(sc.sys, sc.cert, sc.f, sc.g);
    }

    Sampler s(59);
    for (const ConjugacyEngine& engine : engines) {
        const Window& w = engine.window();
        const double eps = engine.opts().eps;
        const double budget = 2.0 * eps / (1.0 - engine.theta()) + 1e-9;
        for (int i = 0; i < 30; ++i) {
            const int n = s.index(w.n_min, w.n_max);
            const Vec xi = s.box(2, 2.0);
            CHECK(dist_inf(engine.L(n, engine.H(n, xi)), xi) <= budget);
            const Vec nu = s.box(2, 2.0);
            CHECK(dist_inf(engine.H(n, engine.L(n, nu)), nu) <= budget);
        }
    }
}

TEST_CASE("mapped solutions satisfy the target recurrence") {
    const ConjugacyEngine engine = diag_engine();
    Sampler s(61);
    EquivalenceOpts opts;
    opts.num_points = 20;
    opts.num_solutions = 3;
    const VerificationReport rep = verify_equivalence(engine, s, opts);
    CHECK(rep.all_passed());
    for (const CheckRow& row : rep.rows)
        if (row.check == "solution_map_residual_H" || row.check == "solution_map_residual_L")
            CHECK(row.measured <= 1e-8);
}

TEST_CASE("fault injection is caught by the residual rows") {
    const ConjugacyEngine engine = diag_engine();
    Sampler s(67);
    EquivalenceOpts opts;
    opts.num_points = 5;
    opts.num_solutions = 1;
    opts.fault_injection = true;
    const VerificationReport rep = verify_equivalence(engine, s, opts);
    CHECK_FALSE(rep.all_passed());
    bool flagged = false;
    for (const CheckRow& row : rep.rows)
        if (row.check == "solution_map_residual_H" && !row.passed) {
            flagged = true;
            CHECK(row.measured >= 0.01);
        }
    CHECK(flagged);
}

TEST_CASE("flow identity across anchor changes") {
    const ConjugacyEngine engine = diag_engine();
    Sampler s(71);

    // n == m is trivially exact
    const Vec xi{0.4, -0.9};
    CHECK(dist_inf(engine.chi(3, 3, xi), engine.chi(3, 3, xi)) == 0.0);

    FlowIdentityOpts opts;
    opts.num_samples = 25;
    opts.tol = 1e-7;
    const VerificationReport rep = verify_flow_identity(engine, s, opts);
    CHECK(rep.all_passed());
}

TEST_CASE("gronwall bound closed forms and trajectory separations") {
    const Scenario sc = diag_scenario(0.1, 0.1);

    CHECK(gronwall_bound(sc.sys, sc.f, 4, 4, 0.37) == 0.37);

    // constant data: delta e^{3 (0.5 + 0.1)}
    const LinearSystem flat(1, Window(-10, 10), [](int) {
        Matrix A(1);
        A(0, 0) = 1.5;
        return A;
    });
    Perturbation p = Perturbation::zero(1);
    p.lip = Seq::constant(0.1);
    p.bound = Seq::constant(1.0);
    p.eval = [](int, const Vec& x) { return Vec{0.1 * std::tanh(x[0])}; };
    p.is_zero = false;
    CHECK(gronwall_bound(flat, p, 0, 3, 2.0) ==
          doctest::Approx(2.0 * std::exp(1.8)).epsilon(1e-14));
    CHECK(gronwall_bound(flat, p, 3, 0, 2.0) ==
          doctest::Approx(2.0 * std::exp(1.8)).epsilon(1e-14));

    Sampler s(73);
    for (int i = 0; i < 200; ++i) {
        const int k = s.index(-20, 20), n = s.index(-20, 20);
        const Vec xi = s.box(2, 2.0);
        Vec xi2 = xi;
        xi2[static_cast<size_t>(s.index(0, 1))] += s.uniform(-0.5, 0.5);
        const Vec a = propagate(sc.sys, sc.f, k, xi, n);
        const Vec b = propagate(sc.sys, sc.f, k, xi2, n);
        CHECK(dist_inf(a, b) <=
              gronwall_bound(sc.sys, sc.f, k, n, dist_inf(xi, xi2)) + 1e-12);
    }
}

TEST_CASE("gamma vanishes without Lipschitz mass and is flat for constant data") {
    nlohmann::json params;
    params["alpha"] = LN2;
    params["window"] = {-20, 20};
    const Scenario plain = make_scenario("const_alpha", params);
    const ConjugacyEngine no_lip(plain.sys, plain.cert, Perturbation::zero(2),
                                 Perturbation::zero(2));
    CHECK(gamma(no_lip, 0, 5) == 0.0);

    params["f"] = saturating(0.2);
    params["g"] = saturating(0.2);
    const Scenario sc = make_scenario("const_alpha", params);
    const ConjugacyEngine engine(sc.sys, sc.cert, sc.f, sc.g);
    const double g0 = gamma(engine, 0, 3);
    double spread = 0.0;
    for (int n = -15; n <= 15; ++n) spread = std::max(spread, std::fabs(gamma(engine, n, 3) - g0));
    CHECK(spread <= 1e-12);

    // constant-coefficient envelope exp(2 (M + M0) l) theta
    const double M = sc.sys.sup_deviation();
    const double M0 = stepanov_norm(engine.r_seq(), 3, sc.sys.window());
    CHECK(g0 <= std::exp(2.0 * (M + M0) * 3.0) * engine.theta());

    CHECK_THROWS_AS(gamma(engine, 19, 5), WindowTooNarrow);
}

TEST_CASE("holder parameter arithmetic") {
    const HolderParams a = holder_params(1.0, 0.0, 0.0, LN2, 0.0, 0.2);
    CHECK(a.theta == doctest::Approx(0.6).epsilon(1e-14)); // 0.2 * 1.5 / 0.5

    const HolderParams b = holder_params(1.0, 0.1, 0.1, 1.0, 0.3, 0.1);
    CHECK(b.exponent == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(b.applicable);

    const HolderParams c = holder_params(1.0, 0.0, 0.0, 1.0, 0.4, 0.0);
    CHECK(c.theta == 0.0);
    CHECK(c.D2 == 0.0);
    CHECK(c.exponent == doctest::Approx(0.6).epsilon(1e-14));

    const HolderParams d = holder_params(1.0, 0.1, 0.1, 1.0, 1.2, 0.1);
    CHECK_FALSE(d.applicable); // M + r >= alpha voids the claim
}

TEST_CASE("identity map has modulus exactly delta") {
    const Scenario sc = diag_scenario();
    const ConjugacyEngine engine(sc.sys, sc.cert, sc.f, sc.f);
    Sampler s(79);
    const std::vector<double> deltas{1e-1, 1e-2, 1e-3};
    const std::vector<Vec> dirs{s.unit_inf(2), s.unit_inf(2)};
    const ModulusTable table = continuity_modulus(engine, 2, Vec{0.5, -1.0}, deltas, dirs);
    for (const ModulusRow& row : table.rows)
        CHECK(row.measured == doctest::Approx(row.delta).epsilon(1e-9));
    CHECK(table.fitted_slope == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("holder envelope holds in the contracting constant-rate regime") {
    nlohmann::json params;
    params["alpha"] = 2.0;
    params["window"] = {-16, 16};
    params["f"] = saturating(0.1);
    params["g"] = saturating(0.08);
    const Scenario sc = make_scenario("stable_alpha", params);
    const ConjugacyEngine engine(sc.sys, sc.cert, sc.f, sc.g);

    const double M = sc.sys.sup_deviation();
    CHECK(M == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-14));
    const HolderParams hp = holder_params(1.0, 0.1, 0.08, 2.0, M, 0.1);
    REQUIRE(hp.applicable);
    REQUIRE(hp.exponent >= 0.5);

    Sampler s(83);
    const std::vector<double> deltas{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    const std::vector<Vec> dirs{s.unit_inf(2), s.unit_inf(2), s.unit_inf(2)};
    const ModulusTable table =
        continuity_modulus(engine, 0, Vec{0.3, -0.6}, deltas, dirs, hp);
    CHECK(table.holder_applicable);
    CHECK(table.all_within_bound);
    CHECK(table.fitted_slope >= hp.exponent - 0.1);

    // shrinking delta cannot grow the modulus beyond solver noise
    std::vector<double> worst(deltas.size(), 0.0);
    for (const ModulusRow& row : table.rows)
        for (size_t i = 0; i < deltas.size(); ++i)
            if (deltas[i] == row.delta) worst[i] = std::max(worst[i], row.measured);
    for (size_t i = 1; i < worst.size(); ++i)
        CHECK(worst[i] <= worst[i - 1] + 2.0 * engine.opts().eps);
}

TEST_CASE("pointwise evaluations are safe and identical across threads") {
    const ConjugacyEngine engine = diag_engine(0.2, 0.16, 12);
    Sampler s(97);
    std::vector<std::pair<int, Vec>> args;
    for (int i = 0; i < 8; ++i) args.emplace_back(s.index(-12, 12), s.box(2, 2.0));

    std::vector<Vec> serial;
    for (const auto& [n, xi] : args) serial.push_back(engine.H(n, xi));

    std::vector<Vec> parallel(args.size());
    std::vector<std::thread> pool;
    for (size_t t = 0; t < 4; ++t)
        pool.emplace_back([&, t] {
            for (size_t i = t; i < args.size(); i += 4)
                parallel[i] = engine.H(args[i].first, args[i].second);
        });
    for (std::thread& th : pool) th.join();

    for (size_t i = 0; i < args.size(); ++i) CHECK(parallel[i] == serial[i]);
}

TEST_CASE("engine construction rejects broken inputs") {
    const Scenario sc = diag_scenario();
    // overclaimed constant-rate certificate on the decaying-rate system
    const auto bad_cert = DichotomyCertificate::with_alpha(sc.cert.P, 1.0, 0.5);
    CHECK_THROWS_AS(ConjugacyEngine(sc.sys, bad_cert, sc.f, sc.g), CertificateRejected);

    // Lipschitz mass past the contraction threshold
    nlohmann::json params;
    params["c"] = 1.0;
    params["window"] = {-20, 20};
    params["f"] = saturating(1.0);
    const Scenario hot = make_scenario("paper_diag", params);
    CHECK_THROWS_AS(ConjugacyEngine(hot.sys, hot.cert, hot.f, hot.g), NotContractive);
}
