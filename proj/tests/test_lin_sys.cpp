#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dichoteq/errors.hpp"
#include "dichoteq/lin_sys.hpp"
#include "dichoteq/sampling.hpp"
#include "test_oracles.hpp"

using namespace dichoteq;

namespace {

LinearSystem identity_system(Window w, int dim = 2) {
    return LinearSystem(dim, w, [dim](int) { return Matrix::identity(dim); });
}

LinearSystem half_double_system(Window w) {
    return LinearSystem(2, w, [](int) { return Matrix::diagonal({0.5, 2.0}); });
}

LinearSystem random_near_identity(Window w, Sampler& s, double spread = 0.3) {
    std::vector<Matrix> mats;
    for (int n = w.n_min; n <= w.n_max; ++n) {
        Matrix A = Matrix::identity(2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) A(i, j) += s.uniform(-spread, spread);
        mats.push_back(A);
    }
    return LinearSystem::from_table(w, mats);
}

Perturbation scaled_tanh(int dim, double c) {
    Perturbation p;
    p.bound = Seq::constant(c);
    p.lip = Seq::constant(c);
    p.eval = [c](int, const Vec& x) {
        Vec y(x.size());
        for (size_t i = 0; i < x.size(); ++i) y[i] = c * std::tanh(x[i]);
        return y;
    };
    return p;
}

} // namespace

TEST_CASE("transition of the identity system is the identity") {
    const LinearSystem sys = identity_system(Window(-10, 10));
    for (int n : {-10, -3, 0, 7, 11})
        for (int m : {-10, 0, 5, 11}) {
            const Matrix T = transition(sys, n, m);
            CHECK(inf_norm(T - Matrix::identity(2)) == 0.0);
        }
}

TEST_CASE("transition picks up the ordered diagonal products") {
    const LinearSystem sys = half_double_system(Window(-5, 5));
    const Matrix T = transition(sys, 2, 0);
    CHECK(T(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(T(1, 1) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(T(0, 1) == 0.0);
}

TEST_CASE("transition(n, n) is exactly the identity") {
    Sampler s(11);
    const LinearSystem sys = random_near_identity(Window(-6, 6), s);
    for (int n = -6; n <= 7; ++n)
        CHECK(inf_norm(transition(sys, n, n) - Matrix::identity(2)) == 0.0);
}

TEST_CASE("transition inverse pairs multiply to the identity") {
    Sampler s(23);
    for (int round = 0; round < 5; ++round) {
        const LinearSystem sys = random_near_identity(Window(-8, 8), s);
        for (auto [n, m] : {std::pair{7, -5}, {-8, 8}, {3, 9}, {0, -2}}) {
            const Matrix P = transition(sys, n, m) * transition(sys, m, n);
            CHECK(inf_norm(P - Matrix::identity(2)) <= 1e-10);
        }
    }
}

TEST_CASE("cocycle identity holds within 1e-9 relative") {
    Sampler s(37);
    const LinearSystem sys = random_near_identity(Window(-8, 8), s);
    for (int round = 0; round < 50; ++round) {
        const int n = s.index(-8, 9), k = s.index(-8, 9), m = s.index(-8, 9);
        const Matrix lhs = transition(sys, n, k) * transition(sys, k, m);
        const Matrix rhs = transition(sys, n, m);
        CHECK(inf_norm(lhs - rhs) <= 1e-9 * std::max(1.0, inf_norm(rhs)));
    }
}

TEST_CASE("propagate with zero perturbation matches the transition matrix") {
    Sampler s(51);
    const LinearSystem sys = random_near_identity(Window(-8, 8), s);
    const Perturbation none = Perturbation::zero(2);
    for (int round = 0; round < 20; ++round) {
        const int m = s.index(-8, 9), n = s.index(-8, 9);
        const Vec xi = s.box(2, 2.0);
        const Vec direct = transition(sys, n, m) * xi;
        const Vec stepped = propagate(sys, none, m, xi, n);
        CHECK(dist_inf(direct, stepped) <= 1e-10 * std::max(1.0, inf_norm(direct)));
    }
}

TEST_CASE("propagate returns the anchor exactly at its own index") {
    const LinearSystem sys = half_double_system(Window(-5, 5));
    const Perturbation f = scaled_tanh(2, 0.1);
    const Vec xi{0.3, -1.7};
    CHECK(propagate(sys, f, 2, xi, 2) == xi);
}

TEST_CASE("flow identity of the nonlinear propagation") {
    // short window: backward-step solver noise grows with the expansion rate
    const LinearSystem sys = half_double_system(Window(-6, 6));
    const Perturbation f = scaled_tanh(2, 0.1);
    Sampler s(73);
    for (int round = 0; round < 25; ++round) {
        const int m = s.index(-6, 7), k = s.index(-6, 7), n = s.index(-6, 7);
        const Vec xi = s.box(2, 1.5);
        const Vec via_k = propagate(sys, f, k, propagate(sys, f, m, xi, k), n);
        const Vec direct = propagate(sys, f, m, xi, n);
        CHECK(dist_inf(via_k, direct) <= 1e-9 * std::max(1.0, inf_norm(direct)));
    }
}

TEST_CASE("scalar forward/backward propagation round trip") {
    const LinearSystem sys(1, Window(-20, 20), [](int) {
        Matrix A(1);
        A(0, 0) = 0.5;
        return A;
    });
    const Perturbation f = scaled_tanh(1, 0.1);
    const Vec xi{1.25};
    const Vec forward = propagate(sys, f, -5, xi, 5);
    const Vec back = propagate(sys, f, 5, forward, -5);
    CHECK(dist_inf(back, xi) <= 1e-8);
}

TEST_CASE("backward steps demand the contraction margin") {
    const LinearSystem sys = identity_system(Window(-5, 5), 1);
    Perturbation f = scaled_tanh(1, 1.5); // ||A^-1|| r = 1.5
    CHECK_THROWS_AS(propagate(sys, f, 0, Vec{1.0}, -2), BackwardNotContractive);
}

TEST_CASE("out-of-window propagation is rejected") {
    const LinearSystem sys = half_double_system(Window(-5, 5));
    CHECK_THROWS_AS(propagate(sys, Perturbation::zero(2), 0, Vec{1.0, 1.0}, 8),
                    IndexOutOfWindow);
    CHECK_THROWS_AS(transition(sys, -7, 0), IndexOutOfWindow);
}

TEST_CASE("singular or ill-conditioned coefficients are refused at construction") {
    auto singular = [](int n) {
        Matrix A = Matrix::identity(2);
        if (n == 3) A(1, 1) = 0.0, A(1, 0) = 0.0; // rank 1
        return A;
    };
    CHECK_THROWS_AS(LinearSystem(2, Window(-5, 5), singular), SingularCoefficient);

    auto stiff = [](int) { return Matrix::diagonal({1e8, 1e-8}); }; // cond 1e16
    CHECK_THROWS_AS(LinearSystem(2, Window(-5, 5), stiff), SingularCoefficient);
    CHECK_NOTHROW(LinearSystem(2, Window(-5, 5), stiff, 1e17));
}

TEST_CASE("sup_deviation closed forms") {
    CHECK(identity_system(Window(-5, 5)).sup_deviation() == 0.0);
    CHECK(half_double_system(Window(-5, 5)).sup_deviation() == doctest::Approx(1.0));
    // diagonal family diag(b_n, 1/b_n): max(1 - b_n, 1/b_n - 1) = 1/b_min - 1
    const double c = 1.0;
    const LinearSystem diag(2, Window(-12, 12), [c](int n) {
        const double b = std::exp(-c / (1.0 + std::abs(n)));
        return Matrix::diagonal({b, 1.0 / b});
    });
    CHECK(diag.sup_deviation() == doctest::Approx(std::exp(c) - 1.0).epsilon(1e-12));
}

TEST_CASE("solution_residual flags injected defects and accepts propagated orbits") {
    const LinearSystem sys = half_double_system(Window(-8, 8));
    const Perturbation f = scaled_tanh(2, 0.1);
    VecSeq orbit = propagate_all(sys, f, 0, Vec{0.7, -0.4});
    CHECK(solution_residual(sys, f, orbit) <= 1e-12);

    VecSeq zero;
    zero.first = -8;
    zero.vals.assign(18, Vec(2, 0.0));
    CHECK(solution_residual(sys, Perturbation::zero(2), zero) == 0.0);

    const double defect = 1e-3;
    orbit.at(1)[0] += defect;
    CHECK(solution_residual(sys, f, orbit) >= 0.25 * defect);
}

TEST_CASE("growth scan separates the stable and unstable directions") {
    const double c = 1.0;
    const LinearSystem sys(2, Window(-30, 30), [c](int n) {
        const double b = std::exp(-c / (1.0 + std::abs(n)));
        return Matrix::diagonal({b, 1.0 / b});
    });
    const GrowthReport rep =
        scan_unbounded_growth(sys, 0, {Vec{0.0, 0.0}, Vec{0.0, 1.0}, Vec{1.0, 0.0}});
    CHECK(rep.samples[0].verdict == GrowthVerdict::trivial);
    CHECK(rep.samples[1].verdict == GrowthVerdict::grows_forward);
    CHECK(rep.samples[2].verdict == GrowthVerdict::grows_backward);
    CHECK(rep.all_nonzero_grow());

    // a window too short to reveal growth must come back inconclusive
    const LinearSystem slow(1, Window(-4, 4), [](int) {
        Matrix A(1);
        A(0, 0) = 1.05;
        return A;
    });
    const GrowthReport weak = scan_unbounded_growth(slow, 0, {Vec{1.0}});
    CHECK(weak.samples[0].verdict == GrowthVerdict::inconclusive);
    CHECK_FALSE(weak.all_nonzero_grow());
}

TEST_CASE("propagate_all agrees with pointwise propagate") {
    const LinearSystem sys = half_double_system(Window(-6, 6));
    const Perturbation f = scaled_tanh(2, 0.1);
    const Vec xi{0.9, 0.2};
    const VecSeq all = propagate_all(sys, f, 1, xi);
    for (int n = -6; n <= 7; ++n)
        CHECK(dist_inf(all.at(n), propagate(sys, f, 1, xi, n)) <= 1e-12);
}
