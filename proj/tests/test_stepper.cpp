#include <catch2/catch_amalgamated.hpp>

#include "sdae/brownian.hpp"
#include "sdae/problems.hpp"
#include "sdae/stepper.hpp"

#include <cmath>
#include <random>

using namespace sdae;

namespace {

// Rebuilds the one-step linear system to audit an accepted step.
struct StepSystem {
    Matrix d;
    Vector rhs;
};

StepSystem rebuild_system(const SdaeProblem& p, const SolveOptions& opts, double t,
                          double h, const Vector& x, const Vector& dw) {
    const Matrix a = p.a_fn(t);
    const Matrix j = jacobian(p, opts.derivative_cfg, t, x);
    const Vector f = p.drift_f(t, x);
    const Vector ft = dfdt(p, opts.derivative_cfg, t, x);
    StepSystem s;
    s.d = a - h * j;
    s.rhs = a * x + (f - j * x) * h + ft * (h * h) + p.diffusion_g(t, x) * dw;
    return s;
}

}  // namespace

TEST_CASE("step_ll") {
    SolveOptions opts;

    SECTION("constant drift reduces to the explicit Euler update") {
        SdaeProblem p;
        p.dim_d = 1;
        p.dim_noise = 1;
        p.horizon_T = 1.0;
        p.a_fn = [](double) { return Matrix::Identity(1, 1); };
        p.drift_f = [](double, const Vector&) { return Vector{{2.5}}; };
        p.diffusion_g = [](double, const Vector&) { return Matrix::Zero(1, 1); };
        p.initial = Vector{{0.0}};
        const Vector next = step_ll(p, opts, 0.25, 0.125, Vector{{3.0}}, Vector{{0.0}});
        CHECK(next(0) == 3.0 + 2.5 * 0.125);
    }

    SECTION("linear autonomous drift gives the linearly implicit update") {
        const double b = 0.7;
        const SdaeProblem p = make_linear_const(b);
        const double h = 0.01;
        const Vector next = step_ll(p, opts, 0.0, h, Vector{{2.0}}, Vector{{0.0}});
        CHECK(next(0) == Catch::Approx(2.0 / (1.0 - h * b)).epsilon(1e-15));
    }

    SECTION("singular-A step satisfies its linear system and the constraint") {
        const SdaeProblem p = make_paper3x3();
        const double h = 1.0 / (1 << 10);
        const Vector x{{1.0, 1.0, -1.0}};
        const Vector dw = Vector::Zero(3);
        const Vector next = step_ll(p, opts, 0.0, h, x, dw);
        const StepSystem s = rebuild_system(p, opts, 0.0, h, x, dw);
        CHECK((s.d * next - s.rhs).norm() <= 1e-12 * (1.0 + s.rhs.norm()));
        CHECK(constraint_residual(p, opts, 0.0, h, x, next) <=
              1e-10 * (1.0 + std::pow(x.norm(), 3)));
    }

    SECTION("a singular per-step operator fails loudly") {
        SdaeProblem p = make_linear_const(10.0);
        // h J = 1 makes D = A - h J exactly zero
        CHECK_THROWS_AS(step_ll(p, opts, 0.0, 0.1, Vector{{1.0}}, Vector{{0.0}}),
                        NearSingularOperator);
    }

    SECTION("overflowing states abort with NonFiniteState") {
        SdaeProblem p;
        p.dim_d = 1;
        p.dim_noise = 1;
        p.horizon_T = 100.0;
        p.a_fn = [](double) { return Matrix::Identity(1, 1); };
        p.drift_f = [](double, const Vector&) { return Vector{{1e308}}; };
        p.diffusion_g = [](double, const Vector&) { return Matrix::Zero(1, 1); };
        p.jac_f = [](double, const Vector&) { return Matrix::Zero(1, 1); };
        p.dfdt_fn = [](double, const Vector&) { return Vector::Zero(1); };
        p.initial = Vector{{0.0}};
        CHECK_THROWS_AS(step_ll(p, opts, 0.0, 10.0, Vector{{0.0}}, Vector{{0.0}}),
                        NonFiniteState);
    }
}

TEST_CASE("integrate_ll") {
    SolveOptions opts;
    opts.cache_constant_a = true;

    SECTION("deterministic linear problem matches the closed-form product") {
        const double b = 1.0;
        const SdaeProblem p = make_linear_const(b);
        const Index n = 1 << 4;
        const double h = 1.0 / static_cast<double>(n);
        BrownianLattice quiet;
        quiet.seed = 0;
        quiet.dim_noise = 1;
        quiet.horizon_T = 1.0;
        quiet.n_fine = n;
        quiet.increments = Matrix::Zero(n, 1);
        const Trajectory tr = integrate_ll(p, opts, quiet);
        REQUIRE(tr.states.size() == static_cast<std::size_t>(n) + 1);
        const double expected = std::pow(1.0 / (1.0 - h * b), n);
        CHECK(tr.states.back()(0) == Catch::Approx(expected).epsilon(1e-13));
    }

    SECTION("single step trajectory has two points") {
        const SdaeProblem p = make_linear_const();
        BrownianLattice quiet;
        quiet.seed = 0;
        quiet.dim_noise = 1;
        quiet.horizon_T = 1.0;
        quiet.n_fine = 1;
        quiet.increments = Matrix::Zero(1, 1);
        const Trajectory tr = integrate_ll(p, opts, quiet);
        REQUIRE(tr.states.size() == 2);
        CHECK(tr.states[1](0) ==
              step_ll(p, opts, 0.0, 1.0, p.initial, Vector::Zero(1))(0));
    }

    SECTION("index-1 trajectory keeps the discrete constraint at round-off") {
        const SdaeProblem p = make_paper3x3();
        const BrownianLattice lattice = generate(42, 1 << 10, 3, 1.0);
        const Trajectory tr = integrate_ll(p, opts, lattice);
        const double h = lattice.step();
        double worst = 0.0;
        for (Index i = 0; i < tr.n_steps; ++i) {
            const auto n = static_cast<std::size_t>(i);
            const double r = constraint_residual(p, opts, tr.times[n], h,
                                                 tr.states[n], tr.states[n + 1]);
            worst = std::max(worst, r / (1.0 + std::pow(tr.states[n].norm(), 3)));
        }
        CHECK(worst <= 1e-10);

        // every accepted step solved its linear system to round-off
        for (Index i = 0; i < tr.n_steps; i += 97) {
            const auto n = static_cast<std::size_t>(i);
            const StepSystem s = rebuild_system(p, opts, tr.times[n], h, tr.states[n],
                                                lattice.increments.row(i).transpose());
            CHECK((s.d * tr.states[n + 1] - s.rhs).norm() <=
                  1e-12 * (1.0 + s.rhs.norm()));
        }
    }

    SECTION("failures carry the step index") {
        const SdaeProblem p = make_paper3x3();
        const BrownianLattice lattice = generate(1, 1 << 3, 3, 1.0);
        try {
            integrate_em(p, SolveOptions{}, lattice);
            FAIL("expected SingularMatrix");
        } catch (const SingularMatrix& e) {
            CHECK(std::string(e.what()).find("step 0") != std::string::npos);
        }
    }
}

TEST_CASE("step_decomposed") {
    SolveOptions opts;
    const SdaeProblem p = make_paper3x3();
    const ToleranceConfig tol = ToleranceConfig::defaults_for(3);
    const ProjectorBundle bundle = projector_bundle(p.a_fn(0.0), tol);

    SECTION("agrees with the one-piece step on random states") {
        std::mt19937_64 rng(123);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            Vector x(3);
            x << normal(rng), normal(rng), normal(rng);
            Vector dw(3);
            dw << normal(rng) * 0.03, normal(rng) * 0.03, normal(rng) * 0.03;
            const double h = 1.0 / (1 << 10);
            const Vector u = bundle.p * x;
            const Vector v = bundle.q * x;
            const Vector x_ll = step_ll(p, opts, 0.0, h, x, dw);
            const DecomposedStep dec = step_decomposed(p, opts, 0.0, h, u, v, dw);
            CHECK((x_ll - dec.x).norm() <= 1e-10 * (1.0 + x_ll.norm()));
            // the algebraic component lives in Ker A: first two entries vanish
            CHECK(std::abs(dec.v(0)) <= 1e-12 * (1.0 + dec.x.norm()));
            CHECK(std::abs(dec.v(1)) <= 1e-12 * (1.0 + dec.x.norm()));
        }
    }

    SECTION("nonsingular A collapses the split: v = 0 and u-update = ll step") {
        const SdaeProblem lin = make_linear_const(0.5);
        const DecomposedStep dec =
            step_decomposed(lin, opts, 0.0, 0.01, Vector{{2.0}}, Vector{{0.0}},
                            Vector{{0.1}});
        const Vector x_ll = step_ll(lin, opts, 0.0, 0.01, Vector{{2.0}}, Vector{{0.1}});
        CHECK(dec.v.cwiseAbs().maxCoeff() <= 1e-14);
        CHECK(std::abs(dec.x(0) - x_ll(0)) <= 1e-13 * (1.0 + std::abs(x_ll(0))));
    }

    SECTION("continuous constraint pins the algebraic component") {
        // on the constraint manifold x3 = -x1^2, the split of x has
        // v = (0, 0, -u1^2 - u3) with u3 = 0
        for (const double x1 : {-1.5, 0.3, 2.0}) {
            const Vector x{{x1, 0.8, -x1 * x1}};
            const Vector u = bundle.p * x;
            const Vector v = bundle.q * x;
            CHECK(u(2) == 0.0);
            CHECK(v(0) == 0.0);
            CHECK(v(1) == 0.0);
            CHECK(v(2) == Catch::Approx(-u(0) * u(0) - u(2)).margin(1e-13));
            // and the continuous constraint residual A v + R f(x) vanishes
            const Vector resid =
                p.a_fn(0.0) * v + bundle.r * p.drift_f(0.0, x);
            CHECK(resid.norm() <= 1e-12);
        }
    }
}

TEST_CASE("integrate_decomposed equals integrate_ll under a constant projector") {
    SolveOptions opts;
    opts.cache_constant_a = true;
    const SdaeProblem p = make_paper3x3();
    const BrownianLattice lattice = generate(42, 1 << 8, 3, 1.0);
    const Trajectory a = integrate_ll(p, opts, lattice);
    const Trajectory b = integrate_decomposed(p, opts, lattice);
    REQUIRE(a.states.size() == b.states.size());
    double worst = 0.0;
    for (std::size_t n = 0; n < a.states.size(); ++n) {
        worst = std::max(worst,
                         (a.states[n] - b.states[n]).norm() / (1.0 + a.states[n].norm()));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("integrate_decomposed rejects drifting projectors") {
    SolveOptions opts;
    SdaeProblem p = make_paper3x3();
    p.dim_d = 2;
    p.dim_noise = 1;
    p.a_fn = [](double t) {
        Vector dir(2);
        dir << std::cos(t), std::sin(t);
        return Matrix(dir * dir.transpose());
    };
    p.drift_f = [](double, const Vector& x) { return Vector(-x); };
    p.diffusion_g = [](double, const Vector&) { return Matrix::Zero(2, 1); };
    p.jac_f = [](double, const Vector&) { return Matrix(-Matrix::Identity(2, 2)); };
    p.dfdt_fn = [](double, const Vector&) { return Vector::Zero(2); };
    p.initial = Vector{{1.0, 0.0}};
    const BrownianLattice lattice = generate(3, 1 << 4, 1, 1.0);
    CHECK_THROWS_AS(integrate_decomposed(p, opts, lattice), AssumptionViolated);
}

TEST_CASE("step_em") {
    SolveOptions opts;

    SECTION("fails on a singular leading matrix") {
        const SdaeProblem p = make_paper3x3();
        try {
            step_em(p, opts, 0.0, 0.01, p.initial, Vector::Zero(3));
            FAIL("expected SingularMatrix");
        } catch (const SingularMatrix& e) {
            CHECK(std::string(e.what()).find("singular") != std::string::npos);
        }
    }

    SECTION("scalar nonsingular case is classical explicit Euler") {
        const double b = 0.8;
        const SdaeProblem p = make_linear_const(b);
        const double h = 0.02;
        const Vector next = step_em(p, opts, 0.0, h, Vector{{3.0}}, Vector{{0.0}});
        CHECK(next(0) == Catch::Approx(3.0 * (1.0 + b * h)).epsilon(1e-15));
    }

    SECTION("2x2 nonsingular case matches the hand-solved system") {
        SdaeProblem p;
        p.dim_d = 2;
        p.dim_noise = 1;
        p.horizon_T = 1.0;
        Matrix a(2, 2);
        a << 2, 1,
             0, 1;
        p.a_fn = [a](double) { return a; };
        Matrix b(2, 2);
        b << 0, 1,
             -1, 0;
        p.drift_f = [b](double, const Vector& x) { return Vector(b * x); };
        p.diffusion_g = [](double, const Vector&) { return Matrix::Zero(2, 1); };
        p.initial = Vector{{1.0, 2.0}};
        const double h = 0.1;
        const Vector x{{1.0, 2.0}};
        const Vector next = step_em(p, opts, 0.0, h, x, Vector{{0.0}});
        // solve A y = A x + h B x by hand: A x = (4, 2), B x = (2, -1),
        // rhs = (4.2, 1.9); second row gives y2 = 1.9, first 2 y1 = 4.2 - 1.9
        CHECK(next(1) == Catch::Approx(1.9).epsilon(1e-14));
        CHECK(next(0) == Catch::Approx((4.2 - 1.9) / 2.0).epsilon(1e-14));
    }
}

TEST_CASE("constraint_residual") {
    SolveOptions opts;

    SECTION("vanishes identically for nonsingular A") {
        const SdaeProblem p = make_linear_const();
        CHECK(constraint_residual(p, opts, 0.0, 0.01, Vector{{1.0}}, Vector{{37.0}}) ==
              0.0);
    }

    SECTION("grows linearly in a perturbation that feeds the constraint") {
        const SdaeProblem p = make_paper3x3();
        const double h = 1.0 / (1 << 8);
        const Vector x{{1.0, 1.0, -1.0}};
        const Vector next = step_ll(p, opts, 0.0, h, x, Vector::Zero(3));
        const double base = constraint_residual(p, opts, 0.0, h, x, next);
        const Vector e1 = Vector::Unit(3, 0);
        const double r1 = constraint_residual(p, opts, 0.0, h, x, next + 1e-4 * e1);
        const double r2 = constraint_residual(p, opts, 0.0, h, x, next + 2e-4 * e1);
        CHECK(base <= 1e-12);
        CHECK(r2 / r1 == Catch::Approx(2.0).epsilon(1e-6));
        // slope equals |R J e1|
        const Matrix j = jacobian(p, opts.derivative_cfg, 0.0, x);
        const ProjectorBundle bundle = projector_bundle(p.a_fn(0.0));
        CHECK(r1 == Catch::Approx(1e-4 * (bundle.r * j * e1).norm()).epsilon(1e-6));
    }
}

TEST_CASE("one-step order of the deterministic linearized step") {
    // x' = x, x0 = 1: the one-step error at h halves twice when h halves
    SolveOptions opts;
    const SdaeProblem p = make_linear_const(1.0);
    const auto one_step_error = [&](double h) {
        const Vector next = step_ll(p, opts, 0.0, h, Vector{{1.0}}, Vector{{0.0}});
        return std::abs(next(0) - std::exp(h));
    };
    const double h = 0.01;
    const double ratio = one_step_error(h) / one_step_error(h / 2.0);
    CHECK(ratio >= 3.6);
    CHECK(ratio <= 4.4);
}

TEST_CASE("with a frozen zero Jacobian the step is Euler-Maruyama in disguise") {
    SdaeProblem p;
    p.dim_d = 2;
    p.dim_noise = 2;
    p.horizon_T = 1.0;
    Matrix a(2, 2);
    a << 3, 1,
         1, 2;
    p.a_fn = [a](double) { return a; };
    p.drift_f = [](double, const Vector& x) {
        return Vector{{x(1) - 0.5 * x(0), x(0) * x(1)}};
    };
    p.diffusion_g = [](double, const Vector& x) {
        Matrix g(2, 2);
        g << 0.2 * x(0), 0, 0, 0.1;
        return g;
    };
    p.jac_f = [](double, const Vector&) { return Matrix::Zero(2, 2); };
    p.dfdt_fn = [](double, const Vector&) { return Vector::Zero(2); };
    p.initial = Vector{{1.0, 1.0}};

    SolveOptions opts;
    const double h = 0.05;
    const Vector x{{0.7, -0.3}};
    const Vector dw{{0.1, -0.05}};
    const Vector via_ll = step_ll(p, opts, 0.0, h, x, dw);
    const Vector via_em = step_em(p, opts, 0.0, h, x, dw);
    CHECK((via_ll - via_em).norm() <= 1e-13 * (1.0 + via_em.norm()));
}
