/*
 * Built-in registry of SDAE test problems.
 *
 *  - paper3x3: a 3 x 3 index-1 system with singular constant A, cubic drift
 *    and quadratic state-dependent noise; the standard workout for the
 *    linearization scheme.
 *  - gbm_constrained: geometric Brownian motion plus a mirror constraint
 *    x2 = x1; has a closed-form solution, used as the exact-path oracle.
 *  - linear_const: scalar linear ODE with exact flow, deterministic.
 *  - noisy_constraint: deliberately violates the index-1 noise condition
 *    (R g != 0); kept as a counterexample for the checkers.
 *
 * Each entry is validated against its declared checks when the registry is
 * first built.
 */

#pragma once

#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sdae/assumptions.hpp"
#include "sdae/convergence.hpp"
#include "sdae/errors.hpp"
#include "sdae/problem.hpp"
#include "sdae/projectors.hpp"
#include "sdae/types.hpp"

namespace sdae {

struct ProblemEntry {
    std::string name;
    SdaeProblem problem;
    ExactPathFn exact;  // empty when no closed form is known
    std::string notes;
    bool validate_on_register = true;
};

inline SdaeProblem make_paper3x3(double horizon = 1.0) {
    SdaeProblem p;
    p.name = "paper3x3";
    p.dim_d = 3;
    p.dim_noise = 3;
    p.horizon_T = horizon;
    Matrix a(3, 3);
    a << 1, 1, 0,
         0, 0, 0,
         0, -1, 0;
    p.a_fn = [a](double) { return a; };
    p.drift_f = [](double, const Vector& x) {
        Vector f(3);
        f << x(0) - x(0) * x(0) * x(0) + x(1) - x(1) * x(1) * x(1),
             x(0) * x(0) + x(2),
             x(0) + x(1) * x(1) * x(1);
        return f;
    };
    p.diffusion_g = [](double, const Vector& x) {
        Matrix g = Matrix::Zero(3, 3);
        g(0, 0) = x(0) * x(0) + x(1);
        g(0, 2) = x(2);
        g(2, 1) = x(1) * x(1);
        return g;
    };
    p.jac_f = [](double, const Vector& x) {
        Matrix j(3, 3);
        j << 1 - 3 * x(0) * x(0), 1 - 3 * x(1) * x(1), 0,
             2 * x(0), 0, 1,
             1, 3 * x(1) * x(1), 0;
        return j;
    };
    p.dfdt_fn = [](double, const Vector&) { return Vector::Zero(3); };
    p.initial = Vector{{1.0, 1.0, -1.0}};
    return p;
}

struct GbmParams {
    double drift = 0.5;
    double volatility = 0.3;
};

inline SdaeProblem make_gbm_constrained(GbmParams params = {}, double horizon = 1.0) {
    SdaeProblem p;
    p.name = "gbm_constrained";
    p.dim_d = 2;
    p.dim_noise = 1;
    p.horizon_T = horizon;
    Matrix a(2, 2);
    a << 1, 0,
         0, 0;
    p.a_fn = [a](double) { return a; };
    const double mu = params.drift;
    const double sigma = params.volatility;
    p.drift_f = [mu](double, const Vector& x) {
        return Vector{{mu * x(0), x(0) - x(1)}};
    };
    p.diffusion_g = [sigma](double, const Vector& x) {
        Matrix g(2, 1);
        g << sigma * x(0), 0.0;
        return g;
    };
    p.jac_f = [mu](double, const Vector&) {
        Matrix j(2, 2);
        j << mu, 0,
             1, -1;
        return j;
    };
    p.dfdt_fn = [](double, const Vector&) { return Vector::Zero(2); };
    p.initial = Vector{{1.0, 1.0}};
    return p;
}

inline ExactPathFn gbm_exact_path(GbmParams params = {}) {
    const double mu = params.drift;
    const double sigma = params.volatility;
    return [mu, sigma](double t, const Vector& w) {
        const double z = std::exp((mu - 0.5 * sigma * sigma) * t + sigma * w(0));
        return Vector{{z, z}};
    };
}

inline SdaeProblem make_linear_const(double rate = 1.0, double horizon = 1.0) {
    SdaeProblem p;
    p.name = "linear_const";
    p.dim_d = 1;
    p.dim_noise = 1;
    p.horizon_T = horizon;
    p.a_fn = [](double) { return Matrix::Identity(1, 1); };
    p.drift_f = [rate](double, const Vector& x) { return Vector{{rate * x(0)}}; };
    p.diffusion_g = [](double, const Vector&) { return Matrix::Zero(1, 1); };
    p.jac_f = [rate](double, const Vector&) {
        return Matrix::Constant(1, 1, rate);
    };
    p.dfdt_fn = [](double, const Vector&) { return Vector::Zero(1); };
    p.initial = Vector{{1.0}};
    return p;
}

inline SdaeProblem make_noisy_constraint(double horizon = 1.0) {
    SdaeProblem p;
    p.name = "noisy_constraint";
    p.dim_d = 1;
    p.dim_noise = 1;
    p.horizon_T = horizon;
    p.a_fn = [](double) { return Matrix::Zero(1, 1); };
    p.drift_f = [](double, const Vector& x) { return Vector{{x(0)}}; };
    p.diffusion_g = [](double, const Vector&) { return Matrix::Identity(1, 1); };
    p.jac_f = [](double, const Vector&) { return Matrix::Identity(1, 1); };
    p.dfdt_fn = [](double, const Vector&) { return Vector::Zero(1); };
    p.initial = Vector{{0.0}};
    return p;
}

namespace detail {

inline std::vector<Vector> box_grid3(double half_width, int per_axis) {
    std::vector<Vector> grid;
    grid.reserve(static_cast<std::size_t>(per_axis) * per_axis * per_axis);
    for (int i = 0; i < per_axis; ++i) {
        for (int j = 0; j < per_axis; ++j) {
            for (int k = 0; k < per_axis; ++k) {
                const double s = 2.0 * half_width / (per_axis - 1);
                grid.push_back(Vector{{-half_width + i * s, -half_width + j * s,
                                       -half_width + k * s}});
            }
        }
    }
    return grid;
}

// Registration gate for paper3x3: the projector family of its A must equal
// the known closed forms, and all assumption checks must pass on the
// standard sample box.
inline void validate_paper3x3(const SdaeProblem& p) {
    const ToleranceConfig tol = ToleranceConfig::defaults_for(3);
    const Matrix a = p.a_fn(0.0);
    Matrix a_pinv_expected(3, 3);
    a_pinv_expected << 1, 0, 1,
                       0, 0, -1,
                       0, 0, 0;
    Matrix p_expected = Matrix::Zero(3, 3);
    p_expected(0, 0) = p_expected(1, 1) = 1.0;
    Matrix r_expected = Matrix::Zero(3, 3);
    r_expected(1, 1) = 1.0;
    const ProjectorBundle bundle = projector_bundle(a, tol);
    if ((bundle.a_pinv - a_pinv_expected).cwiseAbs().maxCoeff() > 1e-12 ||
        (bundle.p - p_expected).cwiseAbs().maxCoeff() > 1e-12 ||
        (bundle.r - r_expected).cwiseAbs().maxCoeff() > 1e-12) {
        throw ConfigError("paper3x3: projector bundle deviates from closed form");
    }
    const std::vector<double> ts = {0.0, 0.5 * p.horizon_T, p.horizon_T};
    const std::vector<Vector> xs = box_grid3(3.0, 5);
    const AssumptionReport report =
        check_assumptions(p, DerivativeConfig{}, ts, xs, 2.0, tol);
    if (!report.all_ok()) {
        throw ConfigError("paper3x3 failed registration checks:\n" + report.details);
    }
}

inline void validate_generic(const ProblemEntry& entry) {
    entry.problem.validate();
    if (!entry.validate_on_register) {
        return;
    }
    const auto& p = entry.problem;
    const ToleranceConfig tol = ToleranceConfig::defaults_for(p.dim_d);
    const std::vector<double> ts = {0.0, 0.5 * p.horizon_T, p.horizon_T};
    std::vector<Vector> xs = {p.initial, Vector::Zero(p.dim_d),
                              Vector::Constant(p.dim_d, 1.5),
                              Vector::Constant(p.dim_d, -1.5)};
    const Index1Report idx = check_index1(p, DerivativeConfig{}, ts, xs, tol);
    if (!idx.index1_ok || !idx.noise_in_range_ok) {
        throw ConfigError(entry.name + " failed index-1 registration check");
    }
    const ConsistencyReport init = check_initial_consistency(p, tol);
    if (!init.consistent) {
        throw ConfigError(entry.name + " has an inconsistent initial value");
    }
}

inline std::map<std::string, ProblemEntry, std::less<>> build_registry() {
    std::map<std::string, ProblemEntry, std::less<>> registry;

    ProblemEntry paper;
    paper.name = "paper3x3";
    paper.problem = make_paper3x3();
    paper.notes =
        "3x3 index-1 SDAE with singular constant A, cubic drift, quadratic "
        "multiplicative noise; monotone bound holds with k = 2";
    validate_paper3x3(paper.problem);
    registry.emplace(paper.name, std::move(paper));

    ProblemEntry gbm;
    gbm.name = "gbm_constrained";
    gbm.problem = make_gbm_constrained();
    gbm.exact = gbm_exact_path();
    gbm.notes =
        "geometric Brownian motion with mirror constraint x2 = x1; exact "
        "path x1(t) = exp((a - sigma^2/2) t + sigma W(t))";
    validate_generic(gbm);
    registry.emplace(gbm.name, std::move(gbm));

    ProblemEntry lin;
    lin.name = "linear_const";
    lin.problem = make_linear_const();
    lin.exact = [](double t, const Vector&) { return Vector{{std::exp(t)}}; };
    lin.notes = "scalar linear ODE x' = x, exact flow exp(t); nonsingular A";
    validate_generic(lin);
    registry.emplace(lin.name, std::move(lin));

    ProblemEntry bad;
    bad.name = "noisy_constraint";
    bad.problem = make_noisy_constraint();
    bad.notes =
        "counterexample: A = 0 puts the noise outside Im A (R g != 0), so "
        "the index-1 check must fail";
    bad.validate_on_register = false;
    bad.problem.validate();
    registry.emplace(bad.name, std::move(bad));

    return registry;
}

inline const std::map<std::string, ProblemEntry, std::less<>>& registry() {
    static const auto reg = build_registry();
    return reg;
}

}  // namespace detail

namespace problems {

inline const ProblemEntry& get(std::string_view name) {
    const auto& reg = detail::registry();
    const auto it = reg.find(name);
    if (it == reg.end()) {
        throw UnknownProblem("unknown problem: " + std::string(name));
    }
    return it->second;
}

inline std::vector<std::string> list() {
    std::vector<std::string> names;
    names.reserve(detail::registry().size());
    for (const auto& [name, entry] : detail::registry()) {
        names.push_back(name);
    }
    return names;
}

}  // namespace problems

}  // namespace sdae
