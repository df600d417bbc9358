/*
 * Time-stepping engines.
 *
 * step_ll is the semi-implicit local-linearization step: the drift is split
 * per step into a linear part (treated implicitly through the operator
 * D_n = A - h J_n, which is nonsingular even when A is not) and a remainder
 * (treated explicitly):
 *
 *   (A - h J_n) x_{n+1} = A x_n + F_n h + df/dt h^2 + g dW,
 *   J_n = df/dx(t_n, x_n),  F_n = f(t_n, x_n) - J_n x_n.
 *
 * step_decomposed advances the equivalent split form x = u + v with
 * u = P x solving the dynamic part and v = Q x recovered from the
 * linearized constraints (valid when P(t) is constant in t).
 *
 * step_em is the explicit Euler-Maruyama baseline; it must solve against
 * A itself, so it fails by construction whenever A is singular.
 */

#pragma once

#include <Eigen/LU>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "sdae/brownian.hpp"
#include "sdae/errors.hpp"
#include "sdae/problem.hpp"
#include "sdae/projectors.hpp"
#include "sdae/types.hpp"

namespace sdae {

enum class Scheme { ll, decomposed, em };

inline const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::ll: return "ll";
        case Scheme::decomposed: return "decomposed";
        case Scheme::em: return "em";
    }
    return "?";
}

struct SolveOptions {
    // Relative smallest-singular-value threshold below which a per-step
    // operator is declared singular. No retry is attempted; the step fails.
    double min_sv_tol = 1e-12;
    // Evaluate A (and its projectors) once and reuse when A is time-invariant.
    bool cache_constant_a = false;
    DerivativeConfig derivative_cfg{};
    // Projector tolerances used by the decomposed scheme.
    ToleranceConfig projector_tol{};
};

struct Trajectory {
    std::vector<double> times;   // t_n = n T / N, n = 0..N
    std::vector<Vector> states;  // X_n, aligned with times
    Scheme scheme = Scheme::ll;
    Index n_steps = 0;
};

struct DecomposedStep {
    Vector u;  // P x component
    Vector v;  // Q x component
    Vector x;  // u + v
};

namespace detail {

// Cheap smallest-pivot estimate of near-singularity from a partial-pivot LU.
inline void require_solvable(const Eigen::PartialPivLU<Matrix>& lu, const Matrix& m,
                             double min_sv_tol, const std::string& what) {
    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(min_pivot > min_sv_tol * m.norm())) {
        std::ostringstream os;
        os << what << " is near singular (pivot estimate " << min_pivot
           << ", threshold " << min_sv_tol * m.norm() << ")";
        throw NearSingularOperator(os.str());
    }
}

inline Vector step_ll_with_a(const SdaeProblem& p, const SolveOptions& opts,
                             const Matrix& a, double t_n, double h, const Vector& x_n,
                             const Vector& dw) {
    const Matrix j_n = jacobian(p, opts.derivative_cfg, t_n, x_n);
    const Vector f_n = p.drift_f(t_n, x_n);
    const Vector cap_f = f_n - j_n * x_n;
    const Vector ft = dfdt(p, opts.derivative_cfg, t_n, x_n);
    const Matrix d_n = a - h * j_n;
    const Vector rhs =
        a * x_n + cap_f * h + ft * (h * h) + p.diffusion_g(t_n, x_n) * dw;
    Eigen::PartialPivLU<Matrix> lu(d_n);
    require_solvable(lu, d_n, opts.min_sv_tol, "D_n = A - h J");
    Vector x_next = lu.solve(rhs);
    if (!x_next.allFinite()) {
        throw NonFiniteState("step produced a non-finite state");
    }
    return x_next;
}

inline DecomposedStep step_decomposed_with_bundle(
    const SdaeProblem& p, const SolveOptions& opts, const ProjectorBundle& bundle,
    const Matrix& a, double t_n, double h, const Vector& u_n, const Vector& v_n,
    const Vector& dw) {
    const Vector x_n = u_n + v_n;
    const Matrix j_n = jacobian(p, opts.derivative_cfg, t_n, x_n);
    const Vector cap_f = p.drift_f(t_n, x_n) - j_n * x_n;
    const Vector ft = dfdt(p, opts.derivative_cfg, t_n, x_n);

    // Constraint solve: v = G u + w with (A + R J) [G | w] = -[R J | R(F + ft h)].
    const Matrix constraint_op = a + bundle.r * j_n;
    Eigen::PartialPivLU<Matrix> constraint_lu(constraint_op);
    require_solvable(constraint_lu, constraint_op, opts.min_sv_tol, "A + R J");
    const Matrix g_map = -constraint_lu.solve(Matrix(bundle.r * j_n));
    const Vector w_vec = -constraint_lu.solve(Vector(bundle.r * (cap_f + ft * h)));

    // Substitute v_{n+1} into the u-update and solve the assembled system.
    const Matrix apinv_j = bundle.a_pinv * j_n;
    const Matrix identity = Matrix::Identity(p.dim_d, p.dim_d);
    const Matrix u_system = identity - h * apinv_j * (identity + g_map);
    const Vector u_rhs = u_n + h * apinv_j * w_vec + h * bundle.a_pinv * cap_f +
                         (h * h) * bundle.a_pinv * ft +
                         bundle.a_pinv * p.diffusion_g(t_n, x_n) * dw;
    Eigen::PartialPivLU<Matrix> u_lu(u_system);
    require_solvable(u_lu, u_system, opts.min_sv_tol, "decomposed u-system");

    DecomposedStep out;
    out.u = u_lu.solve(u_rhs);
    out.v = g_map * out.u + w_vec;
    out.x = out.u + out.v;
    if (!out.x.allFinite()) {
        throw NonFiniteState("decomposed step produced a non-finite state");
    }
    return out;
}

[[noreturn]] inline void rethrow_with_step(const SolverError& e, Index n, double t) {
    std::ostringstream os;
    os << e.what() << " [step " << n << ", t = " << t << "]";
    const std::string msg = os.str();
    if (dynamic_cast<const NearSingularOperator*>(&e)) throw NearSingularOperator(msg);
    if (dynamic_cast<const SingularMatrix*>(&e)) throw SingularMatrix(msg);
    if (dynamic_cast<const NonFiniteState*>(&e)) throw NonFiniteState(msg);
    if (dynamic_cast<const NonFiniteDerivative*>(&e)) throw NonFiniteDerivative(msg);
    if (dynamic_cast<const NonFiniteInput*>(&e)) throw NonFiniteInput(msg);
    throw SolverError(msg);
}

inline void check_lattice(const SdaeProblem& p, const BrownianLattice& lattice) {
    if (lattice.dim_noise != p.dim_noise) {
        throw ConfigError("lattice noise dimension does not match the problem");
    }
    if (std::abs(lattice.horizon_T - p.horizon_T) >
        1e-12 * std::max(1.0, p.horizon_T)) {
        throw ConfigError("lattice horizon does not match the problem");
    }
}

}  // namespace detail

inline Vector step_ll(const SdaeProblem& p, const SolveOptions& opts, double t_n,
                      double h, const Vector& x_n, const Vector& dw) {
    require_finite(x_n, "state");
    require_finite(dw, "Wiener increment");
    if (!(h > 0.0)) {
        throw ConfigError("step_ll: h must be positive");
    }
    const Matrix a = p.a_fn(t_n);
    require_finite(a, "A(t)");
    return detail::step_ll_with_a(p, opts, a, t_n, h, x_n, dw);
}

inline DecomposedStep step_decomposed(const SdaeProblem& p, const SolveOptions& opts,
                                      double t_n, double h, const Vector& u_n,
                                      const Vector& v_n, const Vector& dw) {
    require_finite(u_n, "u component");
    require_finite(v_n, "v component");
    require_finite(dw, "Wiener increment");
    if (!(h > 0.0)) {
        throw ConfigError("step_decomposed: h must be positive");
    }
    const Matrix a = p.a_fn(t_n);
    require_finite(a, "A(t)");
    const ProjectorBundle bundle = projector_bundle(a, opts.projector_tol);
    return detail::step_decomposed_with_bundle(p, opts, bundle, a, t_n, h, u_n, v_n, dw);
}

inline Vector step_em(const SdaeProblem& p, const SolveOptions& opts, double t_n,
                      double h, const Vector& x_n, const Vector& dw) {
    require_finite(x_n, "state");
    require_finite(dw, "Wiener increment");
    if (!(h > 0.0)) {
        throw ConfigError("step_em: h must be positive");
    }
    const Matrix a = p.a_fn(t_n);
    require_finite(a, "A(t)");
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double sigma_min = svd.singularValues().minCoeff();
    if (!(sigma_min > opts.min_sv_tol * a.norm())) {
        std::ostringstream os;
        os << "leading matrix A(t = " << t_n << ") is singular (sigma_min = "
           << sigma_min << "); the explicit Euler-Maruyama scheme cannot solve "
           << "A x_{n+1} = rhs";
        throw SingularMatrix(os.str());
    }
    const Vector rhs =
        a * x_n + p.drift_f(t_n, x_n) * h + p.diffusion_g(t_n, x_n) * dw;
    Vector x_next = svd.solve(rhs);
    if (!x_next.allFinite()) {
        throw NonFiniteState("Euler-Maruyama step produced a non-finite state");
    }
    return x_next;
}

// Norm of the linearized constraint equation at the accepted step:
// R(t_n) [J_n x_{n+1} + F_n + df/dt h]. Steps of the linearization scheme
// keep this at round-off level on index-1 problems (multiply the step
// equation by R and use R A = 0, R g = 0).
inline double constraint_residual(const SdaeProblem& p, const SolveOptions& opts,
                                  double t_n, double h, const Vector& x_n,
                                  const Vector& x_next) {
    require_finite(x_n, "state");
    require_finite(x_next, "next state");
    const Matrix a = p.a_fn(t_n);
    require_finite(a, "A(t)");
    const ProjectorBundle bundle = projector_bundle(a, opts.projector_tol);
    const Matrix j_n = jacobian(p, opts.derivative_cfg, t_n, x_n);
    const Vector cap_f = p.drift_f(t_n, x_n) - j_n * x_n;
    const Vector ft = dfdt(p, opts.derivative_cfg, t_n, x_n);
    return (bundle.r * (j_n * x_next + cap_f + ft * h)).norm();
}

inline Trajectory integrate_ll(const SdaeProblem& p, const SolveOptions& opts,
                               const BrownianLattice& lattice) {
    detail::check_lattice(p, lattice);
    const Index n = lattice.n_fine;
    const double h = lattice.step();
    Trajectory tr;
    tr.scheme = Scheme::ll;
    tr.n_steps = n;
    tr.times.reserve(n + 1);
    tr.states.reserve(n + 1);
    tr.times.push_back(0.0);
    tr.states.push_back(p.initial);
    Matrix a_cached;
    if (opts.cache_constant_a) {
        a_cached = p.a_fn(0.0);
        require_finite(a_cached, "A(0)");
    }
    Vector x = p.initial;
    for (Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * h;
        try {
            const Matrix& a = opts.cache_constant_a ? a_cached : p.a_fn(t);
            x = detail::step_ll_with_a(p, opts, a, t, h, x, lattice.increments.row(i));
        } catch (const SolverError& e) {
            detail::rethrow_with_step(e, i, t);
        }
        tr.times.push_back(static_cast<double>(i + 1) * h);
        tr.states.push_back(x);
    }
    return tr;
}

// Verifies that P(t) = A^-(t) A(t) has (numerically) zero time derivative
// before running the decomposed scheme; the scheme drops the P' term and is
// only equivalent to the one-piece form under that hypothesis.
inline Trajectory integrate_decomposed(const SdaeProblem& p, const SolveOptions& opts,
                                       const BrownianLattice& lattice) {
    detail::check_lattice(p, lattice);
    const double t_end = p.horizon_T;
    const double probe[] = {0.0, 0.25 * t_end, 0.5 * t_end, 0.75 * t_end, t_end};
    const auto drift = verify_constant_projector(p.a_fn, probe, t_end, opts.projector_tol);
    if (!drift.pass) {
        std::ostringstream os;
        os << "decomposed scheme requires a constant projector P(t) = A^-(t) A(t); "
           << "sampled |dP/dt| reached " << drift.max_derivative_norm;
        throw AssumptionViolated(os.str());
    }

    const Index n = lattice.n_fine;
    const double h = lattice.step();
    Trajectory tr;
    tr.scheme = Scheme::decomposed;
    tr.n_steps = n;
    tr.times.reserve(n + 1);
    tr.states.reserve(n + 1);

    Matrix a = p.a_fn(0.0);
    ProjectorBundle bundle = projector_bundle(a, opts.projector_tol);
    Vector u = bundle.p * p.initial;
    Vector v = bundle.q * p.initial;
    tr.times.push_back(0.0);
    tr.states.push_back(p.initial);
    for (Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * h;
        try {
            if (!opts.cache_constant_a && i > 0) {
                a = p.a_fn(t);
                require_finite(a, "A(t)");
                bundle = projector_bundle(a, opts.projector_tol);
            }
            const DecomposedStep step = detail::step_decomposed_with_bundle(
                p, opts, bundle, a, t, h, u, v, lattice.increments.row(i));
            u = step.u;
            v = step.v;
            tr.states.push_back(step.x);
        } catch (const SolverError& e) {
            detail::rethrow_with_step(e, i, t);
        }
        tr.times.push_back(static_cast<double>(i + 1) * h);
    }
    return tr;
}

inline Trajectory integrate_em(const SdaeProblem& p, const SolveOptions& opts,
                               const BrownianLattice& lattice) {
    detail::check_lattice(p, lattice);
    const Index n = lattice.n_fine;
    const double h = lattice.step();
    Trajectory tr;
    tr.scheme = Scheme::em;
    tr.n_steps = n;
    tr.times.push_back(0.0);
    tr.states.push_back(p.initial);
    Vector x = p.initial;
    for (Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * h;
        try {
            x = step_em(p, opts, t, h, x, lattice.increments.row(i));
        } catch (const SolverError& e) {
            detail::rethrow_with_step(e, i, t);
        }
        tr.times.push_back(static_cast<double>(i + 1) * h);
        tr.states.push_back(x);
    }
    return tr;
}

inline Trajectory integrate(const SdaeProblem& p, const SolveOptions& opts,
                            const BrownianLattice& lattice, Scheme scheme) {
    switch (scheme) {
        case Scheme::ll: return integrate_ll(p, opts, lattice);
        case Scheme::decomposed: return integrate_decomposed(p, opts, lattice);
        case Scheme::em: return integrate_em(p, opts, lattice);
    }
    throw ConfigError("unknown scheme");
}

}  // namespace sdae
