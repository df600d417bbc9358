/*
 * Problem statement for a stochastic differential-algebraic equation
 *
 *   A(t) dZ = f(t, Z) dt + g(t, Z) dW,   Z(0) = zeta,   t in [0, T],
 *
 * with a (possibly singular) d x d leading matrix A(t), drift f, and a
 * d x d1 diffusion g driven by a d1-dimensional Wiener process. Analytic
 * Jacobians are optional; finite differences fill the gap.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "sdae/errors.hpp"
#include "sdae/types.hpp"

namespace sdae {

struct SdaeProblem {
    Index dim_d = 0;
    Index dim_noise = 0;
    double horizon_T = 0.0;
    std::function<Matrix(double)> a_fn;
    std::function<Vector(double, const Vector&)> drift_f;
    std::function<Matrix(double, const Vector&)> diffusion_g;
    std::function<Matrix(double, const Vector&)> jac_f;    // optional
    std::function<Vector(double, const Vector&)> dfdt_fn;  // optional
    Vector initial;
    std::string name;

    // Probes every callable at (0, initial) and checks declared dimensions.
    void validate() const {
        if (dim_d <= 0 || dim_noise <= 0) {
            throw ConfigError(name + ": dimensions must be positive");
        }
        if (!(horizon_T > 0.0)) {
            throw ConfigError(name + ": horizon must be positive");
        }
        if (!a_fn || !drift_f || !diffusion_g) {
            throw ConfigError(name + ": A, f and g are required");
        }
        if (initial.size() != dim_d) {
            throw ConfigError(name + ": initial value has wrong dimension");
        }
        require_finite(initial, name + " initial value");
        const Matrix a0 = a_fn(0.0);
        if (a0.rows() != dim_d || a0.cols() != dim_d) {
            throw ConfigError(name + ": A(t) is not d x d");
        }
        require_finite(a0, name + " A(0)");
        const Vector f0 = drift_f(0.0, initial);
        if (f0.size() != dim_d) {
            throw ConfigError(name + ": f returns wrong dimension");
        }
        require_finite(f0, name + " f(0, zeta)");
        const Matrix g0 = diffusion_g(0.0, initial);
        if (g0.rows() != dim_d || g0.cols() != dim_noise) {
            throw ConfigError(name + ": g is not d x d1");
        }
        require_finite(g0, name + " g(0, zeta)");
    }
};

enum class DerivativeMode {
    analytic,           // use the supplied Jacobian, finite differences as fallback
    finite_difference,  // always difference, even when an analytic form exists
};

struct DerivativeConfig {
    DerivativeMode mode = DerivativeMode::analytic;
    double fd_step_x = std::cbrt(std::numeric_limits<double>::epsilon());
    double fd_step_t = std::cbrt(std::numeric_limits<double>::epsilon());
};

// d f / d x as a d x d matrix. Central differences column by column with
// step fd_step_x * max(1, |x_i|) when no analytic Jacobian applies.
inline Matrix jacobian(const SdaeProblem& p, const DerivativeConfig& cfg, double t,
                       const Vector& x) {
    require_finite(t, "jacobian time");
    require_finite(x, "jacobian state");
    if (cfg.mode == DerivativeMode::analytic && p.jac_f) {
        Matrix j = p.jac_f(t, x);
        require_finite(j, "analytic Jacobian");
        return j;
    }
    Matrix j(p.dim_d, p.dim_d);
    Vector xp = x;
    Vector xm = x;
    for (Index i = 0; i < p.dim_d; ++i) {
        const double step = cfg.fd_step_x * std::max(1.0, std::abs(x(i)));
        xp(i) = x(i) + step;
        xm(i) = x(i) - step;
        j.col(i) = (p.drift_f(t, xp) - p.drift_f(t, xm)) / (xp(i) - xm(i));
        xp(i) = x(i);
        xm(i) = x(i);
    }
    if (!j.allFinite()) {
        throw NonFiniteDerivative("finite-difference Jacobian is not finite");
    }
    return j;
}

// d f / d t as a d-vector. Central differences inside (0, T); second-order
// one-sided stencils at the interval ends.
inline Vector dfdt(const SdaeProblem& p, const DerivativeConfig& cfg, double t,
                   const Vector& x) {
    require_finite(t, "dfdt time");
    require_finite(x, "dfdt state");
    if (cfg.mode == DerivativeMode::analytic && p.dfdt_fn) {
        Vector d = p.dfdt_fn(t, x);
        require_finite(d, "analytic df/dt");
        return d;
    }
    const double step =
        std::min(cfg.fd_step_t * std::max(1.0, std::abs(t)), p.horizon_T / 4.0);
    Vector d(p.dim_d);
    if (t - step >= 0.0 && t + step <= p.horizon_T) {
        d = (p.drift_f(t + step, x) - p.drift_f(t - step, x)) / (2.0 * step);
    } else if (t - step < 0.0) {
        d = (-3.0 * p.drift_f(t, x) + 4.0 * p.drift_f(t + step, x) -
             p.drift_f(t + 2.0 * step, x)) /
            (2.0 * step);
    } else {
        d = (3.0 * p.drift_f(t, x) - 4.0 * p.drift_f(t - step, x) +
             p.drift_f(t - 2.0 * step, x)) /
            (2.0 * step);
    }
    if (!d.allFinite()) {
        throw NonFiniteDerivative("finite-difference df/dt is not finite");
    }
    return d;
}

}  // namespace sdae
