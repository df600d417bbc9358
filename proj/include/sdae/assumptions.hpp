/*
 * Sampled runtime checks of the structural assumptions a problem must
 * satisfy before the solvers apply:
 *
 *  - index-1: the constraint Jacobian J_AE = A + R df/dx is invertible and
 *    the noise stays in the range of A (R g = 0);
 *  - monotone growth bound <P x, A^- f> + |A^- g|_F^2 / 2 <= k (1 + |x|^2);
 *  - consistency of the initial value with the constraints.
 *
 * The checks sample user-supplied (t, x) points; they cannot prove the
 * global conditions, and the report records what was sampled.
 */

#pragma once

#include <Eigen/SVD>

#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sdae/errors.hpp"
#include "sdae/problem.hpp"
#include "sdae/projectors.hpp"
#include "sdae/types.hpp"

namespace sdae {

struct Index1Report {
    bool index1_ok = false;
    bool noise_in_range_ok = false;
    double constraint_jacobian_min_sv = 0.0;  // min over samples
    double max_noise_residual = 0.0;          // max of |R g|_F / (1 + |g|_F)
};

struct MonotoneReport {
    bool monotone_ok = false;
    double k_const = 0.0;
    double worst_margin = 0.0;  // max of lhs - k (1 + |x|^2)
};

struct ConsistencyReport {
    bool consistent = false;
    double residual = 0.0;  // |A(0) Q(0) zeta + R(0) f(0, zeta)|
};

struct AssumptionReport {
    bool index1_ok = false;
    bool noise_in_range_ok = false;
    double constraint_jacobian_min_sv = 0.0;
    bool monotone_ok = false;
    double monotone_constant_used = 0.0;
    bool initial_consistent_ok = false;
    std::string details;

    bool all_ok() const {
        return index1_ok && noise_in_range_ok && monotone_ok && initial_consistent_ok;
    }
};

inline Index1Report check_index1(const SdaeProblem& p, const DerivativeConfig& cfg,
                                 std::span<const double> t_samples,
                                 std::span<const Vector> x_samples,
                                 const ToleranceConfig& tol = {}) {
    if (t_samples.empty() || x_samples.empty()) {
        throw EmptySampleSet("check_index1: empty sample set");
    }
    Index1Report report;
    report.constraint_jacobian_min_sv = std::numeric_limits<double>::infinity();
    for (double t : t_samples) {
        require_finite(t, "check_index1 time");
        const Matrix a = p.a_fn(t);
        require_finite(a, "A(t)");
        const ProjectorBundle bundle = projector_bundle(a, tol);
        for (const Vector& x : x_samples) {
            require_finite(x, "check_index1 state");
            const Matrix j_ae = a + bundle.r * jacobian(p, cfg, t, x);
            Eigen::JacobiSVD<Matrix> svd(j_ae);
            const double min_sv = svd.singularValues().minCoeff();
            report.constraint_jacobian_min_sv =
                std::min(report.constraint_jacobian_min_sv, min_sv);
            const Matrix g = p.diffusion_g(t, x);
            require_finite(g, "g(t, x)");
            const double noise_resid = (bundle.r * g).norm() / (1.0 + g.norm());
            report.max_noise_residual = std::max(report.max_noise_residual, noise_resid);
        }
    }
    report.index1_ok = report.constraint_jacobian_min_sv > tol.identity_tol;
    report.noise_in_range_ok = report.max_noise_residual <= tol.identity_tol;
    return report;
}

inline MonotoneReport check_monotone(const SdaeProblem& p,
                                     std::span<const std::pair<double, Vector>> samples,
                                     double k_const, const ToleranceConfig& tol = {}) {
    if (samples.empty()) {
        throw EmptySampleSet("check_monotone: empty sample set");
    }
    if (!(k_const > 0.0)) {
        throw ConfigError("check_monotone: k_const must be positive");
    }
    MonotoneReport report;
    report.k_const = k_const;
    report.worst_margin = -std::numeric_limits<double>::infinity();
    for (const auto& [t, x] : samples) {
        require_finite(t, "check_monotone time");
        require_finite(x, "check_monotone state");
        const Matrix a = p.a_fn(t);
        const ProjectorBundle bundle = projector_bundle(a, tol);
        const Vector apf = bundle.a_pinv * p.drift_f(t, x);
        const Matrix apg = bundle.a_pinv * p.diffusion_g(t, x);
        const double lhs = (bundle.p * x).dot(apf) + 0.5 * apg.squaredNorm();
        const double margin = lhs - k_const * (1.0 + x.squaredNorm());
        report.worst_margin = std::max(report.worst_margin, margin);
    }
    report.monotone_ok = report.worst_margin <= tol.identity_tol;
    return report;
}

inline ConsistencyReport check_initial_consistency(const SdaeProblem& p,
                                                   const ToleranceConfig& tol = {}) {
    const Matrix a0 = p.a_fn(0.0);
    require_finite(a0, "A(0)");
    require_finite(p.initial, "initial value");
    const ProjectorBundle bundle = projector_bundle(a0, tol);
    const Vector f0 = p.drift_f(0.0, p.initial);
    require_finite(f0, "f(0, zeta)");
    ConsistencyReport report;
    report.residual = (a0 * (bundle.q * p.initial) + bundle.r * f0).norm();
    report.consistent = report.residual <= tol.identity_tol * (1.0 + f0.norm());
    return report;
}

// Runs all three checks over the cross product of the time and state samples
// and aggregates the outcome into one definite report.
inline AssumptionReport check_assumptions(const SdaeProblem& p,
                                          const DerivativeConfig& cfg,
                                          std::span<const double> t_samples,
                                          std::span<const Vector> x_samples,
                                          double k_const,
                                          const ToleranceConfig& tol = {}) {
    const Index1Report idx = check_index1(p, cfg, t_samples, x_samples, tol);
    std::vector<std::pair<double, Vector>> pairs;
    pairs.reserve(t_samples.size() * x_samples.size());
    for (double t : t_samples) {
        for (const Vector& x : x_samples) {
            pairs.emplace_back(t, x);
        }
    }
    const MonotoneReport mono = check_monotone(p, pairs, k_const, tol);
    const ConsistencyReport init = check_initial_consistency(p, tol);

    AssumptionReport report;
    report.index1_ok = idx.index1_ok;
    report.noise_in_range_ok = idx.noise_in_range_ok;
    report.constraint_jacobian_min_sv = idx.constraint_jacobian_min_sv;
    report.monotone_ok = mono.monotone_ok;
    report.monotone_constant_used = k_const;
    report.initial_consistent_ok = init.consistent;

    std::ostringstream os;
    os << "sampled " << t_samples.size() << " time(s) x " << x_samples.size()
       << " state(s)\n"
       << "index1: " << (idx.index1_ok ? "ok" : "FAIL")
       << " (min sv of constraint Jacobian = " << idx.constraint_jacobian_min_sv
       << ")\n"
       << "noise in range: " << (idx.noise_in_range_ok ? "ok" : "FAIL")
       << " (max scaled |R g| = " << idx.max_noise_residual << ")\n"
       << "monotone bound (k = " << k_const << "): "
       << (mono.monotone_ok ? "ok" : "FAIL") << " (worst margin = "
       << mono.worst_margin << ")\n"
       << "initial consistency: " << (init.consistent ? "ok" : "FAIL")
       << " (residual = " << init.residual << ")";
    report.details = os.str();
    return report;
}

}  // namespace sdae
