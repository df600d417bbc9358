/*
 * Moore-Penrose pseudo-inverse and the projector bundle of a singular
 * square matrix A:
 *
 *   P = A^- A   (differential components),
 *   Q = I - P   (algebraic components, Im Q = Ker A),
 *   R = I - A A^-  (left annihilator of A, extracts the constraints).
 *
 * All constructions go through one SVD with a relative rank cutoff.
 */

#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <functional>
#include <limits>
#include <span>

#include "sdae/errors.hpp"
#include "sdae/types.hpp"

namespace sdae {

struct ToleranceConfig {
    // Singular values below rank_rel_tol * sigma_max are treated as zero.
    double rank_rel_tol = 100.0 * 16.0 * std::numeric_limits<double>::epsilon();
    // Residual bound for the Penrose and projector identities.
    double identity_tol = 1e-10;
    // Step for finite-difference time derivatives of P(t).
    double fd_step = std::cbrt(std::numeric_limits<double>::epsilon());

    // Rank cutoff scaled to the matrix dimension: dim * eps * 16.
    static ToleranceConfig defaults_for(Index dim) {
        ToleranceConfig tol;
        tol.rank_rel_tol =
            static_cast<double>(dim) * std::numeric_limits<double>::epsilon() * 16.0;
        return tol;
    }
};

struct ProjectorBundle {
    Matrix a_pinv;  // A^-
    Matrix p;       // A^- A
    Matrix q;       // I - P
    Matrix r;       // I - A A^-
    Index rank = 0;
    double sigma_min_pos = 0.0;  // smallest retained singular value, 0 at rank 0
};

namespace detail {

struct SvdParts {
    Eigen::JacobiSVD<Matrix> svd;
    Index rank = 0;
    double sigma_min_pos = 0.0;
};

inline SvdParts decompose(const Matrix& m, const ToleranceConfig& tol) {
    SvdParts out;
    out.svd.compute(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = out.svd.singularValues();
    const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
    const double cutoff = tol.rank_rel_tol * sigma_max;
    for (Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff && sv(i) > 0.0) {
            out.rank = i + 1;
            out.sigma_min_pos = sv(i);
        }
    }
    return out;
}

inline Matrix pinv_from(const SvdParts& parts) {
    const auto& sv = parts.svd.singularValues();
    Vector inv = Vector::Zero(sv.size());
    for (Index i = 0; i < parts.rank; ++i) {
        inv(i) = 1.0 / sv(i);
    }
    return parts.svd.matrixV() * inv.asDiagonal() * parts.svd.matrixU().transpose();
}

}  // namespace detail

inline Matrix pseudo_inverse(const Matrix& m, const ToleranceConfig& tol = {}) {
    require_finite(m, "pseudo_inverse input");
    return detail::pinv_from(detail::decompose(m, tol));
}

inline ProjectorBundle projector_bundle(const Matrix& a, const ToleranceConfig& tol = {}) {
    require_finite(a, "projector_bundle input");
    const auto parts = detail::decompose(a, tol);
    ProjectorBundle b;
    b.a_pinv = detail::pinv_from(parts);
    b.p = b.a_pinv * a;
    b.q = Matrix::Identity(a.rows(), a.cols()) - b.p;
    b.r = Matrix::Identity(a.rows(), a.cols()) - a * b.a_pinv;
    b.rank = parts.rank;
    b.sigma_min_pos = parts.sigma_min_pos;
    return b;
}

struct ProjectorDriftReport {
    double max_derivative_norm = 0.0;
    bool pass = false;
};

// Samples the finite-difference time derivative of P(t) = A^-(t) A(t) and
// reports the largest Frobenius norm seen. A constant matrix function gives
// exactly zero. Differences are clamped to one-sided at the interval ends.
inline ProjectorDriftReport verify_constant_projector(
    const std::function<Matrix(double)>& a_fn, std::span<const double> times,
    double horizon, const ToleranceConfig& tol = {}) {
    if (times.empty()) {
        throw EmptySampleSet("verify_constant_projector: no sample times");
    }
    if (!(horizon > 0.0)) {
        throw ConfigError("verify_constant_projector: horizon must be positive");
    }
    const double delta = tol.fd_step;
    ProjectorDriftReport report;
    for (double t : times) {
        require_finite(t, "sample time");
        const double t_hi = std::min(t + delta, horizon);
        const double t_lo = std::max(t - delta, 0.0);
        const Matrix p_hi = projector_bundle(a_fn(t_hi), tol).p;
        const Matrix p_lo = projector_bundle(a_fn(t_lo), tol).p;
        const double fd = (p_hi - p_lo).norm() / (t_hi - t_lo);
        report.max_derivative_norm = std::max(report.max_derivative_norm, fd);
    }
    // Guardband: an O(1) drift gives fd ~ 1, round-off gives ~ eps / fd_step.
    report.pass = report.max_derivative_norm <= tol.identity_tol / tol.fd_step;
    return report;
}

}  // namespace sdae
