/*
 * Pathwise-error harness: integrates one Brownian path at a fine reference
 * resolution and at nested coarse resolutions, measures sup-norm pathwise
 * errors over shared grid points, and fits a convergence rate per sample
 * by log-log least squares.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "sdae/brownian.hpp"
#include "sdae/errors.hpp"
#include "sdae/problem.hpp"
#include "sdae/stepper.hpp"
#include "sdae/types.hpp"

namespace sdae {

struct ConvergenceConfig {
    Index n_ref = 1 << 16;
    std::vector<Index> levels;  // sorted powers of two, each dividing n_ref
    int n_samples = 3;
    std::uint64_t base_seed = 0;
    Scheme scheme = Scheme::ll;

    void validate() const {
        if (!is_power_of_two(n_ref)) {
            throw ConfigError("n_ref must be a power of two");
        }
        if (levels.empty()) {
            throw ConfigError("levels must be nonempty");
        }
        if (n_samples < 1) {
            throw ConfigError("n_samples must be at least 1");
        }
        Index prev = 0;
        for (Index n : levels) {
            if (!is_power_of_two(n) || n >= n_ref || n_ref % n != 0) {
                throw ConfigError(
                    "every level must be a power of two dividing and below n_ref");
            }
            if (n <= prev) {
                throw ConfigError("levels must be strictly increasing");
            }
            prev = n;
        }
    }
};

struct LevelError {
    Index n_steps = 0;
    double sup_error = 0.0;
};

struct SampleResult {
    std::uint64_t seed = 0;
    std::vector<LevelError> errors;
    std::optional<double> rate;  // absent when the regression is degenerate
};

struct ConvergenceReport {
    std::vector<SampleResult> samples;
    std::optional<double> mean_rate;
};

// Max Euclidean distance over the coarse grid points, which must be a
// subset of the reference grid (nested dyadic resolutions, same horizon).
inline double pathwise_error(const Trajectory& coarse, const Trajectory& reference) {
    if (coarse.n_steps <= 0 || reference.n_steps <= 0 ||
        reference.n_steps % coarse.n_steps != 0) {
        throw GridMismatch("trajectory grids are not nested");
    }
    const Index factor = reference.n_steps / coarse.n_steps;
    const double t_scale = std::max(1.0, std::abs(reference.times.back()));
    double sup = 0.0;
    for (Index j = 0; j <= coarse.n_steps; ++j) {
        const double tc = coarse.times[static_cast<std::size_t>(j)];
        const double tr = reference.times[static_cast<std::size_t>(j * factor)];
        if (std::abs(tc - tr) > 1e-12 * t_scale) {
            throw GridMismatch("trajectory grids do not share time points");
        }
        sup = std::max(sup, (coarse.states[static_cast<std::size_t>(j)] -
                             reference.states[static_cast<std::size_t>(j * factor)])
                                .norm());
    }
    return sup;
}

// Least-squares slope of log e against log N, negated, so a rate of +1/2
// means e proportional to N^{-1/2}.
inline double fit_rate(std::span<const LevelError> errors) {
    if (errors.size() < 2) {
        throw DegenerateRegression("rate fit needs at least two (N, error) points");
    }
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& e : errors) {
        if (!(e.sup_error > 0.0) || !std::isfinite(e.sup_error)) {
            throw DegenerateRegression("rate fit needs strictly positive finite errors");
        }
        mean_x += std::log(static_cast<double>(e.n_steps));
        mean_y += std::log(e.sup_error);
    }
    mean_x /= static_cast<double>(errors.size());
    mean_y /= static_cast<double>(errors.size());
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& e : errors) {
        const double dx = std::log(static_cast<double>(e.n_steps)) - mean_x;
        const double dy = std::log(e.sup_error) - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0)) {
        throw DegenerateRegression("rate fit needs at least two distinct resolutions");
    }
    return -sxy / sxx;
}

namespace detail {

template <typename ReferenceErrors>
ConvergenceReport study_with(const ConvergenceConfig& cfg, ReferenceErrors&& per_sample) {
    cfg.validate();
    std::vector<std::future<SampleResult>> futures;
    futures.reserve(static_cast<std::size_t>(cfg.n_samples));
    for (int i = 0; i < cfg.n_samples; ++i) {
        const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(i);
        futures.push_back(std::async(std::launch::async, per_sample, i, seed));
    }
    ConvergenceReport report;
    report.samples.reserve(futures.size());
    double rate_sum = 0.0;
    int rate_count = 0;
    for (auto& f : futures) {
        SampleResult sample = f.get();
        try {
            sample.rate = fit_rate(sample.errors);
            rate_sum += *sample.rate;
            ++rate_count;
        } catch (const DegenerateRegression&) {
            sample.rate.reset();
        }
        report.samples.push_back(std::move(sample));
    }
    if (rate_count > 0) {
        report.mean_rate = rate_sum / rate_count;
    }
    return report;
}

}  // namespace detail

// Same-path study against the finest-resolution solution of the same scheme.
// Errors at numerical failure propagate tagged with (sample, level).
inline ConvergenceReport run_study(const SdaeProblem& p, const ConvergenceConfig& cfg,
                                   const SolveOptions& opts) {
    return detail::study_with(cfg, [&](int sample_index, std::uint64_t seed) {
        SampleResult out;
        out.seed = seed;
        const BrownianLattice fine = generate(seed, cfg.n_ref, p.dim_noise, p.horizon_T);
        Trajectory reference;
        try {
            reference = integrate(p, opts, fine, cfg.scheme);
        } catch (const SolverError& e) {
            std::ostringstream os;
            os << e.what() << " [sample " << sample_index << ", reference N = "
               << cfg.n_ref << "]";
            throw SolverError(os.str());
        }
        for (Index n : cfg.levels) {
            try {
                const Trajectory coarse =
                    integrate(p, opts, coarsen(fine, cfg.n_ref / n), cfg.scheme);
                out.errors.push_back({n, pathwise_error(coarse, reference)});
            } catch (const SolverError& e) {
                std::ostringstream os;
                os << e.what() << " [sample " << sample_index << ", N = " << n << "]";
                throw SolverError(os.str());
            }
        }
        return out;
    });
}

// Exact path evaluator: maps (t, W(t)) to the solution state at t.
using ExactPathFn = std::function<Vector(double, const Vector&)>;

// Like run_study, but the reference is a closed-form solution evaluated at
// the coarse grid points from the partial sums of the same fine lattice.
inline ConvergenceReport compare_exact(const SdaeProblem& p, const ExactPathFn& exact,
                                       const ConvergenceConfig& cfg,
                                       const SolveOptions& opts) {
    if (!exact) {
        throw ConfigError("compare_exact: no exact-path evaluator supplied");
    }
    return detail::study_with(cfg, [&](int sample_index, std::uint64_t seed) {
        SampleResult out;
        out.seed = seed;
        const BrownianLattice fine = generate(seed, cfg.n_ref, p.dim_noise, p.horizon_T);
        const Matrix w = partial_sums(fine);
        for (Index n : cfg.levels) {
            try {
                const Index factor = cfg.n_ref / n;
                const Trajectory coarse =
                    integrate(p, opts, coarsen(fine, factor), cfg.scheme);
                double sup = 0.0;
                for (Index j = 0; j <= n; ++j) {
                    const double t = coarse.times[static_cast<std::size_t>(j)];
                    const Vector z = exact(t, Vector(w.row(j * factor).transpose()));
                    sup = std::max(
                        sup, (coarse.states[static_cast<std::size_t>(j)] - z).norm());
                }
                out.errors.push_back({n, sup});
            } catch (const SolverError& e) {
                std::ostringstream os;
                os << e.what() << " [sample " << sample_index << ", N = " << n << "]";
                throw SolverError(os.str());
            }
        }
        return out;
    });
}

}  // namespace sdae
