/*
 * Seeded Wiener increments on a fine dyadic grid with exact coarsening.
 *
 * Draws are counter-based: each increment is a pure function of
 * (seed, index, coordinate), so regeneration is order-independent and
 * lattices of different resolutions under one seed share a single path.
 * Gaussians come from the inverse normal CDF applied to the counter stream.
 */

#pragma once

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <cstdint>

#include "sdae/errors.hpp"
#include "sdae/types.hpp"

namespace sdae {

struct BrownianLattice {
    std::uint64_t seed = 0;
    Index dim_noise = 0;
    double horizon_T = 0.0;
    Index n_fine = 0;   // power of two
    Matrix increments;  // n_fine x dim_noise, entries ~ N(0, T / n_fine)

    double step() const { return horizon_T / static_cast<double>(n_fine); }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform in the open interval (0, 1): (k + 1/2) * 2^-53 with k on 53 bits.
inline double counter_uniform(std::uint64_t seed, std::uint64_t index,
                              std::uint64_t coordinate) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ index);
    h = splitmix64(h ^ coordinate);
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

inline double standard_normal_draw(std::uint64_t seed, std::uint64_t index,
                                   std::uint64_t coordinate) {
    static const boost::math::normal_distribution<double> unit_normal(0.0, 1.0);
    return boost::math::quantile(unit_normal, counter_uniform(seed, index, coordinate));
}

}  // namespace detail

inline BrownianLattice generate(std::uint64_t seed, Index n_fine, Index dim_noise,
                                double horizon_T) {
    if (!is_power_of_two(n_fine)) {
        throw InvalidResolution("generate: n_fine must be a power of two");
    }
    if (dim_noise <= 0) {
        throw ConfigError("generate: dim_noise must be positive");
    }
    if (!(horizon_T > 0.0)) {
        throw ConfigError("generate: horizon must be positive");
    }
    BrownianLattice l;
    l.seed = seed;
    l.dim_noise = dim_noise;
    l.horizon_T = horizon_T;
    l.n_fine = n_fine;
    l.increments.resize(n_fine, dim_noise);
    const double scale = std::sqrt(horizon_T / static_cast<double>(n_fine));
    for (Index i = 0; i < n_fine; ++i) {
        for (Index j = 0; j < dim_noise; ++j) {
            l.increments(i, j) =
                scale * detail::standard_normal_draw(seed, static_cast<std::uint64_t>(i),
                                                     static_cast<std::uint64_t>(j));
        }
    }
    return l;
}

// Merges blocks of `factor` fine increments into one coarse increment by
// repeated pairwise halving. Halving passes compose exactly, so
// coarsen(coarsen(l, a), b) and coarsen(l, a * b) are bit-identical.
inline BrownianLattice coarsen(const BrownianLattice& l, Index factor) {
    if (!is_power_of_two(factor) || factor > l.n_fine || l.n_fine % factor != 0) {
        throw InvalidResolution("coarsen: factor must be a power of two dividing n_fine");
    }
    BrownianLattice out = l;
    while (factor > 1) {
        const Index half = out.n_fine / 2;
        Matrix merged(half, out.dim_noise);
        for (Index i = 0; i < half; ++i) {
            merged.row(i) = out.increments.row(2 * i) + out.increments.row(2 * i + 1);
        }
        out.increments = std::move(merged);
        out.n_fine = half;
        factor /= 2;
    }
    return out;
}

// Path values W(t_k) as rows of an (n_fine + 1) x dim_noise matrix; row 0 is
// zero and summation is strictly left-to-right.
inline Matrix partial_sums(const BrownianLattice& l) {
    Matrix w = Matrix::Zero(l.n_fine + 1, l.dim_noise);
    for (Index i = 0; i < l.n_fine; ++i) {
        w.row(i + 1) = w.row(i) + l.increments.row(i);
    }
    return w;
}

}  // namespace sdae
