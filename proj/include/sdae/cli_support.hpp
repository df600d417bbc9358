/*
 * Small helpers backing the command-line tool: level-range parsing and
 * deterministic sample boxes for the assumption checks.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sdae/brownian.hpp"
#include "sdae/errors.hpp"
#include "sdae/types.hpp"

namespace sdae {

// Accepts "a..b" (all powers of two from a to b inclusive), a single value,
// or a comma-separated list. Values must be powers of two.
inline std::vector<Index> parse_levels(const std::string& text) {
    std::vector<Index> levels;
    const auto parse_one = [](const std::string& s) -> Index {
        std::size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(s, &pos);
        } catch (const std::exception&) {
            throw ConfigError("invalid level '" + s + "'");
        }
        if (pos != s.size() || v <= 0) {
            throw ConfigError("invalid level '" + s + "'");
        }
        return static_cast<Index>(v);
    };
    if (const auto dots = text.find(".."); dots != std::string::npos) {
        const Index lo = parse_one(text.substr(0, dots));
        const Index hi = parse_one(text.substr(dots + 2));
        if (!is_power_of_two(lo) || !is_power_of_two(hi) || lo > hi) {
            throw ConfigError("level range bounds must be increasing powers of two");
        }
        for (Index n = lo; n <= hi; n *= 2) {
            levels.push_back(n);
        }
        return levels;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string tok =
            text.substr(start, comma == std::string::npos ? std::string::npos
                                                          : comma - start);
        if (tok.empty()) {
            throw ConfigError("empty level entry");
        }
        const Index v = parse_one(tok);
        if (!is_power_of_two(v)) {
            throw ConfigError("level " + tok + " is not a power of two");
        }
        levels.push_back(v);
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return levels;
}

// Deterministic states for sampled assumption checks: an axis-aligned grid
// in [-half_width, half_width]^d when a grid of the requested size fits,
// seeded uniform draws otherwise.
inline std::vector<Vector> check_sample_states(Index dim, int count, double half_width,
                                               std::uint64_t seed) {
    if (dim <= 0 || count <= 0) {
        throw ConfigError("check samples need a positive dimension and count");
    }
    std::vector<Vector> states;
    const int per_axis = std::max(
        2, static_cast<int>(std::llround(std::pow(static_cast<double>(count),
                                                  1.0 / static_cast<double>(dim)))));
    const double grid_points = std::pow(static_cast<double>(per_axis),
                                        static_cast<double>(dim));
    if (dim <= 3 && grid_points <= 4096.0) {
        std::vector<int> idx(static_cast<std::size_t>(dim), 0);
        const double step = 2.0 * half_width / (per_axis - 1);
        while (true) {
            Vector x(dim);
            for (Index k = 0; k < dim; ++k) {
                x(k) = -half_width + step * idx[static_cast<std::size_t>(k)];
            }
            states.push_back(x);
            Index k = 0;
            for (; k < dim; ++k) {
                auto& i = idx[static_cast<std::size_t>(k)];
                if (++i < per_axis) {
                    break;
                }
                i = 0;
            }
            if (k == dim) {
                break;
            }
        }
        return states;
    }
    states.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        Vector x(dim);
        for (Index k = 0; k < dim; ++k) {
            const double u = detail::counter_uniform(
                seed, static_cast<std::uint64_t>(i),
                static_cast<std::uint64_t>(k) + 0x1000u);
            x(k) = -half_width + 2.0 * half_width * u;
        }
        states.push_back(x);
    }
    return states;
}

}  // namespace sdae
