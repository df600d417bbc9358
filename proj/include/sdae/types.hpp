/*
 * Common aliases and small helpers shared across the library.
 */

#pragma once

#include <Eigen/Dense>

#include <string>

#include "sdae/errors.hpp"

namespace sdae {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline void require_finite(const Matrix& m, const std::string& what) {
    if (!m.allFinite()) {
        throw NonFiniteInput(what + " contains NaN or Inf");
    }
}

inline void require_finite(const Vector& v, const std::string& what) {
    if (!v.allFinite()) {
        throw NonFiniteInput(what + " contains NaN or Inf");
    }
}

inline void require_finite(double v, const std::string& what) {
    if (!std::isfinite(v)) {
        throw NonFiniteInput(what + " is not finite");
    }
}

inline bool is_power_of_two(Index n) {
    return n > 0 && (static_cast<unsigned long long>(n) &
                     (static_cast<unsigned long long>(n) - 1u)) == 0u;
}

}  // namespace sdae
