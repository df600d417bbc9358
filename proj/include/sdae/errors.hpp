/*
 * Error types thrown by the solver library.
 *
 * All failures derive from SolverError so callers can catch the whole
 * family at once; the concrete type identifies the failure class.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace sdae {

class SolverError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// An input vector or matrix contains NaN or Inf.
class NonFiniteInput : public SolverError {
  public:
    using SolverError::SolverError;
};

// A finite-difference quotient evaluated to NaN or Inf.
class NonFiniteDerivative : public SolverError {
  public:
    using SolverError::SolverError;
};

// A stepper produced a non-finite state; the trajectory is aborted.
class NonFiniteState : public SolverError {
  public:
    using SolverError::SolverError;
};

class EmptySampleSet : public SolverError {
  public:
    using SolverError::SolverError;
};

// Grid size is not a power of two, or a coarsening factor does not divide it.
class InvalidResolution : public SolverError {
  public:
    using SolverError::SolverError;
};

// The per-step linear operator fell below the singularity threshold.
class NearSingularOperator : public SolverError {
  public:
    using SolverError::SolverError;
};

// The leading matrix itself is singular (explicit Euler-Maruyama cannot step).
class SingularMatrix : public SolverError {
  public:
    using SolverError::SolverError;
};

// A structural assumption required by a scheme does not hold for the problem.
class AssumptionViolated : public SolverError {
  public:
    using SolverError::SolverError;
};

// Two trajectories do not live on nested time grids.
class GridMismatch : public SolverError {
  public:
    using SolverError::SolverError;
};

// Rate regression attempted on fewer than two points or on zero errors.
class DegenerateRegression : public SolverError {
  public:
    using SolverError::SolverError;
};

class UnknownProblem : public SolverError {
  public:
    using SolverError::SolverError;
};

// Invalid configuration (bad dimensions, horizons, level sets, ...).
class ConfigError : public SolverError {
  public:
    using SolverError::SolverError;
};

}  // namespace sdae
