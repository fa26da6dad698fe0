#pragma once

#include <stdexcept>
#include <string>

namespace switchflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument or problem description was rejected before any work was done.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Explicit time stepping was requested with a step above the stability limit.
class CflViolation : public InvalidInput {
public:
    CflViolation(const std::string& what, double limiting_dt)
        : InvalidInput(what), limiting_dt_(limiting_dt) {}

    double limiting_dt() const noexcept { return limiting_dt_; }

private:
    double limiting_dt_;
};

/// Path simulation produced a non-finite state.
class SimulationFailure : public Error {
public:
    using Error::Error;
};

/// Lattice transition probabilities fell outside [0, 1].
class LatticeConstructionError : public Error {
public:
    using Error::Error;
};

/// A scheme invariant that should hold by construction was violated.
class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace switchflow
