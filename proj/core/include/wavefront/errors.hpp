#pragma once

#include <stdexcept>
#include <string>

namespace wavefront {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A potential evaluation produced a non-finite value.
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// The adaptive integrator underflowed its step size.
class StiffnessError : public Error {
public:
    using Error::Error;
};

/// A trajectory left the blow-up guard ball.
class EscapeError : public Error {
public:
    using Error::Error;
};

/// Requested local-manifold radius violates the nonlinearity bound.
class RadiusError : public Error {
public:
    RadiusError(const std::string& what, double suggested)
        : Error(what), suggested_radius(suggested) {}
    double suggested_radius;
};

/// Speed scan found no sign change to bracket.
class NoBracketError : public Error {
public:
    using Error::Error;
};

class MaxIterationsError : public Error {
public:
    using Error::Error;
};

/// Problem violates a necessary existence condition.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

class NoConvergenceError : public Error {
public:
    using Error::Error;
};

/// A pulse shot re-entered the local unstable box without a symmetry crossing.
class ReturnsToEquilibriumError : public Error {
public:
    using Error::Error;
};

/// Tangency fit window contains no usable samples.
class WindowError : public Error {
public:
    using Error::Error;
};

class InvalidInputError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace wavefront
