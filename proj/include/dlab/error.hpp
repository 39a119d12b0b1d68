// error.hpp — Exception types shared by every dlab module

#pragma once

#include <stdexcept>
#include <string>

namespace dlab {

// Root of the hierarchy; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or a violated type invariant (exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical domain of an operation (exit code 2).
class DomainError : public Error {
public:
    using Error::Error;
};

// Solver, integrator or estimator failure (exit code 3).
class NumericalError : public Error {
public:
    using Error::Error;
};

// Lineshape has no resolvable extremum or the signal is buried in noise.
class FitError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace dlab
