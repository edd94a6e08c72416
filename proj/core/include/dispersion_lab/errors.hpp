#pragma once

#include <stdexcept>
#include <string>

namespace dispersion_lab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain where the operation is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Input data failed validation (non-finite samples, malformed configs, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Caller broke a documented precondition (mismatched grids, wrong sizes).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// The spatial grid is too coarse for the requested operation.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// A quantity failed to converge (quadrature box doubling, series).
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// Energy outside the region where a series expansion converges.
class ConvergenceRegionError : public Error {
public:
    using Error::Error;
};

/// A linear system is numerically singular.
class ConditioningError : public Error {
public:
    using Error::Error;
};

/// Parameter at which a formula divides by zero.
class SingularParameterError : public Error {
public:
    using Error::Error;
};

/// Wronskian too small to invert (energy close to a resonance).
class NearResonanceError : public Error {
public:
    using Error::Error;
};

/// Problem size beyond a configured cap.
class SizeError : public Error {
public:
    using Error::Error;
};

}  // namespace dispersion_lab
