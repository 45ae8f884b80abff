#pragma once

#include <stdexcept>
#include <string>

namespace cmcfol {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mismatched variable counts, degree bounds, dimensions.
struct ShapeError : Error {
    using Error::Error;
};

/// Argument outside the mathematical domain (negative dilation, point off B2+).
struct DomainError : Error {
    using Error::Error;
};

/// Input data violates a structural invariant (tensor symmetry, table consistency).
struct ValidationError : Error {
    using Error::Error;
};

/// Bad run configuration (CLI exit code 2).
struct ConfigError : Error {
    using Error::Error;
};

/// Degenerate graph geometry (Psi <= 0, non-embedded surface).
struct GeometryError : Error {
    using Error::Error;
};

/// RHS has a kernel component above tolerance; carries the offending vector.
struct SolvabilityError : Error {
    std::vector<double> kernel_component;
    SolvabilityError(const std::string& msg, std::vector<double> k)
        : Error(msg), kernel_component(std::move(k)) {}
};

/// Newton/continuation failure (CLI exit code 3).
struct ContinuationError : Error {
    using Error::Error;
};

/// Mean-curvature Hessian singular at the critical point.
struct NondegeneracyError : Error {
    using Error::Error;
};

/// Non-finite values in a finite-difference stencil.
struct NumericalError : Error {
    using Error::Error;
};

/// Too few leaves for foliation verification.
struct InsufficientDataError : Error {
    using Error::Error;
};

}  // namespace cmcfol
