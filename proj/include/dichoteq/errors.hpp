#pragma once

#include <stdexcept>
#include <string>

namespace dichoteq {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// An index lookup fell outside the configured window.
struct IndexOutOfWindow : Error {
    using Error::Error;
};

/// A coefficient matrix is singular or its condition number exceeds the cap.
struct SingularCoefficient : Error {
    using Error::Error;
};

/// Backward propagation requires ||A_k^-1|| * r_k < 1 at every step.
struct BackwardNotContractive : Error {
    using Error::Error;
};

/// An inner fixed-point loop did not reach its tolerance within the cap.
struct NoConvergence : Error {
    using Error::Error;
};

/// A claimed projection matrix fails ||P^2 - P|| <= tol.
struct NotAProjection : Error {
    using Error::Error;
};

/// A dichotomy certificate failed verification against its system.
struct CertificateRejected : Error {
    using Error::Error;
};

/// The truncation tail bound exceeds the requested accuracy.
struct TailBudgetExceeded : Error {
    using Error::Error;
};

/// The contraction constant of a fixed-point map is >= 1.
struct NotContractive : Error {
    using Error::Error;
};

/// Picard iteration hit its iteration cap before converging.
struct IterationCapExceeded : Error {
    using Error::Error;
};

/// The window is too short for the requested span.
struct WindowTooNarrow : Error {
    using Error::Error;
};

/// Unknown scenario or perturbation family name.
struct UnknownFamily : Error {
    using Error::Error;
};

/// Scenario or family parameters are invalid.
struct InvalidParams : Error {
    using Error::Error;
};

/// A run configuration is malformed.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace dichoteq
