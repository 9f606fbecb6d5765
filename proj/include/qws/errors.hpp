#pragma once

#include <stdexcept>
#include <string>

namespace qws {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid physical parameter or argument outside its documented domain.
struct DomainError : Error {
    using Error::Error;
};

/// Operator dimension too small or mismatched between operands.
struct DimensionError : Error {
    using Error::Error;
};

/// Truncated basis too small for the requested accuracy.
struct TruncationError : Error {
    using Error::Error;
};

/// A numerical scheme failed its built-in accuracy gate.
struct AccuracyError : Error {
    using Error::Error;
};

/// Two internal routes that must agree disagreed beyond tolerance.
struct ConsistencyError : Error {
    using Error::Error;
};

/// Operation is ill-defined on this input (e.g. degenerate spectrum).
struct AmbiguityError : Error {
    using Error::Error;
};

/// Phase-space field support left the sampled grid.
struct CoverageError : Error {
    using Error::Error;
};

/// Bad configuration file or command-line value.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace qws
