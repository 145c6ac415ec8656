#pragma once

#include <stdexcept>
#include <string>

namespace netgain {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operands have incompatible or unexpected dimensions.
struct DimensionError : Error {
    using Error::Error;
};

/// An input violates a documented precondition (non-finite entry,
/// asymmetric matrix where symmetry is required, out-of-range parameter).
struct InvalidInputError : Error {
    using Error::Error;
};

/// A linear system has no (reliable) solution.
struct SingularMatrixError : Error {
    using Error::Error;
};

/// The requested equation admits no solution for this input.
struct NoSolutionError : Error {
    using Error::Error;
};

/// Input is degenerate for this operation (e.g. the zero matrix where a
/// finite scaling margin is requested).
struct DegenerateInputError : Error {
    using Error::Error;
};

/// 1 is (numerically) an eigenvalue, so the bilinear transform is undefined.
struct UnitEigenvalueError : Error {
    using Error::Error;
};

/// Problem size exceeds what an exhaustive routine supports.
struct UnsupportedSizeError : Error {
    using Error::Error;
};

/// Network shape not handled by this operation (e.g. non-SISO checklist).
struct UnsupportedShapeError : Error {
    using Error::Error;
};

/// A documented precondition on the operating point does not hold.
struct PreconditionError : Error {
    using Error::Error;
};

/// A sub-system realization is not internally stable.
struct UnstableSubsystemError : Error {
    using Error::Error;
};

/// The static interconnection loop is singular; loop signals are not
/// uniquely determined.
struct NotWellPosedError : Error {
    using Error::Error;
};

/// A declared quantity is inconsistent with the realized one.
struct ConfigurationError : Error {
    using Error::Error;
};

/// Text input could not be parsed; carries a 1-based position.
struct ParseError : Error {
    ParseError(const std::string& msg, int line, int column)
        : Error(msg + " (line " + std::to_string(line) + ", column " +
                std::to_string(column) + ")"),
          line(line),
          column(column) {}

    int line = 0;
    int column = 0;
};

}  // namespace netgain
