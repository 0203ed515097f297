#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ctmc {

enum class ErrorKind {
    InvalidArgument,
    InvalidSize,
    DimensionMismatch,
    SpaceMismatch,
    UnknownLabel,
    NegativeOffDiagonal,
    RowSumViolation,
    InvalidProbability,
    NotIrreducible,
    NotStationary,
    SolveFailure,
    EigenFailure,
    ExpmFailure,
    NonPositiveMeasure,
    NonPositiveMarginal,
    NonPositiveAlpha,
    NonPositiveValue,
    DegenerateRatio,
    UndefinedConditional,
    TrajectoryTooShort,
    InsufficientDecay,
    InsufficientPoints,
    LengthMismatch,
    GridMismatch,
    MissingFit,
    MassDrift,
    ParseError,
    IoError,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

/// Error raised by every library entry point. The kind names the violated
/// contract; the message carries the offending indices or residuals.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace ctmc
