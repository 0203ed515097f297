#include "ctmc/error.hpp"

namespace ctmc {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::InvalidSize: return "InvalidSize";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::SpaceMismatch: return "SpaceMismatch";
        case ErrorKind::UnknownLabel: return "UnknownLabel";
        case ErrorKind::NegativeOffDiagonal: return "NegativeOffDiagonal";
        case ErrorKind::RowSumViolation: return "RowSumViolation";
        case ErrorKind::InvalidProbability: return "InvalidProbability";
        case ErrorKind::NotIrreducible: return "NotIrreducible";
        case ErrorKind::NotStationary: return "NotStationary";
        case ErrorKind::SolveFailure: return "SolveFailure";
        case ErrorKind::EigenFailure: return "EigenFailure";
        case ErrorKind::ExpmFailure: return "ExpmFailure";
        case ErrorKind::NonPositiveMeasure: return "NonPositiveMeasure";
        case ErrorKind::NonPositiveMarginal: return "NonPositiveMarginal";
        case ErrorKind::NonPositiveAlpha: return "NonPositiveAlpha";
        case ErrorKind::NonPositiveValue: return "NonPositiveValue";
        case ErrorKind::DegenerateRatio: return "DegenerateRatio";
        case ErrorKind::UndefinedConditional: return "UndefinedConditional";
        case ErrorKind::TrajectoryTooShort: return "TrajectoryTooShort";
        case ErrorKind::InsufficientDecay: return "InsufficientDecay";
        case ErrorKind::InsufficientPoints: return "InsufficientPoints";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::GridMismatch: return "GridMismatch";
        case ErrorKind::MissingFit: return "MissingFit";
        case ErrorKind::MassDrift: return "MassDrift";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace ctmc
