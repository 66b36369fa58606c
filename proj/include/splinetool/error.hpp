#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace splinetool {

enum class ErrorCode {
    NonMonotoneGrid,
    TooShort,
    IndexOutOfRange,
    InconsistentSlopeHead,
    JumpNotAllowed,
    TooFewPoints,
    InvalidCurve,
    NotMonotone,
    DegenerateBoundary,
    LengthMismatch,
    InvalidBounds,
    NotNondecreasing,
    LambdaOutOfRange,
    WeakConvexityTooLarge,
    GridMismatch,
    InvalidProblem,
    DidNotConverge,
    TooLarge,
    ModeMismatch,
    ShapeMismatch,
    ScaleTooLarge,
    InvalidArgument,
    ParseError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonMonotoneGrid: return "NonMonotoneGrid";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::InconsistentSlopeHead: return "InconsistentSlopeHead";
        case ErrorCode::JumpNotAllowed: return "JumpNotAllowed";
        case ErrorCode::TooFewPoints: return "TooFewPoints";
        case ErrorCode::InvalidCurve: return "InvalidCurve";
        case ErrorCode::NotMonotone: return "NotMonotone";
        case ErrorCode::DegenerateBoundary: return "DegenerateBoundary";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::InvalidBounds: return "InvalidBounds";
        case ErrorCode::NotNondecreasing: return "NotNondecreasing";
        case ErrorCode::LambdaOutOfRange: return "LambdaOutOfRange";
        case ErrorCode::WeakConvexityTooLarge: return "WeakConvexityTooLarge";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::InvalidProblem: return "InvalidProblem";
        case ErrorCode::DidNotConverge: return "DidNotConverge";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::ModeMismatch: return "ModeMismatch";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::ScaleTooLarge: return "ScaleTooLarge";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

/// Exception thrown by every operation of the library. The code is stable and
/// is what callers (and the CLI exit-code mapping) should dispatch on.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace splinetool
