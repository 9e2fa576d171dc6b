#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fraclim {

/// Failure categories reported by the library and mapped to CLI exit codes.
enum class ErrorCode {
    AlphaOutOfRange,
    UnsupportedDimension,
    NonPositiveDomain,
    EmptyEpsilonSchedule,
    CrossSectionBoundsViolated,
    InvalidConfig,
    OddNodeCount,
    NonPositiveExtent,
    GridMismatch,
    NonEquilibriumF,
    PowerIterationStalled,
    NegativeEntries,
    SingularSystem,
    QuadratureMismatch,
    TailDivergence,
    StabilityViolation,
    NonMonotoneTime,
    ConfigRegimeMismatch,
    Io,
};

inline std::string_view to_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::NonPositiveDomain: return "NonPositiveDomain";
    case ErrorCode::EmptyEpsilonSchedule: return "EmptyEpsilonSchedule";
    case ErrorCode::CrossSectionBoundsViolated: return "CrossSectionBoundsViolated";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::OddNodeCount: return "OddNodeCount";
    case ErrorCode::NonPositiveExtent: return "NonPositiveExtent";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NonEquilibriumF: return "NonEquilibriumF";
    case ErrorCode::PowerIterationStalled: return "PowerIterationStalled";
    case ErrorCode::NegativeEntries: return "NegativeEntries";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::QuadratureMismatch: return "QuadratureMismatch";
    case ErrorCode::TailDivergence: return "TailDivergence";
    case ErrorCode::StabilityViolation: return "StabilityViolation";
    case ErrorCode::NonMonotoneTime: return "NonMonotoneTime";
    case ErrorCode::ConfigRegimeMismatch: return "ConfigRegimeMismatch";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

/// Exception carrying an ErrorCode next to the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace fraclim
