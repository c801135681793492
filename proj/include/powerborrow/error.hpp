#pragma once

#include <stdexcept>
#include <string>

namespace powerborrow {

enum class ErrorCode {
    ShapeMismatch,
    SingularDesign,
    NotPositiveDefinite,
    InvalidSummary,
    InvalidHyperparameter,
    InsufficientHistoricalData,
    SingularSystem,
    OutsideFeasibleSet,
    NonpositiveScale,
    ImproperPosterior,
    MomentUndefined,
    EmptyDomain,
    UnsupportedDimension,
    Divergent,
    DomainError,
    InvalidArgument,
    IoError,
    ParseError,
};

const char* error_code_name(ErrorCode code) noexcept;

// Single exception type for the library; the code is what callers branch on.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace powerborrow
