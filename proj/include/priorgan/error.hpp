#pragma once

#include <stdexcept>
#include <string>

namespace priorgan {

// Numeric values are part of the C ABI (see priorgan.h); never renumber.
enum class ErrorCode : int {
    Ok = 0,
    InvalidArgument = 1,
    DimensionMismatch = 2,
    NotPositiveDefinite = 3,
    SingularMatrix = 4,
    DegenerateData = 5,
    TooFewPoints = 6,
    CollapsedComponent = 7,
    EmptySet = 8,
    ProfileLengthMismatch = 9,
    DegenerateCalibration = 10,
    AllClippedToZero = 11,
    EmptyGroupPool = 12,
    TapeMismatch = 13,
    DomainError = 14,
    NonFiniteLoss = 15,
    BothDensitiesUnderflow = 16,
    ConfigError = 17,
    IoError = 18,
    FormatError = 19,
    VersionMismatch = 20,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const char* what) {
    if (!cond) fail(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) fail(code, what);
}

}  // namespace priorgan
