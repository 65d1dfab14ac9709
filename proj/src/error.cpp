#include "priorgan/error.hpp"

namespace priorgan {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::Ok: return "Ok";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::CollapsedComponent: return "CollapsedComponent";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::ProfileLengthMismatch: return "ProfileLengthMismatch";
    case ErrorCode::DegenerateCalibration: return "DegenerateCalibration";
    case ErrorCode::AllClippedToZero: return "AllClippedToZero";
    case ErrorCode::EmptyGroupPool: return "EmptyGroupPool";
    case ErrorCode::TapeMismatch: return "TapeMismatch";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::BothDensitiesUnderflow: return "BothDensitiesUnderflow";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    }
    return "Unknown";
}

}  // namespace priorgan
