#include "fairaudit/error.hpp"

namespace fairaudit {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Ok: return "Ok";
        case ErrorCode::EmptySupport: return "EmptySupport";
        case ErrorCode::NegativeWeight: return "NegativeWeight";
        case ErrorCode::ZeroTotalMass: return "ZeroTotalMass";
        case ErrorCode::SupportMismatch: return "SupportMismatch";
        case ErrorCode::AbsoluteContinuityViolation: return "AbsoluteContinuityViolation";
        case ErrorCode::InvalidAlpha: return "InvalidAlpha";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::EpsilonTooLarge: return "EpsilonTooLarge";
        case ErrorCode::InfeasibleDirection: return "InfeasibleDirection";
        case ErrorCode::ZeroOutputMass: return "ZeroOutputMass";
        case ErrorCode::DegenerateOutput: return "DegenerateOutput";
        case ErrorCode::IndependentChannel: return "IndependentChannel";
        case ErrorCode::DegenerateObjective: return "DegenerateObjective";
        case ErrorCode::DegeneratePosterior: return "DegeneratePosterior";
        case ErrorCode::MissingFeatureVectors: return "MissingFeatureVectors";
        case ErrorCode::UnsupportedOutputAlphabet: return "UnsupportedOutputAlphabet";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::UnmappableCategory: return "UnmappableCategory";
        case ErrorCode::EmptyAfterFiltering: return "EmptyAfterFiltering";
        case ErrorCode::EmptyGroup: return "EmptyGroup";
        case ErrorCode::PerfectSeparation: return "PerfectSeparation";
        case ErrorCode::UnknownCell: return "UnknownCell";
        case ErrorCode::DegenerateSample: return "DegenerateSample";
        case ErrorCode::MalformedSchedule: return "MalformedSchedule";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

bool is_usage_error(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::MalformedSchedule:
            return true;
        default:
            return false;
    }
}

}  // namespace fairaudit
