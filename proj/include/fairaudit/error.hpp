#pragma once

#include <stdexcept>
#include <string>

namespace fairaudit {

// Stable error codes. Values are part of the C ABI (see fairaudit.h) and
// must not be renumbered.
enum class ErrorCode : int {
    Ok = 0,
    EmptySupport = 1,
    NegativeWeight = 2,
    ZeroTotalMass = 3,
    SupportMismatch = 4,
    AbsoluteContinuityViolation = 5,
    InvalidAlpha = 6,
    ZeroVariance = 7,
    EpsilonTooLarge = 8,
    InfeasibleDirection = 9,
    ZeroOutputMass = 10,
    DegenerateOutput = 11,
    IndependentChannel = 12,
    DegenerateObjective = 13,
    DegeneratePosterior = 14,
    MissingFeatureVectors = 15,
    UnsupportedOutputAlphabet = 16,
    InvalidArgument = 17,
    MissingColumn = 18,
    UnmappableCategory = 19,
    EmptyAfterFiltering = 20,
    EmptyGroup = 21,
    PerfectSeparation = 22,
    UnknownCell = 23,
    DegenerateSample = 24,
    MalformedSchedule = 25,
    IoError = 26,
    Internal = 27,
};

const char* error_code_name(ErrorCode code) noexcept;

// Errors whose root cause is a malformed user request (bad flag syntax,
// malformed schedule rows) rather than a property of the data.
bool is_usage_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace fairaudit
