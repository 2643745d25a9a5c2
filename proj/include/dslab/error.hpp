#pragma once

#include <stdexcept>
#include <string>

namespace dslab {

enum class ErrorCode {
    // generic
    InvalidArgument,
    IoError,
    // grid-core
    OutOfRange,
    OutOfExtent,
    BadMagic,
    Truncated,
    UnknownStation,
    MalformedRow,
    DuplicateStationId,
    // resample
    NonDivisibleFactor,
    NaNInput,
    // tensor
    ShapeMismatch,
    ModeTruncationTooLarge,
    ChannelNotDivisible,
    NonScalarRoot,
    GraphConsumed,
    // models
    FingerprintMismatch,
    // training
    EmptyTrainSet,
    DivergedAtStep,
    // evaluation
    NoValidSamples,
    // synth
    CountTooLarge,
};

const char* error_code_name(ErrorCode code);

/// Library-wide exception carrying a machine-checkable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace dslab
