#include "dslab/error.hpp"

namespace dslab {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::OutOfExtent: return "OutOfExtent";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::Truncated: return "Truncated";
        case ErrorCode::UnknownStation: return "UnknownStation";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::DuplicateStationId: return "DuplicateStationId";
        case ErrorCode::NonDivisibleFactor: return "NonDivisibleFactor";
        case ErrorCode::NaNInput: return "NaNInput";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::ModeTruncationTooLarge: return "ModeTruncationTooLarge";
        case ErrorCode::ChannelNotDivisible: return "ChannelNotDivisible";
        case ErrorCode::NonScalarRoot: return "NonScalarRoot";
        case ErrorCode::GraphConsumed: return "GraphConsumed";
        case ErrorCode::FingerprintMismatch: return "FingerprintMismatch";
        case ErrorCode::EmptyTrainSet: return "EmptyTrainSet";
        case ErrorCode::DivergedAtStep: return "DivergedAtStep";
        case ErrorCode::NoValidSamples: return "NoValidSamples";
        case ErrorCode::CountTooLarge: return "CountTooLarge";
    }
    return "UnknownError";
}

}  // namespace dslab
