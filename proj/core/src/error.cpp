#include "intentsketch/error.hpp"

namespace intentsketch {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::EmptyQuery: return "EmptyQuery";
        case ErrorCode::DuplicateSlotLabel: return "DuplicateSlotLabel";
        case ErrorCode::GoldNotInOptions: return "GoldNotInOptions";
        case ErrorCode::TooFewOptions: return "TooFewOptions";
        case ErrorCode::InvalidDistribution: return "InvalidDistribution";
        case ErrorCode::ClassIdMismatch: return "ClassIdMismatch";
        case ErrorCode::NonUnitVector: return "NonUnitVector";
        case ErrorCode::NegativeEntropyInput: return "NegativeEntropyInput";
        case ErrorCode::InvalidWeights: return "InvalidWeights";
        case ErrorCode::OracleFailure: return "OracleFailure";
        case ErrorCode::NotEnoughCandidates: return "NotEnoughCandidates";
        case ErrorCode::UnassignedSample: return "UnassignedSample";
        case ErrorCode::EmptyCompletion: return "EmptyCompletion";
        case ErrorCode::AllSketchesRejected: return "AllSketchesRejected";
        case ErrorCode::NoLikelihoodSupport: return "NoLikelihoodSupport";
        case ErrorCode::UnparseableAnswer: return "UnparseableAnswer";
        case ErrorCode::InvalidTemplate: return "InvalidTemplate";
        case ErrorCode::BackendError: return "BackendError";
        case ErrorCode::TransportError: return "TransportError";
        case ErrorCode::RateLimited: return "RateLimited";
        case ErrorCode::MalformedResponse: return "MalformedResponse";
        case ErrorCode::UnparseableVerdict: return "UnparseableVerdict";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::EmptyRecords: return "EmptyRecords";
        case ErrorCode::MissingBaseline: return "MissingBaseline";
        case ErrorCode::InvalidWorld: return "InvalidWorld";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(compose(code, {}, message)), code_(code), detail_(message) {}

Error::Error(ErrorCode code, const std::string& message, std::size_t line)
    : std::runtime_error(compose(code, {}, "line " + std::to_string(line) + ": " + message)),
      code_(code),
      detail_(message),
      line_(line) {}

Error Error::with_stage(std::string stage) const {
    Error tagged(code_, detail_);
    tagged.line_ = line_;
    tagged.stage_ = std::move(stage);
    static_cast<std::runtime_error&>(tagged) =
        std::runtime_error(compose(code_, tagged.stage_, detail_));
    return tagged;
}

std::string Error::compose(ErrorCode code, const std::string& stage,
                           const std::string& message) {
    std::string out;
    if (!stage.empty()) {
        out += "[" + stage + "] ";
    }
    out += to_string(code);
    out += ": ";
    out += message;
    return out;
}

}  // namespace intentsketch
