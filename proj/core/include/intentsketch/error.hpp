#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace intentsketch {

enum class ErrorCode {
    // input validation
    EmptyQuery,
    DuplicateSlotLabel,
    GoldNotInOptions,
    TooFewOptions,
    // numerics
    InvalidDistribution,
    ClassIdMismatch,
    NonUnitVector,
    NegativeEntropyInput,
    InvalidWeights,
    // policy sets
    OracleFailure,
    NotEnoughCandidates,
    UnassignedSample,
    // pipeline
    EmptyCompletion,
    AllSketchesRejected,
    NoLikelihoodSupport,
    UnparseableAnswer,
    InvalidTemplate,
    // backends
    BackendError,
    TransportError,
    RateLimited,
    MalformedResponse,
    UnparseableVerdict,
    // harness
    ParseError,
    ValidationError,
    EmptyRecords,
    MissingBaseline,
    // simlab
    InvalidWorld,
    // configuration
    ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `line` is set for dataset errors,
/// `stage` when the pipeline annotates which stage failed.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);
    Error(ErrorCode code, const std::string& message, std::size_t line);

    ErrorCode code() const noexcept { return code_; }
    const std::optional<std::size_t>& line() const noexcept { return line_; }
    const std::string& stage() const noexcept { return stage_; }
    const std::string& detail() const noexcept { return detail_; }

    /// Copy of this error tagged with the pipeline stage it came from.
    Error with_stage(std::string stage) const;

private:
    static std::string compose(ErrorCode code, const std::string& stage,
                               const std::string& message);

    ErrorCode code_;
    std::string detail_;
    std::optional<std::size_t> line_;
    std::string stage_;
};

}  // namespace intentsketch
