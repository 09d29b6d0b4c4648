#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace distress {

enum class Errc {
    InvalidArgument,
    IoFailure,
    InvalidConfig,
    // filing_corpus
    NoMdnaFound,
    EmptySection,
    // lexicon_tone
    MalformedLexicon,
    OverlappingLists,
    EmptyDocument,
    // sentiment_scoring
    EmptyScoreList,
    MixedDocuments,
    BackendUnavailable,
    BackendRejected,
    // domain_adaptation
    InvalidDistribution,
    CorpusTooSmall,
    EmptyTrainingSet,
    // features
    InvalidDateOrder,
    InsufficientData,
    MissingSentiment,
    // classifiers
    Separation,
    NoConvergence,
    DimensionMismatch,
    // evaluation
    EmptyClass,
    InvalidLikelihoodOrder,
    WindowTooSparse,
};

std::string_view to_string(Errc code) noexcept;

// Every failure the library reports carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message);

    [[nodiscard]] Errc code() const noexcept { return code_; }

    // True for failures worth retrying (transport errors).
    [[nodiscard]] bool retriable() const noexcept { return code_ == Errc::BackendUnavailable; }

private:
    Errc code_;
};

}  // namespace distress
