#include "distress/errors.hpp"

namespace distress {

std::string_view to_string(Errc code) noexcept
{
    switch (code) {
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::IoFailure: return "IoFailure";
        case Errc::InvalidConfig: return "InvalidConfig";
        case Errc::NoMdnaFound: return "NoMdnaFound";
        case Errc::EmptySection: return "EmptySection";
        case Errc::MalformedLexicon: return "MalformedLexicon";
        case Errc::OverlappingLists: return "OverlappingLists";
        case Errc::EmptyDocument: return "EmptyDocument";
        case Errc::EmptyScoreList: return "EmptyScoreList";
        case Errc::MixedDocuments: return "MixedDocuments";
        case Errc::BackendUnavailable: return "BackendUnavailable";
        case Errc::BackendRejected: return "BackendRejected";
        case Errc::InvalidDistribution: return "InvalidDistribution";
        case Errc::CorpusTooSmall: return "CorpusTooSmall";
        case Errc::EmptyTrainingSet: return "EmptyTrainingSet";
        case Errc::InvalidDateOrder: return "InvalidDateOrder";
        case Errc::InsufficientData: return "InsufficientData";
        case Errc::MissingSentiment: return "MissingSentiment";
        case Errc::Separation: return "Separation";
        case Errc::NoConvergence: return "NoConvergence";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::EmptyClass: return "EmptyClass";
        case Errc::InvalidLikelihoodOrder: return "InvalidLikelihoodOrder";
        case Errc::WindowTooSparse: return "WindowTooSparse";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
{
}

}  // namespace distress
