#pragma once

#include "distress/filing_corpus.hpp"
#include "distress/sentiment_scoring.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace distress {

struct AdaptationConfig {
    std::size_t n_documents = 1200;
    double entropy_threshold = 0.2;
    int n_classes = 3;
    std::uint64_t rng_seed = 0;
    int rounds = 1;

    // Throws InvalidArgument (bad threshold / class count) or CorpusTooSmall.
    void validate(std::size_t corpus_size) const;
};

// Normalized Shannon entropy -(1/ln M) sum p ln p with 0 ln 0 = 0, M = p.size().
// Throws InvalidDistribution for negative entries or a sum off one by more than `tolerance`.
double self_entropy(std::span<const double> p, double tolerance = 1e-6);

struct PseudoLabel {
    Sentence sentence;
    int label = 0;
    SentenceScore score;
    double self_entropy = 0.0;
};

// Uniformly samples n_documents documents without replacement (seeded) and labels every sentence
// with the backend's argmax class.
std::vector<PseudoLabel> generate_pseudo_labels(std::span<const MdnaDocument> corpus, const ScoringBackend& backend,
                                                const AdaptationConfig& config, ScoreCache* cache = nullptr);

// Indices of the documents generate_pseudo_labels samples; exposed for determinism checks.
std::vector<std::size_t> sample_documents(std::size_t corpus_size, std::size_t n_documents, std::uint64_t seed);

struct FilterResult {
    std::vector<PseudoLabel> retained;
    double retained_fraction = 0.0;
};

// Keeps labels with self_entropy <= threshold, order preserved. Throws InvalidArgument unless
// 0 < threshold <= 1.
FilterResult filter_reliable(std::span<const PseudoLabel> labels, double threshold);

struct TrainingSetSummary {
    std::size_t n_records = 0;
    std::array<std::size_t, kNumClasses> class_counts{};
};

// Writes {text, label} JSON lines shuffled with `seed`. Throws EmptyTrainingSet or IoFailure.
TrainingSetSummary emit_training_set(std::span<const PseudoLabel> labels, const std::filesystem::path& path,
                                     std::uint64_t seed);

std::vector<TrainingExample> read_training_set(const std::filesystem::path& path);

struct AdaptationOutcome {
    std::size_t n_documents = 0;
    std::size_t n_sentences = 0;
    std::size_t n_retained = 0;
    double retained_fraction = 0.0;
    TrainingSetSummary summary;
    std::filesystem::path training_set;
    std::filesystem::path manifest;
};

// One self-learning pass: pseudo-label, filter, write the training set and a manifest beside it
// (<training set>.manifest.json).
AdaptationOutcome prepare_adaptation_round(std::span<const MdnaDocument> corpus, const ScoringBackend& backend,
                                           const AdaptationConfig& config, const std::filesystem::path& training_set,
                                           ScoreCache* cache = nullptr);

}  // namespace distress
