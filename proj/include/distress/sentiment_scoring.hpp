#pragma once

#include "distress/filing_corpus.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace distress {

// Class order is fixed across every backend: 0 = positive, 1 = negative, 2 = neutral.
enum class SentimentClass : int { Positive = 0, Negative = 1, Neutral = 2 };
inline constexpr std::size_t kNumClasses = 3;

using ClassProbs = std::array<double, kNumClasses>;

// A backend row before validation; a well-behaved backend returns exactly three entries.
using RawProbs = std::vector<double>;

struct SentenceScore {
    std::string doc_id;
    std::size_t sent_index = 0;
    ClassProbs p{};
};

struct DocumentSentiment {
    std::string doc_id;
    double pos = 0.0;
    double neg = 0.0;
    double neu = 0.0;
    std::size_t n_sentences = 0;
};

// A sentence with a supervised class label, as exchanged with trainers.
struct TrainingExample {
    std::string text;
    int label = 0;
};

// Lowest index wins ties.
int argmax_class(const ClassProbs& p) noexcept;

// Checks a backend row against the simplex (three finite non-negative entries summing to one within
// `tolerance`) and renormalizes it. Throws BackendRejected.
ClassProbs validate_probabilities(std::span<const double> row, double tolerance = 1e-6);

// Sums the class vectors and divides by the total mass. Throws EmptyScoreList or MixedDocuments.
DocumentSentiment aggregate_document(std::span<const SentenceScore> scores);

// Sentence-scoring capability. Implementations are deterministic for a fixed model version and
// safe to call from several threads.
class ScoringBackend {
public:
    virtual ~ScoringBackend() = default;

    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual std::string model_version() const = 0;
    [[nodiscard]] virtual std::size_t max_sentence_tokens() const = 0;

    // One row per sentence, in input order.
    [[nodiscard]] virtual std::vector<RawProbs> score_batch(std::span<const std::string> sentences) const = 0;
};

// Keeps the first `max_tokens` whitespace-delimited tokens.
std::string truncate_tokens(std::string_view sentence, std::size_t max_tokens);

// Persistent score store keyed by (backend, model version, doc id, sentence index), backed by a
// JSON-lines file. Thread-safe.
class ScoreCache {
public:
    ScoreCache() = default;
    explicit ScoreCache(std::filesystem::path path);

    [[nodiscard]] std::optional<ClassProbs> find(std::string_view backend, std::string_view model_version,
                                                 std::string_view doc_id, std::size_t sent_index) const;
    void insert(std::string_view backend, std::string_view model_version, std::string_view doc_id,
                std::size_t sent_index, const ClassProbs& p);

    // Appends records inserted since the last flush to the backing file.
    void flush();

    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::size_t hits() const;
    [[nodiscard]] std::size_t misses() const;

private:
    struct Record {
        std::string backend;
        std::string model_version;
        std::string doc_id;
        std::size_t sent_index;
        ClassProbs p;
    };

    static std::string key(std::string_view backend, std::string_view model_version, std::string_view doc_id,
                           std::size_t sent_index);

    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, ClassProbs> entries_;
    std::vector<Record> pending_;
    mutable std::size_t hits_ = 0;
    mutable std::size_t misses_ = 0;
};

// Scores every sentence of the document in order, truncating over-long sentences first.
// Cached scores are reused. Throws BackendUnavailable / BackendRejected from the backend.
std::vector<SentenceScore> score_document(const MdnaDocument& doc, const ScoringBackend& backend,
                                          ScoreCache* cache = nullptr);

// Batches sentences across documents; result is aligned with `docs`.
std::vector<std::vector<SentenceScore>> score_corpus(std::span<const MdnaDocument> docs,
                                                     const ScoringBackend& backend, ScoreCache* cache = nullptr,
                                                     std::size_t batch_sentences = 4096);

}  // namespace distress
