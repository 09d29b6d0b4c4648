#include "distress/sentiment_scoring.hpp"

#include "distress/errors.hpp"
#include "distress/io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace distress {

int argmax_class(const ClassProbs& p) noexcept
{
    int best = 0;
    for (int c = 1; c < static_cast<int>(kNumClasses); ++c) {
        if (p[static_cast<std::size_t>(c)] > p[static_cast<std::size_t>(best)]) {
            best = c;
        }
    }
    return best;
}

ClassProbs validate_probabilities(std::span<const double> row, double tolerance)
{
    if (row.size() != kNumClasses) {
        throw Error(Errc::BackendRejected, fmt::format("expected {} class probabilities, got {}", kNumClasses, row.size()));
    }
    double sum = 0.0;
    for (double v : row) {
        if (!std::isfinite(v) || v < -tolerance) {
            throw Error(Errc::BackendRejected, fmt::format("probability {} outside [0, 1]", v));
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance) {
        throw Error(Errc::BackendRejected, fmt::format("probabilities sum to {}", sum));
    }
    ClassProbs p{};
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        p[c] = std::max(row[c], 0.0);
    }
    const double total = p[0] + p[1] + p[2];
    for (auto& v : p) {
        v /= total;
    }
    return p;
}

DocumentSentiment aggregate_document(std::span<const SentenceScore> scores)
{
    if (scores.empty()) {
        throw Error(Errc::EmptyScoreList, "no sentence scores to aggregate");
    }
    ClassProbs sum{};
    for (const auto& s : scores) {
        if (s.doc_id != scores.front().doc_id) {
            throw Error(Errc::MixedDocuments,
                        fmt::format("scores from '{}' and '{}' in one aggregation", scores.front().doc_id, s.doc_id));
        }
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            sum[c] += s.p[c];
        }
    }
    const double total = sum[0] + sum[1] + sum[2];
    if (!(total > 0.0)) {
        throw Error(Errc::InvalidDistribution, "summed class mass is zero");
    }
    DocumentSentiment doc;
    doc.doc_id = scores.front().doc_id;
    doc.pos = sum[0] / total;
    doc.neg = sum[1] / total;
    doc.neu = sum[2] / total;
    doc.n_sentences = scores.size();
    return doc;
}

std::string truncate_tokens(std::string_view sentence, std::size_t max_tokens)
{
    std::size_t tokens = 0;
    std::size_t i = 0;
    while (i < sentence.size()) {
        while (i < sentence.size() && std::isspace(static_cast<unsigned char>(sentence[i]))) {
            ++i;
        }
        if (i == sentence.size()) {
            break;
        }
        if (tokens == max_tokens) {
            auto kept = sentence.substr(0, i);
            while (!kept.empty() && std::isspace(static_cast<unsigned char>(kept.back()))) {
                kept.remove_suffix(1);
            }
            return std::string(kept);
        }
        ++tokens;
        while (i < sentence.size() && !std::isspace(static_cast<unsigned char>(sentence[i]))) {
            ++i;
        }
    }
    return std::string(sentence);
}

ScoreCache::ScoreCache(std::filesystem::path path) : path_(std::move(path))
{
    if (!std::filesystem::exists(path_)) {
        return;
    }
    std::istringstream in(io::read_text(path_));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(line);
            const ClassProbs p{j.at("p_pos").get<double>(), j.at("p_neg").get<double>(), j.at("p_neu").get<double>()};
            entries_[key(j.at("backend").get<std::string>(), j.at("model_version").get<std::string>(),
                         j.at("doc_id").get<std::string>(), j.at("sent_index").get<std::size_t>())] = p;
        } catch (const nlohmann::json::exception&) {
            // A torn trailing line from an interrupted run is skipped; its score is recomputed.
            continue;
        }
    }
}

std::string ScoreCache::key(std::string_view backend, std::string_view model_version, std::string_view doc_id,
                            std::size_t sent_index)
{
    return fmt::format("{}\x1f{}\x1f{}\x1f{}", backend, model_version, doc_id, sent_index);
}

std::optional<ClassProbs> ScoreCache::find(std::string_view backend, std::string_view model_version,
                                           std::string_view doc_id, std::size_t sent_index) const
{
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(key(backend, model_version, doc_id, sent_index));
    if (it == entries_.end()) {
        ++misses_;
        return std::nullopt;
    }
    ++hits_;
    return it->second;
}

void ScoreCache::insert(std::string_view backend, std::string_view model_version, std::string_view doc_id,
                        std::size_t sent_index, const ClassProbs& p)
{
    std::lock_guard lock(mutex_);
    entries_.insert_or_assign(key(backend, model_version, doc_id, sent_index), p);
    pending_.push_back({std::string(backend), std::string(model_version), std::string(doc_id), sent_index, p});
}

void ScoreCache::flush()
{
    std::lock_guard lock(mutex_);
    if (pending_.empty() || path_.empty()) {
        pending_.clear();
        return;
    }
    if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) {
        throw Error(Errc::IoFailure, fmt::format("cannot append to score cache '{}'", path_.string()));
    }
    for (const auto& r : pending_) {
        const nlohmann::json j = {{"doc_id", r.doc_id},   {"sent_index", r.sent_index}, {"backend", r.backend},
                                  {"model_version", r.model_version}, {"p_pos", r.p[0]}, {"p_neg", r.p[1]},
                                  {"p_neu", r.p[2]}};
        out << j.dump() << '\n';
    }
    pending_.clear();
}

std::size_t ScoreCache::size() const
{
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::size_t ScoreCache::hits() const
{
    std::lock_guard lock(mutex_);
    return hits_;
}

std::size_t ScoreCache::misses() const
{
    std::lock_guard lock(mutex_);
    return misses_;
}

std::vector<SentenceScore> score_document(const MdnaDocument& doc, const ScoringBackend& backend, ScoreCache* cache)
{
    if (doc.sentences.empty()) {
        throw Error(Errc::EmptyDocument, fmt::format("document '{}' has no sentences", doc.filing_id));
    }
    auto scored = score_corpus(std::span<const MdnaDocument>(&doc, 1), backend, cache);
    return std::move(scored.front());
}

std::vector<std::vector<SentenceScore>> score_corpus(std::span<const MdnaDocument> docs, const ScoringBackend& backend,
                                                     ScoreCache* cache, std::size_t batch_sentences)
{
    const auto backend_name = backend.name();
    const auto version = backend.model_version();
    const auto max_tokens = backend.max_sentence_tokens();

    std::vector<std::vector<SentenceScore>> result(docs.size());
    struct Pending {
        std::size_t doc;
        std::size_t sentence;
    };
    std::vector<Pending> pending;
    std::vector<std::string> texts;

    auto run_batch = [&] {
        if (texts.empty()) {
            return;
        }
        const auto rows = backend.score_batch(texts);
        if (rows.size() != texts.size()) {
            throw Error(Errc::BackendRejected,
                        fmt::format("backend returned {} rows for {} sentences", rows.size(), texts.size()));
        }
        for (std::size_t n = 0; n < rows.size(); ++n) {
            const auto& where = pending[n];
            auto& score = result[where.doc][where.sentence];
            score.p = validate_probabilities(rows[n]);
            if (cache != nullptr) {
                cache->insert(backend_name, version, score.doc_id, score.sent_index, score.p);
            }
        }
        pending.clear();
        texts.clear();
    };

    for (std::size_t d = 0; d < docs.size(); ++d) {
        const auto& doc = docs[d];
        result[d].resize(doc.sentences.size());
        for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
            auto& score = result[d][s];
            score.doc_id = doc.filing_id;
            score.sent_index = doc.sentences[s].index;
            if (cache != nullptr) {
                if (auto hit = cache->find(backend_name, version, score.doc_id, score.sent_index)) {
                    score.p = *hit;
                    continue;
                }
            }
            pending.push_back({d, s});
            texts.push_back(truncate_tokens(doc.sentences[s].text, max_tokens));
            if (texts.size() >= batch_sentences) {
                run_batch();
            }
        }
    }
    run_batch();
    return result;
}

}  // namespace distress
