#include "helpers.hpp"

#include "distress/io.hpp"
#include "distress/sentiment_scoring.hpp"

#include <atomic>
#include <cmath>

using namespace distress;

namespace {

// Returns a fixed row per sentence and counts the sentences it was asked to score.
class FakeBackend final : public ScoringBackend {
public:
    explicit FakeBackend(RawProbs row, std::size_t max_tokens = 512) : row_(std::move(row)), max_tokens_(max_tokens) {}

    std::string name() const override { return "fake"; }
    std::string model_version() const override { return "v1"; }
    std::size_t max_sentence_tokens() const override { return max_tokens_; }
    std::vector<RawProbs> score_batch(std::span<const std::string> sentences) const override
    {
        calls += sentences.size();
        for (const auto& s : sentences) {
            seen.push_back(s);
        }
        return std::vector<RawProbs>(sentences.size(), row_);
    }

    mutable std::size_t calls = 0;
    mutable std::vector<std::string> seen;

private:
    RawProbs row_;
    std::size_t max_tokens_;
};

MdnaDocument make_doc(const std::string& id, std::vector<std::string> texts)
{
    MdnaDocument d;
    d.filing_id = id;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        d.sentences.push_back({id, i, texts[i], 0});
    }
    return d;
}

}  // namespace

TEST_CASE("excerpt class vector normalizes to the expected shares")
{
    const std::vector<SentenceScore> scores = {{"A", 0, {0.6365, 0.9161, 0.4704}}, {"A", 1, {0.4, 1.3, 0.7}}};
    const auto doc = aggregate_document(scores);
    CHECK(std::abs(doc.pos - 0.2343) <= 1e-3);
    CHECK(std::abs(doc.neg - 0.5010) <= 2e-3);
    CHECK(doc.pos + doc.neg + doc.neu == doctest::Approx(1.0));
    CHECK(doc.n_sentences == 2);
}

TEST_CASE("aggregation errors")
{
    CHECK_ERRC(aggregate_document({}), Errc::EmptyScoreList);
    const std::vector<SentenceScore> mixed = {{"A", 0, {1, 0, 0}}, {"B", 0, {0, 1, 0}}};
    CHECK_ERRC(aggregate_document(mixed), Errc::MixedDocuments);
}

TEST_CASE("probability rows are validated and renormalized")
{
    const std::vector<double> ok = {0.2, 0.3, 0.5};
    const auto p = validate_probabilities(ok);
    CHECK(p[2] == doctest::Approx(0.5));
    const std::vector<double> two = {0.5, 0.5};
    CHECK_ERRC(validate_probabilities(two), Errc::BackendRejected);
    const std::vector<double> off = {0.5, 0.5, 0.5};
    CHECK_ERRC(validate_probabilities(off), Errc::BackendRejected);
    const std::vector<double> neg = {1.2, -0.2, 0.0};
    CHECK_ERRC(validate_probabilities(neg), Errc::BackendRejected);
    const std::vector<double> nan = {std::nan(""), 0.5, 0.5};
    CHECK_ERRC(validate_probabilities(nan), Errc::BackendRejected);
    CHECK(argmax_class({0.4, 0.4, 0.2}) == 0);
    CHECK(argmax_class({0.1, 0.2, 0.7}) == 2);
}

TEST_CASE("truncate_tokens keeps the first whitespace tokens")
{
    CHECK(truncate_tokens("a b  c d", 2) == "a b");
    CHECK(truncate_tokens("  a b", 1) == "  a");
    CHECK(truncate_tokens("a b", 5) == "a b");
    CHECK(truncate_tokens("a b", 0).empty());
}

TEST_CASE("score_corpus truncates, aligns with documents and rejects bad rows")
{
    const std::vector<MdnaDocument> docs = {make_doc("A", {"one two three four", "x"}), make_doc("B", {"y z"})};
    FakeBackend backend({0.1, 0.2, 0.7}, 2);
    const auto scores = score_corpus(docs, backend);
    REQUIRE(scores.size() == 2);
    CHECK(scores[0].size() == 2);
    CHECK(scores[1][0].doc_id == "B");
    CHECK(scores[0][1].sent_index == 1);
    CHECK(backend.seen[0] == "one two");

    FakeBackend broken({0.5, 0.5});
    CHECK_ERRC(score_corpus(docs, broken), Errc::BackendRejected);
    CHECK_ERRC(score_document(make_doc("E", {}), backend), Errc::EmptyDocument);
}

TEST_CASE("score cache avoids rescoring and survives a torn line")
{
    const auto dir = testing::scratch("cache");
    const std::vector<MdnaDocument> docs = {make_doc("A", {"s1", "s2", "s3"})};
    FakeBackend backend({0.25, 0.25, 0.5});
    {
        ScoreCache cache(dir / "c.jsonl");
        static_cast<void>(score_corpus(docs, backend, &cache));
        CHECK(backend.calls == 3);
        cache.flush();
    }
    auto text = io::read_text(dir / "c.jsonl");
    io::write_text(dir / "c.jsonl", text + "{\"doc_id\": \"A\", \"sent_");
    ScoreCache cache(dir / "c.jsonl");
    CHECK(cache.size() == 3);
    const auto again = score_corpus(docs, backend, &cache);
    CHECK(backend.calls == 3);
    CHECK(cache.hits() == 3);
    CHECK(again[0][2].p[2] == 0.5);
    CHECK_FALSE(cache.find("fake", "v2", "A", 0).has_value());
    CHECK(cache.misses() == 1);
}
