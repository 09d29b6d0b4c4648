#include "helpers.hpp"

#include "distress/domain_adaptation.hpp"
#include "distress/stub_backend.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

using namespace distress;

namespace {

Lexicon lexicon() { return Lexicon::from_words({"STRONG", "GAINS", "IMPROVED", "EXCELLENT", "SUCCESSFUL"}, {"LOSS", "WEAK"}); }

}  // namespace

TEST_CASE("stub score is a softmax over lexicon hits and the neutral prior")
{
    const auto lex = lexicon();
    const auto p = stub_score("Strong gains offset a loss.", lex, 1.0);
    const double z = std::exp(2.0) + std::exp(1.0) + std::exp(0.5);
    CHECK(p[0] == doctest::Approx(std::exp(2.0) / z));
    CHECK(p[1] == doctest::Approx(std::exp(1.0) / z));
    CHECK(p[2] == doctest::Approx(std::exp(0.5) / z));
    const auto flat = stub_score("Nothing to see.", lex, 1.0);
    CHECK(argmax_class(flat) == 2);
    CHECK_ERRC(stub_score("x", lex, 0.0), Errc::InvalidArgument);
}

TEST_CASE("confidence depends on the hit margin")
{
    const auto lex = lexicon();
    const auto four = stub_score("strong gains improved excellent", lex, 1.0);
    CHECK(self_entropy(four) < 0.2);
    const auto three = stub_score("strong gains improved", lex, 1.0);
    CHECK(self_entropy(three) > 0.2);
    const auto mixed = stub_score("strong gains improved excellent loss", lex, 1.0);
    CHECK(self_entropy(mixed) > 0.2);
    const auto cooler = stub_score("strong gains improved", lex, 0.5);
    CHECK(self_entropy(cooler) < self_entropy(three));
}

TEST_CASE("token weight model reproduces the lexicon stub and serializes")
{
    const auto lex = lexicon();
    const auto model = TokenWeightModel::from_lexicon(lex, 1.5);
    for (const char* s : {"Strong gains.", "Weak loss and loss.", "Neutral words only.", "strong weak"}) {
        const auto a = model.predict(s);
        const auto b = stub_score(s, lex, 1.5);
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-12));
        }
    }
    const auto back = TokenWeightModel::from_json(model.to_json());
    CHECK(back.fingerprint() == model.fingerprint());
    CHECK(back.temperature() == 1.5);
}

TEST_CASE("stub backend versions follow the parameters")
{
    const auto a = StubBackend::lexicon(lexicon(), 1.0);
    const auto b = StubBackend::lexicon(lexicon(), 1.0);
    const auto c = StubBackend::lexicon(lexicon(), 2.0);
    CHECK(a.model_version() == b.model_version());
    CHECK(a.model_version() != c.model_version());
    const std::vector<std::string> batch = {"strong", "loss", "plain"};
    const auto rows = a.score_batch(batch);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].size() == 3);
    CHECK(argmax_class(validate_probabilities(rows[1])) == 1);
}

TEST_CASE("fine-tuning moves unseen domain words toward their pseudo-label")
{
    const auto lex = lexicon();
    const auto base = TokenWeightModel::from_lexicon(lex, 1.0);
    std::vector<TrainingExample> examples;
    for (int i = 0; i < 64; ++i) {
        examples.push_back({"loss weak loss weak covenant waiver", 1});
        examples.push_back({"strong gains improved excellent", 0});
    }
    FineTuneOptions opts;
    opts.epochs = 3;
    opts.batch_size = 16;
    opts.seed = 11;
    const auto tuned = fine_tune(base, examples, opts);
    CHECK(tuned.epoch_mean_losses.size() == 3);
    CHECK(tuned.step_losses.size() == 3 * 8);
    CHECK(tuned.epoch_mean_losses.back() <= tuned.epoch_mean_losses.front());
    const auto& w = tuned.model.weights().at("COVENANT");
    CHECK(w[1] > w[0]);
    CHECK(tuned.model.predict("covenant waiver strong")[1] > base.predict("covenant waiver strong")[1]);

    const auto again = fine_tune(base, examples, opts);
    CHECK(again.model.fingerprint() == tuned.model.fingerprint());

    CHECK_ERRC(fine_tune(base, {}, opts), Errc::EmptyTrainingSet);
    const std::vector<TrainingExample> bad = {{"x", 3}};
    CHECK_ERRC(fine_tune(base, bad, opts), Errc::InvalidArgument);
}
