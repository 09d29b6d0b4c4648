#include "helpers.hpp"

#include "distress/domain_adaptation.hpp"
#include "distress/io.hpp"
#include "distress/stub_backend.hpp"

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

using namespace distress;

namespace {

MdnaDocument doc(const std::string& id, std::vector<std::string> texts)
{
    MdnaDocument d;
    d.filing_id = id;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        d.sentences.push_back({id, i, texts[i], 0});
    }
    return d;
}

}  // namespace

TEST_CASE("self entropy reference values")
{
    CHECK(self_entropy(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(self_entropy(std::vector<double>{1.0, 0.0, 0.0}) == 0.0);
    CHECK(std::abs(self_entropy(std::vector<double>{0.9, 0.05, 0.05}) - 0.3590) <= 1e-4);
    CHECK_ERRC(self_entropy(std::vector<double>{0.5, 0.6, -0.1}), Errc::InvalidDistribution);
    CHECK_ERRC(self_entropy(std::vector<double>{0.5, 0.2, 0.2}), Errc::InvalidDistribution);
}

TEST_CASE("filter keeps exactly the labels at or below the threshold")
{
    std::mt19937_64 rng(3);
    std::exponential_distribution<double> e(1.0);
    std::vector<PseudoLabel> labels;
    for (int i = 0; i < 300; ++i) {
        PseudoLabel l;
        l.sentence.text = std::to_string(i);
        const double a = e(rng), b = e(rng), c = e(rng);
        l.self_entropy = self_entropy(std::vector<double>{a / (a + b + c), b / (a + b + c), c / (a + b + c)});
        labels.push_back(l);
    }
    std::size_t previous = 0;
    for (double t : {0.1, 0.2, 0.5, 0.9, 1.0}) {
        const auto r = filter_reliable(labels, t);
        CHECK(r.retained.size() >= previous);
        previous = r.retained.size();
        for (const auto& l : r.retained) {
            CHECK(l.self_entropy <= t);
        }
        CHECK(r.retained_fraction == doctest::Approx(static_cast<double>(r.retained.size()) / 300.0));
    }
    CHECK(filter_reliable(labels, 1.0).retained.size() == 300);
    CHECK_ERRC(filter_reliable(labels, 0.0), Errc::InvalidArgument);
    CHECK_ERRC(filter_reliable(labels, 1.5), Errc::InvalidArgument);
}

TEST_CASE("document sampling is seeded and without replacement")
{
    const auto a = sample_documents(50, 20, 9);
    CHECK(a == sample_documents(50, 20, 9));
    CHECK(a != sample_documents(50, 20, 10));
    CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 20);
    AdaptationConfig cfg;
    cfg.n_documents = 60;
    CHECK_ERRC(cfg.validate(50), Errc::CorpusTooSmall);
    cfg.n_documents = 10;
    cfg.entropy_threshold = 0.0;
    CHECK_ERRC(cfg.validate(50), Errc::InvalidArgument);
}

TEST_CASE("adaptation round writes a shuffled training set and manifest")
{
    const auto lex = Lexicon::from_words({"STRONG", "GAINS", "IMPROVED", "EXCELLENT"}, {"LOSS", "WEAK", "DECLINE"});
    const auto backend = StubBackend::lexicon(lex, 1.0);
    std::vector<MdnaDocument> corpus;
    for (int i = 0; i < 12; ++i) {
        corpus.push_back(doc("D" + std::to_string(i),
                             {"Strong gains improved excellent results.", "Loss weak decline loss weak.",
                              "The company operates stores."}));
    }
    AdaptationConfig cfg;
    cfg.n_documents = 8;
    cfg.entropy_threshold = 0.2;
    cfg.rng_seed = 5;
    const auto dir = testing::scratch("adapt");
    const auto out = prepare_adaptation_round(corpus, backend, cfg, dir / "train.jsonl");
    CHECK(out.n_documents == 8);
    CHECK(out.n_sentences == 24);
    CHECK(out.n_retained == 16);
    CHECK(out.summary.class_counts[0] == 8);
    CHECK(out.summary.class_counts[1] == 8);
    CHECK(out.summary.class_counts[2] == 0);
    const auto examples = read_training_set(dir / "train.jsonl");
    REQUIRE(examples.size() == 16);
    const auto manifest = nlohmann::json::parse(io::read_text(out.manifest));
    CHECK(manifest.at("n_retained") == 16);

    const auto first = io::read_text(dir / "train.jsonl");
    static_cast<void>(prepare_adaptation_round(corpus, backend, cfg, dir / "train.jsonl"));
    CHECK(io::read_text(dir / "train.jsonl") == first);

    CHECK_ERRC(emit_training_set({}, dir / "empty.jsonl", 1), Errc::EmptyTrainingSet);
}
