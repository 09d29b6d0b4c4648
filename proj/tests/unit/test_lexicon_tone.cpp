#include "helpers.hpp"

#include "distress/io.hpp"
#include "distress/lexicon_tone.hpp"

using namespace distress;

namespace {

Lexicon sample_lexicon()
{
    return load_lexicon(testing::data_dir() / "lexicon" / "positive.txt",
                        testing::data_dir() / "lexicon" / "negative.txt");
}

}  // namespace

TEST_CASE("bundled excerpt has four positive and one negative word")
{
    const auto lex = sample_lexicon();
    const auto excerpt = io::read_text(testing::data_dir() / "fixtures" / "excerpt.txt");
    const auto tone = compute_dict_tone(excerpt, lex);
    CHECK(tone.n_pos == 4);
    CHECK(tone.n_neg == 1);
    CHECK(tone.n_words == 81);
    CHECK(tone.dict_pos == doctest::Approx(4.0 / 81.0).epsilon(1e-12));
    CHECK(tone.dict_neg == doctest::Approx(1.0 / 81.0).epsilon(1e-12));
}

TEST_CASE("tone counts exact uppercase matches only")
{
    const auto lex = Lexicon::from_words({"gain"}, {"loss"});
    CHECK(lex.is_positive("GAIN"));
    const auto t = compute_dict_tone("Gains and a gain offset the LOSS, loss-making units.", lex);
    CHECK(t.n_pos == 1);
    CHECK(t.n_neg == 2);
    CHECK(t.n_words == 10);
    CHECK_ERRC(compute_dict_tone("123 456", lex), Errc::EmptyDocument);
}

TEST_CASE("adding a positive word raises n_pos and never lowers dict_pos")
{
    const auto lex = sample_lexicon();
    std::string text = "Results were mixed across segments this year";
    auto before = compute_dict_tone(text, lex);
    for (const char* word : {" strong", " improved", " gains"}) {
        text += word;
        const auto after = compute_dict_tone(text, lex);
        CHECK(after.n_pos == before.n_pos + 1);
        CHECK(after.dict_pos >= before.dict_pos);
        before = after;
    }
}

TEST_CASE("lexicon validation")
{
    CHECK_ERRC(Lexicon::from_words({"good"}, {"GOOD"}), Errc::OverlappingLists);
    CHECK_ERRC(Lexicon::from_words({"well-known"}, {}), Errc::MalformedLexicon);
    CHECK_ERRC(Lexicon::from_words({""}, {}), Errc::MalformedLexicon);
    const auto dir = testing::scratch("lex");
    io::write_text(dir / "p.txt", "# comment\n\nStrong\n  improved \n");
    io::write_text(dir / "n.txt", "loss\nbad word\n");
    CHECK(load_word_list(dir / "p.txt") == std::set<std::string>{"STRONG", "IMPROVED"});
    CHECK_ERRC(load_lexicon(dir / "p.txt", dir / "n.txt"), Errc::MalformedLexicon);
    CHECK_ERRC(load_word_list(dir / "absent.txt"), Errc::IoFailure);
}
