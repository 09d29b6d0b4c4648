#include "helpers.hpp"

#include "distress/filing_corpus.hpp"
#include "distress/io.hpp"

using namespace distress;

namespace {

RawFiling filing(std::string body)
{
    RawFiling f;
    f.filing_id = "F1-2019";
    f.firm_id = "F1";
    f.fiscal_year = 2019;
    f.filing_date = parse_date("2020-03-15");
    f.body = std::move(body);
    return f;
}

}  // namespace

TEST_CASE("tokenize_words keeps maximal alphabetic runs uppercased")
{
    CHECK(tokenize_words("Net sales rose 12% to $4.5 million; don't panic.") ==
          std::vector<std::string>{"NET", "SALES", "ROSE", "TO", "MILLION", "DON", "T", "PANIC"});
    CHECK(count_words("") == 0);
    CHECK(count_words("1,234 (5.0)") == 0);
    const auto excerpt = io::read_text(testing::data_dir() / "fixtures" / "excerpt.txt");
    CHECK(count_words(excerpt) == 81);
}

TEST_CASE("segment_sentences respects abbreviations, initials and lowercase continuations")
{
    const auto s = segment_sentences(
        "Revenue grew at XYZ Corp. in the U.S. market. J. Smith joined in Jan. 2019! Was it enough? "
        "Sales fell. then recovered. Final line",
        "doc");
    REQUIRE(s.size() == 5);
    CHECK(s[0].text == "Revenue grew at XYZ Corp. in the U.S. market.");
    CHECK(s[1].text == "J. Smith joined in Jan. 2019!");
    CHECK(s[2].text == "Was it enough?");
    CHECK(s[3].text == "Sales fell. then recovered.");
    CHECK(s[4].text == "Final line");
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(s[i].index == i);
        CHECK(s[i].doc_id == "doc");
        CHECK(s[i].word_count == count_words(s[i].text));
    }
    CHECK(segment_sentences("   ").empty());
    const AbbreviationList none;
    CHECK(segment_sentences("Made by Acme Inc. The end.", "d", none).size() == 2);
    CHECK(segment_sentences("Made by Acme Inc. The end.", "d").size() == 1);
}

TEST_CASE("abbreviation list loads from a file")
{
    const auto list = AbbreviationList::load(testing::data_dir() / "abbreviations.txt");
    CHECK(list.size() == AbbreviationList::defaults().size());
    CHECK(list.contains("inc."));
    CHECK(list.contains("U.S."));
    CHECK_FALSE(list.contains("Inc"));
    CHECK_ERRC(AbbreviationList::load("/nonexistent/abbrev.txt"), Errc::IoFailure);
}

TEST_CASE("cleaning helpers")
{
    using namespace cleaning;
    const auto text = strip_html(
        "<html><head><style>p {color: red}</style><script>var x = 1;</script></head><body>"
        "<!-- note --><p>Alpha &amp; beta&nbsp;gamma &#8212; &#x41;</p><table><tr><td>1</td></tr></table>"
        "<div>Next</div></body></html>");
    CHECK(text.find("color") == std::string::npos);
    CHECK(text.find("var x") == std::string::npos);
    CHECK(text.find("note") == std::string::npos);
    CHECK(text.find("Alpha & beta") != std::string::npos);
    CHECK(text.find("gamma - A") != std::string::npos);
    CHECK(text.find("Next") != std::string::npos);
    CHECK(text.find('<') == std::string::npos);

    CHECK(is_page_number_line("  12 "));
    CHECK(is_page_number_line("Page 7"));
    CHECK_FALSE(is_page_number_line("12 months"));
    CHECK(count_numeric_columns("Revenue    1,234    (56.0)   12%") == 3);
    CHECK(count_numeric_columns("Revenue\t10\t20") == 2);
    CHECK(count_numeric_columns("We sold 1,234 units") == 0);

    const auto cleaned = remove_table_blocks("Intro line.\n\nSales   1,000   2,000   3,000\nCost   500   600   700\n\nOutro.");
    CHECK(cleaned.find("1,000") == std::string::npos);
    CHECK(cleaned.find("Intro") != std::string::npos);
    CHECK(cleaned.find("Outro") != std::string::npos);

    CHECK(normalize_paragraphs("a  b\nc\n\n\n14\n\nd") == "a b c\n\nd");
}

TEST_CASE("extract_mdna takes the last heading and stops at the next item")
{
    const std::string body =
        "TABLE OF CONTENTS\nItem 7. Management's Discussion and Analysis of Financial Condition and Results of "
        "Operations 14\nItem 8. Financial Statements 20\n\nItem 1. Business\nWe make things.\n"
        "ITEM 7 - MANAGEMENT'S DISCUSSION AND ANALYSIS OF FINANCIAL CONDITION AND RESULTS OF OPERATIONS\n"
        "Revenue grew strongly.\n\n  Revenue   1,000   2,000   3,000\n  Costs   400   500   600\n\n15\n\n"
        "Margins held at Acme Inc. levels. Item 7A. Quantitative disclosures.\nItem 8. Financial Statements\nNumbers.\n";
    const auto doc = extract_mdna(filing(body));
    CHECK(doc.firm_id == "F1");
    CHECK(doc.fiscal_year == 2019);
    REQUIRE(doc.sentences.size() == 2);
    CHECK(doc.sentences[0].text == "Revenue grew strongly.");
    CHECK(doc.sentences[1].text == "Margins held at Acme Inc. levels.");
    CHECK(doc.text.find("1,000") == std::string::npos);
    CHECK(doc.text.find("15") == std::string::npos);
}

TEST_CASE("extract_mdna accepts Item 6 headings, HTML and short titles")
{
    const auto doc = extract_mdna(filing(
        "<html><body><p>Item 6. Management's Discussion and Analysis</p><p>Losses widened in 1998.</p>"
        "<p>Item 7. Financial Statements</p></body></html>"));
    REQUIRE(doc.sentences.size() == 1);
    CHECK(doc.sentences[0].text == "Losses widened in 1998.");
    const auto mdna = extract_mdna(filing("Item 7: MD&A\nCash was tight.\nItem 8. Statements\n"));
    CHECK(mdna.sentences.size() == 1);
}

TEST_CASE("extract_mdna failure modes")
{
    CHECK_ERRC(extract_mdna(filing("Item 1. Business\nNothing here.\n")), Errc::NoMdnaFound);
    CHECK_ERRC(extract_mdna(filing("Item 7. Management's Discussion and Analysis\n\n12\n\nItem 8. Data\n")),
               Errc::EmptySection);
    CHECK_ERRC(extract_mdna(filing("")), Errc::InvalidArgument);

    std::vector<RawFiling> filings = {filing("Item 7. MD&A\nFine.\nItem 8. x\n"), filing("no heading")};
    filings[1].filing_id = "bad";
    const auto result = extract_corpus(filings);
    CHECK(result.documents.size() == 1);
    REQUIRE(result.failures.size() == 1);
    CHECK(result.failures[0].filing_id == "bad");
    CHECK(result.failures[0].code == Errc::NoMdnaFound);
}

TEST_CASE("bundled excerpt fixture extracts one document of two sentences")
{
    const auto filings = load_filing_index(testing::data_dir() / "fixtures" / "index.csv");
    REQUIRE(filings.size() == 1);
    CHECK(filings[0].form_type == FormType::Form10K);
    const auto doc = extract_mdna(filings[0]);
    REQUIRE(doc.sentences.size() == 2);
    CHECK(doc.sentences[1].text.rfind("However, there can be no assurance", 0) == 0);
    CHECK(count_words(doc.text) == 81);
}

TEST_CASE("form types and document JSONL round-trip")
{
    CHECK(parse_form_type("10-K405") == FormType::Form10K405);
    CHECK(parse_form_type("10-KSB") == FormType::Form10KSB);
    CHECK(parse_form_type("10-KSB40") == FormType::Form10KSB40);
    CHECK(parse_form_type("8-K") == FormType::Other);
    CHECK(to_string(FormType::Form10K) == "10-K");

    const auto dir = testing::scratch("docs");
    const auto doc = extract_mdna(filing("Item 7. MD&A\nOne. Two \"quoted\".\nItem 8. x\n"));
    write_documents_jsonl(dir / "d.jsonl", std::vector<MdnaDocument>{doc});
    const auto back = read_documents_jsonl(dir / "d.jsonl");
    REQUIRE(back.size() == 1);
    CHECK(back[0].filing_id == doc.filing_id);
    CHECK(back[0].filing_date == doc.filing_date);
    CHECK(back[0].text == doc.text);
    REQUIRE(back[0].sentences.size() == 2);
    CHECK(back[0].sentences[1].text == "Two \"quoted\".");
}
