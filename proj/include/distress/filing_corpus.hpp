#pragma once

#include "distress/calendar.hpp"
#include "distress/errors.hpp"

#include <cstddef>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace distress {

enum class FormType { Form10K, Form10KSB, Form10K405, Form10KSB40, Other };

std::string_view to_string(FormType form) noexcept;
FormType parse_form_type(std::string_view text) noexcept;

struct RawFiling {
    std::string filing_id;
    std::string firm_id;
    int fiscal_year = 0;
    Date filing_date{};
    FormType form_type = FormType::Form10K;
    std::string body;
};

struct Sentence {
    std::string doc_id;
    std::size_t index = 0;
    std::string text;
    std::size_t word_count = 0;
};

struct MdnaDocument {
    std::string filing_id;
    std::string firm_id;
    int fiscal_year = 0;
    Date filing_date{};
    std::string text;
    std::vector<Sentence> sentences;
};

// Tokens that end in a period without ending a sentence ("Inc.", "U.S.").
class AbbreviationList {
public:
    AbbreviationList() = default;
    explicit AbbreviationList(std::set<std::string> entries);

    // One abbreviation per line, '#' comments allowed.
    static AbbreviationList load(const std::filesystem::path& path);

    // Mirrors data/abbreviations.txt.
    static const AbbreviationList& defaults();

    // Case-insensitive match on the full token, trailing period included.
    [[nodiscard]] bool contains(std::string_view token) const;
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

private:
    std::set<std::string> entries_;  // lowercased
};

// Maximal runs of ASCII letters, uppercased. Digits and punctuation never form tokens.
std::vector<std::string> tokenize_words(std::string_view text);
std::size_t count_words(std::string_view text);

// Splits on terminal punctuation (. ! ?) followed by whitespace and a character that is not a
// lowercase letter, unless the token carrying the period is a guarded abbreviation or an initial.
// Each sentence is a trimmed substring of the input, in order.
std::vector<Sentence> segment_sentences(std::string_view text, std::string_view doc_id = {},
                                        const AbbreviationList& abbreviations = AbbreviationList::defaults());

// Markup cleaning pieces, exposed for testing.
namespace cleaning {

// Drops comments, script/style/table elements and tags; block tags become line breaks; entities decoded.
std::string strip_html(std::string_view markup);

// Trimmed content is only digits, or "Page N".
bool is_page_number_line(std::string_view line);

// Fields separated by tabs, pipes or runs of 2+ spaces that parse as numbers ("1,234", "(5.0)", "12%").
std::size_t count_numeric_columns(std::string_view line);

// Removes blocks of consecutive non-blank lines in which at least half the lines carry
// three or more numeric column fields.
std::string remove_table_blocks(std::string_view text);

// Drops page-number lines, collapses whitespace inside paragraphs, separates paragraphs by a blank line.
std::string normalize_paragraphs(std::string_view text);

}  // namespace cleaning

// Locates the last line-anchored "Item 6"/"Item 7" heading carrying an MD&A title and returns the
// cleaned text up to the next item heading. Throws NoMdnaFound or EmptySection.
MdnaDocument extract_mdna(const RawFiling& filing,
                          const AbbreviationList& abbreviations = AbbreviationList::defaults());

struct ExtractionFailure {
    std::string filing_id;
    Errc code;
    std::string message;
};

struct ExtractionResult {
    std::vector<MdnaDocument> documents;
    std::vector<ExtractionFailure> failures;
};

ExtractionResult extract_corpus(std::span<const RawFiling> filings,
                                const AbbreviationList& abbreviations = AbbreviationList::defaults());

// Sidecar CSV index: filing_id, firm_id, fiscal_year, filing_date, form_type, path (relative to the index).
std::vector<RawFiling> load_filing_index(const std::filesystem::path& index_csv);

void write_documents_jsonl(const std::filesystem::path& path, std::span<const MdnaDocument> documents);
std::vector<MdnaDocument> read_documents_jsonl(const std::filesystem::path& path);

}  // namespace distress
