#pragma once

#include "distress/filing_corpus.hpp"

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>

namespace distress {

// Positive and negative word lists; entries are uppercase and purely alphabetic, lists disjoint.
struct Lexicon {
    std::set<std::string> positive;
    std::set<std::string> negative;

    // Validates and uppercases. Throws MalformedLexicon or OverlappingLists.
    static Lexicon from_words(const std::set<std::string>& positive, const std::set<std::string>& negative);

    [[nodiscard]] bool is_positive(const std::string& token) const { return positive.count(token) > 0; }
    [[nodiscard]] bool is_negative(const std::string& token) const { return negative.count(token) > 0; }
};

// One word per line, '#' comments and blank lines skipped. Throws MalformedLexicon.
std::set<std::string> load_word_list(const std::filesystem::path& path);

Lexicon load_lexicon(const std::filesystem::path& positive_path, const std::filesystem::path& negative_path);

struct DictTone {
    double dict_pos = 0.0;
    double dict_neg = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    std::size_t n_words = 0;
};

// Exact uppercase token matches scaled by the total word count. Throws EmptyDocument.
DictTone compute_dict_tone(std::string_view text, const Lexicon& lexicon);
DictTone compute_dict_tone(const MdnaDocument& doc, const Lexicon& lexicon);

}  // namespace distress
