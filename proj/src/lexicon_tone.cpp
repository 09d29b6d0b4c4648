#include "distress/lexicon_tone.hpp"

#include "distress/errors.hpp"
#include "distress/io.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <fmt/format.h>

namespace distress {

namespace {

std::set<std::string> normalize(const std::set<std::string>& words, std::string_view list_name)
{
    std::set<std::string> out;
    for (const auto& w : words) {
        if (w.empty() || !std::all_of(w.begin(), w.end(), [](unsigned char c) { return std::isalpha(c) != 0; })) {
            throw Error(Errc::MalformedLexicon, fmt::format("{} list entry '{}' is not purely alphabetic", list_name, w));
        }
        std::string upper(w);
        std::transform(upper.begin(), upper.end(), upper.begin(),
                       [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
        out.insert(std::move(upper));
    }
    return out;
}

}  // namespace

Lexicon Lexicon::from_words(const std::set<std::string>& positive, const std::set<std::string>& negative)
{
    Lexicon lex{normalize(positive, "positive"), normalize(negative, "negative")};
    for (const auto& w : lex.positive) {
        if (lex.negative.count(w) > 0) {
            throw Error(Errc::OverlappingLists, fmt::format("'{}' appears in both word lists", w));
        }
    }
    return lex;
}

std::set<std::string> load_word_list(const std::filesystem::path& path)
{
    std::istringstream in(io::read_text(path));
    std::set<std::string> words;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        auto last = line.find_last_not_of(" \t\r");
        auto word = line.substr(first, last - first + 1);
        if (!std::all_of(word.begin(), word.end(), [](unsigned char c) { return std::isalpha(c) != 0; })) {
            throw Error(Errc::MalformedLexicon,
                        fmt::format("{}:{}: entry '{}' is not purely alphabetic", path.string(), line_no, word));
        }
        std::transform(word.begin(), word.end(), word.begin(),
                       [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
        words.insert(std::move(word));
    }
    return words;
}

Lexicon load_lexicon(const std::filesystem::path& positive_path, const std::filesystem::path& negative_path)
{
    return Lexicon::from_words(load_word_list(positive_path), load_word_list(negative_path));
}

DictTone compute_dict_tone(std::string_view text, const Lexicon& lexicon)
{
    DictTone tone;
    for (const auto& token : tokenize_words(text)) {
        ++tone.n_words;
        if (lexicon.is_positive(token)) {
            ++tone.n_pos;
        } else if (lexicon.is_negative(token)) {
            ++tone.n_neg;
        }
    }
    if (tone.n_words == 0) {
        throw Error(Errc::EmptyDocument, "document has no word tokens");
    }
    const auto n = static_cast<double>(tone.n_words);
    tone.dict_pos = static_cast<double>(tone.n_pos) / n;
    tone.dict_neg = static_cast<double>(tone.n_neg) / n;
    return tone;
}

DictTone compute_dict_tone(const MdnaDocument& doc, const Lexicon& lexicon)
{
    return compute_dict_tone(doc.text, lexicon);
}

}  // namespace distress
