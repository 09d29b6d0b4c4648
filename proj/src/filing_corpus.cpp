#include "distress/filing_corpus.hpp"

#include "distress/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <boost/regex.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace distress {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }

std::string to_lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && is_space(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && is_space(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_lines(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

void append_utf8(std::string& out, unsigned long cp)
{
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x110000) {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

std::string decode_entities(std::string_view text)
{
    static const std::pair<std::string_view, std::string_view> named[] = {
        {"nbsp", " "},  {"amp", "&"},   {"lt", "<"},     {"gt", ">"},     {"quot", "\""},
        {"apos", "'"},  {"rsquo", "'"}, {"lsquo", "'"},  {"rdquo", "\""}, {"ldquo", "\""},
        {"mdash", "-"}, {"ndash", "-"}, {"hellip", "..."}, {"bull", " "}, {"middot", " "},
    };
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '&') {
            out += text[i];
            continue;
        }
        const auto semi = text.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out += '&';
            continue;
        }
        const auto name = text.substr(i + 1, semi - i - 1);
        bool decoded = false;
        if (!name.empty() && name[0] == '#') {
            unsigned long cp = 0;
            const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
            const auto digits = name.substr(hex ? 2 : 1);
            if (!digits.empty()) {
                try {
                    std::size_t used = 0;
                    cp = std::stoul(std::string(digits), &used, hex ? 16 : 10);
                    decoded = used == digits.size();
                } catch (const std::exception&) {
                    decoded = false;
                }
            }
            if (decoded) {
                if (cp == 160) {
                    out += ' ';
                } else if (cp == 8211 || cp == 8212) {
                    out += '-';
                } else if (cp == 8216 || cp == 8217) {
                    out += '\'';
                } else if (cp == 8220 || cp == 8221) {
                    out += '"';
                } else {
                    append_utf8(out, cp);
                }
            }
        } else {
            const auto lowered = to_lower(name);
            for (const auto& [entity, replacement] : named) {
                if (lowered == entity) {
                    out += replacement;
                    decoded = true;
                    break;
                }
            }
        }
        if (decoded) {
            i = semi;
        } else {
            out += '&';
        }
    }
    return out;
}

const std::unordered_set<std::string>& block_tags()
{
    static const std::unordered_set<std::string> tags = {
        "br", "p", "div", "tr", "li", "ul", "ol", "h1", "h2", "h3", "h4", "h5", "h6",
        "hr", "pre", "blockquote", "html", "body", "head", "title", "center", "font-block",
        "document", "text", "page", "type", "sequence", "filename", "description"};
    return tags;
}

bool is_numeric_field(std::string_view field)
{
    field = trim(field);
    while (!field.empty() && (field.front() == '$' || field.front() == '(' || field.front() == '-' ||
                              field.front() == '+')) {
        field.remove_prefix(1);
        field = trim(field);
    }
    while (!field.empty() && (field.back() == ')' || field.back() == '%')) {
        field.remove_suffix(1);
    }
    if (field.empty()) {
        return false;
    }
    bool digit = false;
    for (char c : field) {
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digit = true;
        } else if (c != ',' && c != '.') {
            return false;
        }
    }
    return digit;
}

// Optional punctuation between an item number and its title: ". : -", en/em dash, ellipsis.
constexpr const char* kHeadingPunct = R"((?:[\s.:\-]|\xE2\x80[\x93\x94\xA6])*)";

const boost::regex& mdna_heading_regex()
{
    static const boost::regex re(
        std::string(R"(^[ \t]*item[ \t]+([67])(?![0-9a-z]))") + kHeadingPunct +
            R"((?:management[^a-z\n]{0,4}s?[ \t]+discussion(?:[ \t]+and[ \t]+analysis)?)"
            R"((?:[ \t]+of[ \t]+financial[ \t]+condition[ \t]+and[ \t]+results[ \t]+of[ \t]+operations)?)"
            R"(|md&a))" +
            kHeadingPunct,
        boost::regex::perl | boost::regex::icase);
    return re;
}

const boost::regex& next_item_regex()
{
    static const boost::regex re(
        R"((?:^[ \t]*|(?<=[.!?:])[ \t]+)(?-i:I)(?i:tem)[ \t]+\d{1,2}[A-Za-z]?(?![0-9A-Za-z])[ \t]*(?:[.:\-]|\xE2\x80[\x93\x94]))",
        boost::regex::perl);
    return re;
}

}  // namespace

std::string_view to_string(FormType form) noexcept
{
    switch (form) {
        case FormType::Form10K: return "10-K";
        case FormType::Form10KSB: return "10-KSB";
        case FormType::Form10K405: return "10-K405";
        case FormType::Form10KSB40: return "10KSB40";
        case FormType::Other: return "OTHER";
    }
    return "OTHER";
}

FormType parse_form_type(std::string_view text) noexcept
{
    const auto t = trim(text);
    if (t == "10-K") return FormType::Form10K;
    if (t == "10-KSB") return FormType::Form10KSB;
    if (t == "10-K405") return FormType::Form10K405;
    if (t == "10KSB40" || t == "10-KSB40") return FormType::Form10KSB40;
    return FormType::Other;
}

AbbreviationList::AbbreviationList(std::set<std::string> entries)
{
    for (const auto& e : entries) {
        entries_.insert(to_lower(trim(e)));
    }
}

AbbreviationList AbbreviationList::load(const std::filesystem::path& path)
{
    std::istringstream in(io::read_text(path));
    std::set<std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        entries.emplace(t);
    }
    return AbbreviationList(std::move(entries));
}

const AbbreviationList& AbbreviationList::defaults()
{
    static const AbbreviationList list({
        "Inc.",  "Corp.", "Co.",   "Ltd.",  "No.",   "Nos.",  "U.S.",  "U.K.",  "Mr.",   "Mrs.",
        "Ms.",   "Dr.",   "Jr.",   "Sr.",   "St.",   "vs.",   "e.g.",  "i.e.",  "approx.", "Jan.",
        "Feb.",  "Mar.",  "Apr.",  "Jun.",  "Jul.",  "Aug.",  "Sep.",  "Sept.", "Oct.",  "Nov.",
        "Dec.",  "L.P.",  "L.L.C.", "N.A.", "S.A.",  "Fig.",  "Vol.",  "Dept.", "Ave.",  "Bros.",
    });
    return list;
}

bool AbbreviationList::contains(std::string_view token) const
{
    return entries_.count(to_lower(token)) > 0;
}

std::vector<std::string> tokenize_words(std::string_view text)
{
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (is_alpha(c)) {
            current += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

std::size_t count_words(std::string_view text)
{
    std::size_t n = 0;
    bool in_word = false;
    for (char c : text) {
        const bool a = is_alpha(c);
        if (a && !in_word) {
            ++n;
        }
        in_word = a;
    }
    return n;
}

std::vector<Sentence> segment_sentences(std::string_view text, std::string_view doc_id,
                                        const AbbreviationList& abbreviations)
{
    std::vector<Sentence> sentences;
    auto emit = [&](std::size_t begin, std::size_t end) {
        const auto piece = trim(text.substr(begin, end - begin));
        if (piece.empty()) {
            return;
        }
        Sentence s;
        s.doc_id = std::string(doc_id);
        s.index = sentences.size();
        s.text = std::string(piece);
        s.word_count = count_words(piece);
        sentences.push_back(std::move(s));
    };

    auto is_closer = [](char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; };
    auto is_terminal = [](char c) { return c == '.' || c == '!' || c == '?'; };

    std::size_t start = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_terminal(text[i])) {
            ++i;
            continue;
        }
        const std::size_t punct = i;
        std::size_t j = i + 1;
        while (j < text.size() && (is_terminal(text[j]) || is_closer(text[j]))) {
            ++j;
        }
        if (j < text.size() && !is_space(text[j])) {
            i = j;
            continue;
        }
        std::size_t k = j;
        while (k < text.size() && is_space(text[k])) {
            ++k;
        }
        bool boundary = k == text.size() || !is_lower(text[k]);
        if (boundary && text[punct] == '.' && j == punct + 1) {
            // Token carrying the period: back to the previous whitespace, minus opening brackets/quotes.
            std::size_t b = punct;
            while (b > start && !is_space(text[b - 1])) {
                --b;
            }
            auto token = text.substr(b, punct + 1 - b);
            while (!token.empty() && (token.front() == '(' || token.front() == '"' || token.front() == '\'' ||
                                      token.front() == '[')) {
                token.remove_prefix(1);
            }
            const bool initial = token.size() == 2 && std::isupper(static_cast<unsigned char>(token[0]));
            if (initial || abbreviations.contains(token)) {
                boundary = false;
            }
        }
        if (boundary) {
            emit(start, j);
            start = k;
        }
        i = k > j ? k : j;
    }
    if (start < text.size()) {
        emit(start, text.size());
    }
    return sentences;
}

namespace cleaning {

std::string strip_html(std::string_view markup)
{
    static const boost::regex drop_elements(
        R"(<!--.*?-->|<script\b.*?</script\s*>|<style\b.*?</style\s*>|<table\b.*?</table\s*>)",
        boost::regex::perl | boost::regex::icase);
    static const boost::regex tag(R"(</?([A-Za-z][A-Za-z0-9\-]*)\b[^>]*>|<![^>]*>|<\?[^>]*>)", boost::regex::perl);

    const std::string input(markup);
    const std::string without_elements =
        boost::regex_replace(input, drop_elements, "\n", boost::match_default | boost::regex_constants::format_literal);

    std::string out;
    out.reserve(without_elements.size());
    auto last = without_elements.cbegin();
    boost::sregex_iterator it(without_elements.cbegin(), without_elements.cend(), tag);
    for (; it != boost::sregex_iterator(); ++it) {
        const auto& m = *it;
        out.append(last, m[0].first);
        const auto name = to_lower(m[1].str());
        if (!name.empty() && block_tags().count(name) > 0) {
            out += '\n';
        } else if (name == "td" || name == "th") {
            out += '\t';
        }
        last = m[0].second;
    }
    out.append(last, without_elements.cend());
    return decode_entities(out);
}

bool is_page_number_line(std::string_view line)
{
    auto t = trim(line);
    if (t.empty()) {
        return false;
    }
    if (t.size() > 4 && to_lower(t.substr(0, 4)) == "page") {
        t = trim(t.substr(4));
    }
    return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::size_t count_numeric_columns(std::string_view line)
{
    std::size_t count = 0;
    std::size_t pos = 0;
    while (pos < line.size()) {
        // Column separators: tab, '|', or two or more spaces.
        std::size_t end = pos;
        while (end < line.size()) {
            if (line[end] == '\t' || line[end] == '|') {
                break;
            }
            if (line[end] == ' ' && end + 1 < line.size() && line[end + 1] == ' ') {
                break;
            }
            ++end;
        }
        if (is_numeric_field(line.substr(pos, end - pos))) {
            ++count;
        }
        pos = end;
        while (pos < line.size() && (line[pos] == '\t' || line[pos] == '|' || line[pos] == ' ')) {
            ++pos;
        }
    }
    return count;
}

std::string remove_table_blocks(std::string_view text)
{
    const auto lines = split_lines(text);
    std::vector<bool> keep(lines.size(), true);
    std::size_t i = 0;
    while (i < lines.size()) {
        if (trim(lines[i]).empty()) {
            ++i;
            continue;
        }
        std::size_t j = i;
        std::size_t numeric = 0;
        while (j < lines.size() && !trim(lines[j]).empty()) {
            if (count_numeric_columns(lines[j]) >= 3) {
                ++numeric;
            }
            ++j;
        }
        if (2 * numeric >= j - i && numeric > 0) {
            std::fill(keep.begin() + static_cast<std::ptrdiff_t>(i), keep.begin() + static_cast<std::ptrdiff_t>(j), false);
        }
        i = j;
    }
    std::string out;
    for (std::size_t n = 0; n < lines.size(); ++n) {
        if (keep[n]) {
            out.append(lines[n]);
            out += '\n';
        }
    }
    return out;
}

std::string normalize_paragraphs(std::string_view text)
{
    std::vector<std::string> paragraphs;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            paragraphs.push_back(std::move(current));
            current.clear();
        }
    };
    for (const auto line : split_lines(text)) {
        const auto t = trim(line);
        if (t.empty()) {
            flush();
            continue;
        }
        if (is_page_number_line(t)) {
            continue;
        }
        bool pending_space = !current.empty();
        for (char c : t) {
            if (is_space(c)) {
                pending_space = true;
                continue;
            }
            if (pending_space && !current.empty()) {
                current += ' ';
            }
            pending_space = false;
            current += c;
        }
    }
    flush();
    std::string out;
    for (std::size_t n = 0; n < paragraphs.size(); ++n) {
        if (n > 0) {
            out += "\n\n";
        }
        out += paragraphs[n];
    }
    return out;
}

}  // namespace cleaning

MdnaDocument extract_mdna(const RawFiling& filing, const AbbreviationList& abbreviations)
{
    if (filing.body.empty()) {
        throw Error(Errc::InvalidArgument, fmt::format("filing '{}' has an empty body", filing.filing_id));
    }
    const std::string plain = cleaning::strip_html(filing.body);

    // Last qualifying heading wins; earlier ones are usually the table of contents.
    std::ptrdiff_t region_begin = -1;
    boost::sregex_iterator it(plain.cbegin(), plain.cend(), mdna_heading_regex());
    for (; it != boost::sregex_iterator(); ++it) {
        region_begin = (*it)[0].second - plain.cbegin();
    }
    if (region_begin < 0) {
        throw Error(Errc::NoMdnaFound, fmt::format("filing '{}' has no Item 6/7 MD&A heading", filing.filing_id));
    }

    std::size_t region_end = plain.size();
    boost::smatch next;
    if (boost::regex_search(plain.cbegin() + region_begin, plain.cend(), next, next_item_regex(),
                            boost::match_default | boost::match_not_dot_newline | boost::match_prev_avail)) {
        region_end = static_cast<std::size_t>(next[0].first - plain.cbegin());
    }
    const auto region = std::string_view(plain).substr(static_cast<std::size_t>(region_begin),
                                                       region_end - static_cast<std::size_t>(region_begin));

    MdnaDocument doc;
    doc.filing_id = filing.filing_id;
    doc.firm_id = filing.firm_id;
    doc.fiscal_year = filing.fiscal_year;
    doc.filing_date = filing.filing_date;
    doc.text = cleaning::normalize_paragraphs(cleaning::remove_table_blocks(region));
    doc.sentences = segment_sentences(doc.text, doc.filing_id, abbreviations);
    if (doc.sentences.empty()) {
        throw Error(Errc::EmptySection, fmt::format("filing '{}' MD&A region is empty after cleaning", filing.filing_id));
    }
    return doc;
}

ExtractionResult extract_corpus(std::span<const RawFiling> filings, const AbbreviationList& abbreviations)
{
    ExtractionResult result;
    result.documents.reserve(filings.size());
    for (const auto& filing : filings) {
        try {
            result.documents.push_back(extract_mdna(filing, abbreviations));
        } catch (const Error& e) {
            result.failures.push_back({filing.filing_id, e.code(), e.what()});
        }
    }
    return result;
}

std::vector<RawFiling> load_filing_index(const std::filesystem::path& index_csv)
{
    const auto table = io::read_csv(index_csv);
    const auto c_id = table.column("filing_id");
    const auto c_firm = table.column("firm_id");
    const auto c_year = table.column("fiscal_year");
    const auto c_date = table.column("filing_date");
    const auto c_form = table.column("form_type");
    const auto c_path = table.column("path");
    const auto base = index_csv.parent_path();

    std::set<std::string> seen;
    std::vector<RawFiling> filings;
    filings.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        RawFiling f;
        f.filing_id = row[c_id];
        if (f.filing_id.empty() || !seen.insert(f.filing_id).second) {
            throw Error(Errc::InvalidArgument, fmt::format("filing_id '{}' empty or duplicated", f.filing_id));
        }
        f.firm_id = row[c_firm];
        f.fiscal_year = std::stoi(row[c_year]);
        f.filing_date = parse_date(row[c_date]);
        f.form_type = parse_form_type(row[c_form]);
        f.body = io::read_text(base / row[c_path]);
        filings.push_back(std::move(f));
    }
    return filings;
}

void write_documents_jsonl(const std::filesystem::path& path, std::span<const MdnaDocument> documents)
{
    std::string out;
    for (const auto& d : documents) {
        nlohmann::json sentences = nlohmann::json::array();
        for (const auto& s : d.sentences) {
            sentences.push_back({{"index", s.index}, {"text", s.text}, {"word_count", s.word_count}});
        }
        const nlohmann::json record = {
            {"filing_id", d.filing_id},   {"firm_id", d.firm_id}, {"fiscal_year", d.fiscal_year},
            {"filing_date", format_date(d.filing_date)}, {"text", d.text}, {"sentences", std::move(sentences)},
        };
        out += record.dump();
        out += '\n';
    }
    io::write_text(path, out);
}

std::vector<MdnaDocument> read_documents_jsonl(const std::filesystem::path& path)
{
    std::istringstream in(io::read_text(path));
    std::vector<MdnaDocument> docs;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(line);
            MdnaDocument d;
            d.filing_id = j.at("filing_id").get<std::string>();
            d.firm_id = j.at("firm_id").get<std::string>();
            d.fiscal_year = j.at("fiscal_year").get<int>();
            d.filing_date = parse_date(j.at("filing_date").get<std::string>());
            d.text = j.at("text").get<std::string>();
            for (const auto& s : j.at("sentences")) {
                d.sentences.push_back({d.filing_id, s.at("index").get<std::size_t>(), s.at("text").get<std::string>(),
                                       s.at("word_count").get<std::size_t>()});
            }
            docs.push_back(std::move(d));
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::InvalidArgument, fmt::format("bad document record in '{}': {}", path.string(), e.what()));
        }
    }
    return docs;
}

}  // namespace distress
