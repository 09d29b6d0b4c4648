#include "distress/synthetic.hpp"

#include "distress/calendar.hpp"
#include "distress/errors.hpp"
#include "distress/features.hpp"
#include "distress/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace distress {

namespace {

const std::vector<std::string> kPositive = {
    "STRENGTH", "EXPANDED", "ACHIEVE",  "PROFITABILITY", "IMPROVED",  "GAINS",         "STRONG",
    "SUCCESSFUL", "FAVORABLE", "EXCELLENT", "ENHANCED",   "PROGRESS", "OPPORTUNITIES", "ADVANCES",
};
const std::vector<std::string> kNegative = {
    "ASSURANCE", "LOSS",    "LOSSES",    "DECLINE",       "DECLINED", "IMPAIRMENT", "ADVERSE",
    "DEFAULT",   "LITIGATION", "WEAK",   "DIFFICULT", "DETERIORATION", "DOUBT",  "UNFAVORABLE",
};
const std::vector<std::string> kDomain = {"COVENANT", "WAIVER", "FORBEARANCE", "LENDERS", "LIQUIDITY", "CONCERN"};
const std::vector<std::string> kNeutral = {
    "COMPANY",   "REVENUE",  "OPERATIONS", "CUSTOMERS", "PERIOD",    "PRODUCTS",  "MARKET",   "SEGMENT",
    "SALES",     "SERVICES", "EXPENSES",   "CAPITAL",   "FACILITIES", "MANAGEMENT", "PROGRAMS", "CONTRACTS",
    "INVENTORY", "DISTRIBUTION", "EMPLOYEES", "REGION", "QUARTER",   "PRICING",   "SHIPMENTS", "ORDERS",
};
const std::vector<std::string> kConnectors = {"the", "and", "of", "in", "for", "our", "with", "to"};
const std::vector<std::string> kOpeners = {
    "During fiscal {},", "In fiscal {},", "Compared with the prior year, in {}", "For the year {},",
    "Management notes that in {}", "As of the end of {},",
};

// Per-ratio mean, scale and loading on the latent financial distress factor.
struct RatioModel {
    const char* name;
    double mean;
    double sd;
    double loading;
};
constexpr std::array<RatioModel, 5> kRatios = {{
    {"WC", 0.20, 0.15, 0.6},
    {"RE", 0.10, 0.40, 0.8},
    {"EBIT", 0.08, 0.10, 1.0},
    {"MVE", 1.50, 1.00, 0.8},
    {"SALE", 1.00, 0.50, 0.4},
}};

enum class Kind { Positive, Negative, Hedged, Neutral };

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

class Writer {
public:
    Writer(const SyntheticSpec& spec, std::mt19937_64& rng) : spec_(spec), rng_(rng) {}

    std::string sentence(Kind kind, int year)
    {
        std::vector<std::string> content;
        switch (kind) {
            case Kind::Positive:
                pick(spec_.positive_words, uniform(4, 5), content);
                pick(spec_.neutral_words, uniform(4, 7), content);
                break;
            case Kind::Negative:
                pick(spec_.negative_words, uniform(4, 5), content);
                pick(spec_.neutral_words, uniform(3, 6), content);
                if (chance(spec_.domain_in_negative)) {
                    pick(spec_.domain_words, uniform(2, 3), content);
                }
                break;
            case Kind::Hedged:
                pick(spec_.positive_words, uniform(1, 2), content);
                pick(spec_.domain_words, uniform(4, 5), content);
                pick(spec_.neutral_words, uniform(2, 4), content);
                break;
            case Kind::Neutral:
                pick(spec_.neutral_words, uniform(6, 10), content);
                break;
        }
        std::shuffle(content.begin(), content.end(), rng_);

        std::string out;
        if (kind == Kind::Hedged) {
            out = "However,";
        } else if (chance(0.3)) {
            out = fmt::format(fmt::runtime(kOpeners[index(kOpeners.size())]), year);
        }
        for (std::size_t i = 0; i < content.size(); ++i) {
            if (!out.empty()) {
                out += ' ';
            }
            out += lower(content[i]);
            if (i + 1 < content.size() && chance(0.4)) {
                out += ' ';
                out += kConnectors[index(kConnectors.size())];
            }
        }
        if (kind == Kind::Neutral && chance(0.5)) {
            out += fmt::format(" of {}.{} million", uniform(2, 950), uniform(0, 9));
        }
        out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
        out += '.';
        return out;
    }

    std::string numeric_table(bool html)
    {
        std::string out = html ? "<table>\n" : "";
        const int rows = uniform(3, 6);
        for (int r = 0; r < rows; ++r) {
            const auto label = lower(spec_.neutral_words[index(spec_.neutral_words.size())]);
            const auto a = fmt::format("{},{:03d}", uniform(1, 99), uniform(0, 999));
            const auto b = fmt::format("{},{:03d}", uniform(1, 99), uniform(0, 999));
            const auto c = fmt::format("{}.{}%", uniform(0, 40), uniform(0, 9));
            if (html) {
                out += fmt::format("<tr><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>\n", label, a, b, c);
            } else {
                out += fmt::format("{:<16}  {:>10}  {:>10}  {:>8}\n", label, a, b, c);
            }
        }
        if (html) {
            out += "</table>\n";
        }
        return out;
    }

    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

private:
    void pick(const std::vector<std::string>& pool, int count, std::vector<std::string>& out)
    {
        std::sample(pool.begin(), pool.end(), std::back_inserter(out),
                    std::min<std::ptrdiff_t>(count, static_cast<std::ptrdiff_t>(pool.size())), rng_);
    }

    const SyntheticSpec& spec_;
    std::mt19937_64& rng_;
};

constexpr const char* kMdnaTitle = "Management's Discussion and Analysis of Financial Condition and Results of Operations";

std::string filing_body(Writer& w, const std::vector<std::string>& mdna_sentences, int year, bool html)
{
    const std::string br = html ? "<br>\n" : "\n";
    auto para = [&](const std::string& text) { return html ? "<p>" + text + "</p>\n" : text + "\n\n"; };

    std::string body;
    if (html) {
        body += "<html><head><title>Form 10-K</title><style>p { margin: 0; }</style></head><body>\n";
    }
    body += para("UNITED STATES SECURITIES AND EXCHANGE COMMISSION");
    body += para(fmt::format("ANNUAL REPORT FOR THE FISCAL YEAR ENDED DECEMBER 31, {}", year));
    body += para("TABLE OF CONTENTS");
    body += "Item 1. Business" + br;
    body += "Item 6. Selected Financial Data" + br;
    body += fmt::format("Item 7. {}", kMdnaTitle) + br;
    body += "Item 8. Financial Statements and Supplementary Data" + br + br;

    body += "Item 1. Business" + br;
    body += para(w.sentence(Kind::Neutral, year) + " " + w.sentence(Kind::Neutral, year));
    body += "Item 6. Selected Financial Data" + br;
    body += w.numeric_table(html);

    body += fmt::format("ITEM 7. {}", kMdnaTitle) + br;
    std::size_t i = 0;
    bool table_done = false;
    while (i < mdna_sentences.size()) {
        const auto n = std::min<std::size_t>(static_cast<std::size_t>(w.uniform(2, 4)), mdna_sentences.size() - i);
        std::string text;
        for (std::size_t k = 0; k < n; ++k) {
            if (k > 0) {
                text += ' ';
            }
            text += mdna_sentences[i + k];
        }
        i += n;
        body += para(text);
        if (!table_done && i >= mdna_sentences.size() / 2) {
            body += w.numeric_table(html);
            body += html ? "<p>" + std::to_string(w.uniform(10, 60)) + "</p>\n" : std::to_string(w.uniform(10, 60)) + "\n\n";
            table_done = true;
        }
    }
    body += "Item 8. Financial Statements and Supplementary Data" + br;
    body += para(w.sentence(Kind::Neutral, year));
    if (html) {
        body += "</body></html>\n";
    }
    return body;
}

void write_words(const std::filesystem::path& path, const std::vector<std::string>& words, const char* title)
{
    std::string out = fmt::format("# {}\n", title);
    for (const auto& w : words) {
        out += w;
        out += '\n';
    }
    io::write_text(path, out);
}

}  // namespace

SyntheticSpec SyntheticSpec::with_default_vocabulary() const
{
    SyntheticSpec s = *this;
    if (s.positive_words.empty()) {
        s.positive_words = kPositive;
    }
    if (s.negative_words.empty()) {
        s.negative_words = kNegative;
    }
    if (s.domain_words.empty()) {
        s.domain_words = kDomain;
    }
    if (s.neutral_words.empty()) {
        s.neutral_words = kNeutral;
    }
    return s;
}

void SyntheticSpec::validate() const
{
    if (n_firms == 0 || last_year < first_year) {
        throw Error(Errc::InvalidArgument, "synthetic spec needs firms and a non-empty year range");
    }
    if (!(base_rate > 0.0 && base_rate < 1.0)) {
        throw Error(Errc::InvalidArgument, fmt::format("base rate {} outside (0, 1)", base_rate));
    }
    if (!(persistence >= 0.0 && persistence < 1.0)) {
        throw Error(Errc::InvalidArgument, "persistence must lie in [0, 1)");
    }
    for (double e : {fin_hazard_effect, text_hazard_effect, fin_effect, text_effect}) {
        if (!std::isfinite(e)) {
            throw Error(Errc::InvalidArgument, "effect sizes must be finite");
        }
    }
    for (double p : {hedged_share, domain_in_negative, positive_share, outlier_rate}) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw Error(Errc::InvalidArgument, "shares and rates must lie in [0, 1]");
        }
    }
    if (min_sentences < 1 || max_sentences < min_sentences) {
        throw Error(Errc::InvalidArgument, "sentence count range is invalid");
    }
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j)
{
    SyntheticSpec s;
    s.n_firms = j.value("n_firms", s.n_firms);
    s.first_year = j.value("first_year", s.first_year);
    s.last_year = j.value("last_year", s.last_year);
    s.base_rate = j.value("base_rate", s.base_rate);
    s.persistence = j.value("persistence", s.persistence);
    s.fin_hazard_effect = j.value("fin_hazard_effect", s.fin_hazard_effect);
    s.text_hazard_effect = j.value("text_hazard_effect", s.text_hazard_effect);
    s.fin_effect = j.value("fin_effect", s.fin_effect);
    s.text_effect = j.value("text_effect", s.text_effect);
    s.hedged_share = j.value("hedged_share", s.hedged_share);
    s.domain_in_negative = j.value("domain_in_negative", s.domain_in_negative);
    s.positive_share = j.value("positive_share", s.positive_share);
    s.min_sentences = j.value("min_sentences", s.min_sentences);
    s.max_sentences = j.value("max_sentences", s.max_sentences);
    s.outlier_rate = j.value("outlier_rate", s.outlier_rate);
    s.positive_words = j.value("positive_words", s.positive_words);
    s.negative_words = j.value("negative_words", s.negative_words);
    s.domain_words = j.value("domain_words", s.domain_words);
    s.neutral_words = j.value("neutral_words", s.neutral_words);
    s.rng_seed = j.value("rng_seed", s.rng_seed);
    return s;
}

nlohmann::json to_json(const SyntheticSpec& s)
{
    return {{"n_firms", s.n_firms},
            {"first_year", s.first_year},
            {"last_year", s.last_year},
            {"base_rate", s.base_rate},
            {"persistence", s.persistence},
            {"fin_hazard_effect", s.fin_hazard_effect},
            {"text_hazard_effect", s.text_hazard_effect},
            {"fin_effect", s.fin_effect},
            {"text_effect", s.text_effect},
            {"hedged_share", s.hedged_share},
            {"domain_in_negative", s.domain_in_negative},
            {"positive_share", s.positive_share},
            {"min_sentences", s.min_sentences},
            {"max_sentences", s.max_sentences},
            {"outlier_rate", s.outlier_rate},
            {"positive_words", s.positive_words},
            {"negative_words", s.negative_words},
            {"domain_words", s.domain_words},
            {"neutral_words", s.neutral_words},
            {"rng_seed", s.rng_seed}};
}

double calibrate_intercept(double rate, double slope)
{
    // Mean of logistic(a + slope Z) by the trapezoid rule on [-8, 8].
    auto mean_rate = [slope](double a) {
        constexpr int n = 1600;
        constexpr double lo = -8.0;
        constexpr double h = 16.0 / n;
        double acc = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double z = lo + h * i;
            const double w = (i == 0 || i == n) ? 0.5 : 1.0;
            acc += w * logistic(a + slope * z) * std::exp(-0.5 * z * z);
        }
        return acc * h / std::sqrt(2.0 * M_PI);
    };
    double lo = -30.0;
    double hi = 30.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mean_rate(mid) < rate ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

SyntheticOutput generate_synthetic(const SyntheticSpec& input, const std::filesystem::path& dir)
{
    const SyntheticSpec spec = input.with_default_vocabulary();
    spec.validate();
    std::filesystem::create_directories(dir / "filings");
    std::filesystem::create_directories(dir / "lexicon");

    std::mt19937_64 rng(spec.rng_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Writer writer(spec, rng);

    const double slope = std::hypot(spec.fin_hazard_effect, spec.text_hazard_effect);
    const double alpha = calibrate_intercept(spec.base_rate, slope);
    const double innovation = std::sqrt(1.0 - spec.persistence * spec.persistence);

    struct Firm {
        std::string id;
        double z_fin;
        double z_text;
    };
    std::size_t next_firm = 0;
    auto new_firm = [&] {
        Firm f{fmt::format("F{:05d}", ++next_firm), normal(rng), normal(rng)};
        return f;
    };
    std::vector<Firm> firms;
    for (std::size_t i = 0; i < spec.n_firms; ++i) {
        firms.push_back(new_firm());
    }

    SyntheticOutput out;
    out.intercept = alpha;
    std::string index = "filing_id,firm_id,fiscal_year,filing_date,form_type,path\n";
    std::vector<FinancialRecord> records;
    const std::array<const char*, 4> forms = {"10-K", "10-K", "10-K405", "10-KSB"};

    for (int year = spec.first_year; year <= spec.last_year; ++year) {
        for (auto& firm : firms) {
            if (year > spec.first_year) {
                firm.z_fin = spec.persistence * firm.z_fin + innovation * normal(rng);
                firm.z_text = spec.persistence * firm.z_text + innovation * normal(rng);
            }
            FinancialRecord rec;
            rec.firm_id = firm.id;
            rec.fiscal_year = year;
            rec.filing_date = add_days(Date{std::chrono::year{year + 1}, std::chrono::month{3}, std::chrono::day{1}},
                                       writer.uniform(0, 60));
            std::array<double, 5> ratios{};
            for (std::size_t k = 0; k < kRatios.size(); ++k) {
                double noise = normal(rng);
                if (unit(rng) < spec.outlier_rate) {
                    noise *= 8.0;
                }
                ratios[k] = kRatios[k].mean + kRatios[k].sd * (noise - spec.fin_effect * kRatios[k].loading * firm.z_fin);
            }
            rec.wc = ratios[0];
            rec.re = ratios[1];
            rec.ebit = ratios[2];
            rec.mve = ratios[3];
            rec.sale = ratios[4];

            const double p_fail = logistic(alpha + spec.fin_hazard_effect * firm.z_fin +
                                           spec.text_hazard_effect * firm.z_text);
            const bool fails = unit(rng) < p_fail;
            if (fails) {
                rec.bankruptcy_date = add_days(rec.filing_date, writer.uniform(1, 365));
                ++out.n_bankrupt;
            }

            const double negativity = logistic(spec.text_effect * firm.z_text - 1.0);
            const int n_sent = writer.uniform(spec.min_sentences, spec.max_sentences);
            std::vector<std::string> sentences;
            for (int s = 0; s < n_sent; ++s) {
                Kind kind = Kind::Neutral;
                if (unit(rng) < spec.positive_share) {
                    kind = Kind::Positive;
                } else if (unit(rng) < negativity) {
                    kind = unit(rng) < spec.hedged_share ? Kind::Hedged : Kind::Negative;
                }
                sentences.push_back(writer.sentence(kind, year));
            }
            const bool html = writer.chance(0.5);
            const auto filing_id = fmt::format("{}-{}", firm.id, year);
            const auto rel = fmt::format("filings/{}.{}", filing_id, html ? "html" : "txt");
            io::write_text(dir / rel, filing_body(writer, sentences, year, html));
            index += fmt::format("{},{},{},{},{},{}\n", filing_id, firm.id, year, format_date(rec.filing_date),
                                 forms[writer.index(forms.size())], rel);
            records.push_back(std::move(rec));
            ++out.n_filings;

            if (fails) {
                firm = new_firm();
            }
        }
    }

    out.index = dir / "index.csv";
    out.financials = dir / "financials.csv";
    out.positive_lexicon = dir / "lexicon" / "positive.txt";
    out.negative_lexicon = dir / "lexicon" / "negative.txt";
    out.manifest = dir / "manifest.json";
    io::write_text(out.index, index);
    write_financial_csv(out.financials, records);
    write_words(out.positive_lexicon, spec.positive_words, "positive words");
    write_words(out.negative_lexicon, spec.negative_words, "negative words");

    nlohmann::json ratios = nlohmann::json::array();
    for (const auto& r : kRatios) {
        ratios.push_back({{"name", r.name}, {"mean", r.mean}, {"sd", r.sd}, {"loading", r.loading}});
    }
    const nlohmann::json manifest = {
        {"spec", to_json(spec)},
        {"equations",
         {"z_fin[t] = persistence * z_fin[t-1] + sqrt(1 - persistence^2) * e, e ~ N(0,1); z_text likewise, independent",
          "P(BRUPT = 1) = logistic(intercept + fin_hazard_effect * z_fin + text_hazard_effect * z_text)",
          "ratio_k = mean_k + sd_k * (e_k - fin_effect * loading_k * z_fin), e_k ~ N(0,1), scaled by 8 with probability "
          "outlier_rate",
          "each MD&A sentence: positive with probability positive_share; otherwise negative-toned with probability "
          "logistic(text_effect * z_text - 1), written hedged with probability hedged_share, else neutral",
          "bankrupt firms leave the panel and are replaced by a new firm with a fresh stationary draw"}},
        {"intercept", alpha},
        {"ratios", ratios},
        {"n_filings", out.n_filings},
        {"n_bankrupt", out.n_bankrupt},
    };
    io::write_text(out.manifest, manifest.dump(2) + "\n");
    return out;
}

}  // namespace distress
