#include "distress/features.hpp"

#include "distress/errors.hpp"
#include "distress/io.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace distress {

namespace {

double parse_double(const std::string& text, std::string_view column)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) {
            throw std::invalid_argument("trailing");
        }
        return v;
    } catch (const std::exception&) {
        throw Error(Errc::InvalidArgument, fmt::format("column {}: '{}' is not a finite number", column, text));
    }
}

}  // namespace

std::vector<FinancialRecord> read_financial_csv(const std::filesystem::path& path)
{
    const auto table = io::read_csv(path);
    const auto c_firm = table.column("firm_id");
    const auto c_year = table.column("fiscal_year");
    const auto c_date = table.column("filing_date");
    const auto c_wc = table.column("wc");
    const auto c_re = table.column("re");
    const auto c_ebit = table.column("ebit");
    const auto c_mve = table.column("mve");
    const auto c_sale = table.column("sale");
    const auto c_bk = table.column("bankruptcy_date");

    std::vector<FinancialRecord> records;
    records.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        FinancialRecord r;
        r.firm_id = row[c_firm];
        r.fiscal_year = std::stoi(row[c_year]);
        r.filing_date = parse_date(row[c_date]);
        r.wc = parse_double(row[c_wc], "wc");
        r.re = parse_double(row[c_re], "re");
        r.ebit = parse_double(row[c_ebit], "ebit");
        r.mve = parse_double(row[c_mve], "mve");
        r.sale = parse_double(row[c_sale], "sale");
        if (!row[c_bk].empty()) {
            r.bankruptcy_date = parse_date(row[c_bk]);
            if (days_between(r.filing_date, *r.bankruptcy_date) < 0) {
                throw Error(Errc::InvalidDateOrder,
                            fmt::format("{} {}: bankruptcy precedes filing", r.firm_id, r.fiscal_year));
            }
        }
        records.push_back(std::move(r));
    }
    return records;
}

void write_financial_csv(const std::filesystem::path& path, std::span<const FinancialRecord> records)
{
    std::string out = "firm_id,fiscal_year,filing_date,wc,re,ebit,mve,sale,bankruptcy_date\n";
    for (const auto& r : records) {
        out += fmt::format("{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", io::csv_escape(r.firm_id),
                           r.fiscal_year, format_date(r.filing_date), r.wc, r.re, r.ebit, r.mve, r.sale,
                           r.bankruptcy_date ? format_date(*r.bankruptcy_date) : std::string());
    }
    io::write_text(path, out);
}

int label_bankruptcy(const Date& filing_date, const std::optional<Date>& bankruptcy_date)
{
    if (!bankruptcy_date) {
        return 0;
    }
    const long gap = days_between(filing_date, *bankruptcy_date);
    if (gap < 0) {
        throw Error(Errc::InvalidDateOrder,
                    fmt::format("bankruptcy {} precedes filing {}", format_date(*bankruptcy_date), format_date(filing_date)));
    }
    return gap > 0 && gap <= 365 ? 1 : 0;
}

std::string_view to_string(VariableSet set) noexcept
{
    switch (set) {
        case VariableSet::Fin: return "FIN";
        case VariableSet::FinDict: return "FIN+DICT";
        case VariableSet::FinW2v: return "FIN+W2V";
        case VariableSet::FinBert: return "FIN+BERT";
        case VariableSet::FinDapt: return "FIN+DAPT";
    }
    return "FIN";
}

std::string_view to_string(SentimentFamily family) noexcept
{
    switch (family) {
        case SentimentFamily::Dict: return "DICT";
        case SentimentFamily::W2v: return "W2V";
        case SentimentFamily::Bert: return "BERT";
        case SentimentFamily::Dapt: return "DAPT";
    }
    return "DICT";
}

VariableSet parse_variable_set(std::string_view text)
{
    for (auto set : {VariableSet::Fin, VariableSet::FinDict, VariableSet::FinW2v, VariableSet::FinBert,
                     VariableSet::FinDapt}) {
        if (to_string(set) == text) {
            return set;
        }
    }
    throw Error(Errc::InvalidArgument, fmt::format("unknown variable set '{}'", text));
}

SentimentFamily parse_sentiment_family(std::string_view text)
{
    for (auto f : {SentimentFamily::Dict, SentimentFamily::W2v, SentimentFamily::Bert, SentimentFamily::Dapt}) {
        if (to_string(f) == text) {
            return f;
        }
    }
    throw Error(Errc::InvalidArgument, fmt::format("unknown sentiment family '{}'", text));
}

std::optional<SentimentFamily> sentiment_family(VariableSet set) noexcept
{
    switch (set) {
        case VariableSet::Fin: return std::nullopt;
        case VariableSet::FinDict: return SentimentFamily::Dict;
        case VariableSet::FinW2v: return SentimentFamily::W2v;
        case VariableSet::FinBert: return SentimentFamily::Bert;
        case VariableSet::FinDapt: return SentimentFamily::Dapt;
    }
    return std::nullopt;
}

std::vector<std::string> feature_names(VariableSet set)
{
    std::vector<std::string> names(kFinancialNames.begin(), kFinancialNames.end());
    if (const auto family = sentiment_family(set)) {
        const auto prefix = std::string(to_string(*family));
        names.push_back(prefix + "POS");
        names.push_back(prefix + "NEG");
    }
    return names;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const
{
    Dataset out;
    out.feature_names = feature_names;
    out.rows.reserve(indices.size());
    for (auto i : indices) {
        out.rows.push_back(rows.at(i));
    }
    return out;
}

SentimentPair to_pair(const DictTone& tone) noexcept
{
    return {tone.dict_pos, tone.dict_neg};
}

SentimentPair to_pair(const DocumentSentiment& sentiment) noexcept
{
    return {sentiment.pos, sentiment.neg};
}

Dataset assemble(std::span<const FinancialRecord> records, const SentimentTables& sentiments, VariableSet set)
{
    Dataset data;
    data.feature_names = feature_names(set);
    const auto family = sentiment_family(set);
    const SentimentTable* table = nullptr;
    if (family) {
        const auto it = sentiments.find(*family);
        if (it == sentiments.end()) {
            throw Error(Errc::MissingSentiment, fmt::format("no {} scores available", to_string(*family)));
        }
        table = &it->second;
    }

    std::size_t missing = 0;
    std::string first_missing;
    data.rows.reserve(records.size());
    for (const auto& r : records) {
        Observation obs;
        obs.firm_id = r.firm_id;
        obs.fiscal_year = r.fiscal_year;
        obs.filing_date = r.filing_date;
        obs.brupt = label_bankruptcy(r.filing_date, r.bankruptcy_date);
        obs.features = {r.wc, r.re, r.ebit, r.mve, r.sale};
        if (table != nullptr) {
            const auto it = table->find({r.firm_id, r.fiscal_year});
            if (it == table->end()) {
                if (missing++ == 0) {
                    first_missing = fmt::format("{}/{}", r.firm_id, r.fiscal_year);
                }
                continue;
            }
            obs.features.push_back(it->second.pos);
            obs.features.push_back(it->second.neg);
        }
        data.rows.push_back(std::move(obs));
    }
    if (missing > 0) {
        throw Error(Errc::MissingSentiment, fmt::format("{} of {} records lack {} scores (first: {})", missing,
                                                        records.size(), to_string(*family), first_missing));
    }
    return data;
}

void write_observation_csv(const std::filesystem::path& path, const Dataset& data)
{
    std::string out = "firm_id,fiscal_year,filing_date";
    for (const auto& name : data.feature_names) {
        out += ',';
        out += name;
    }
    out += ",BRUPT\n";
    for (const auto& row : data.rows) {
        out += fmt::format("{},{},{}", io::csv_escape(row.firm_id), row.fiscal_year, format_date(row.filing_date));
        for (double v : row.features) {
            out += fmt::format(",{:.17g}", v);
        }
        out += fmt::format(",{}\n", row.brupt);
    }
    io::write_text(path, out);
}

Dataset read_observation_csv(const std::filesystem::path& path)
{
    const auto table = io::read_csv(path);
    if (table.header.size() < 5 || table.header[0] != "firm_id" || table.header[1] != "fiscal_year" ||
        table.header[2] != "filing_date" || table.header.back() != "BRUPT") {
        throw Error(Errc::InvalidArgument, fmt::format("'{}' is not an observation file", path.string()));
    }
    Dataset data;
    data.feature_names.assign(table.header.begin() + 3, table.header.end() - 1);
    const auto d = data.feature_names.size();
    data.rows.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) {
            throw Error(Errc::InvalidArgument, fmt::format("'{}': ragged row", path.string()));
        }
        Observation obs;
        obs.firm_id = row[0];
        obs.fiscal_year = static_cast<int>(parse_double(row[1], "fiscal_year"));
        obs.filing_date = parse_date(row[2]);
        for (std::size_t f = 0; f < d; ++f) {
            obs.features.push_back(parse_double(row[3 + f], data.feature_names[f]));
        }
        obs.brupt = row.back() == "1" ? 1 : 0;
        data.rows.push_back(std::move(obs));
    }
    return data;
}

double quantile(std::vector<double> values, double q)
{
    if (values.empty()) {
        throw Error(Errc::InsufficientData, "quantile of an empty sample");
    }
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

WinsorBounds fit_winsor(const Dataset& data, double level)
{
    if (!(level > 0.0 && level < 0.5)) {
        throw Error(Errc::InvalidArgument, fmt::format("winsor level {} outside (0, 0.5)", level));
    }
    if (data.size() < 2) {
        throw Error(Errc::InsufficientData, "winsorization needs at least two records");
    }
    WinsorBounds bounds;
    bounds.level = level;
    std::vector<double> column(data.size());
    for (std::size_t f = 0; f < data.dimension(); ++f) {
        for (std::size_t i = 0; i < data.size(); ++i) {
            column[i] = data.rows[i].features.at(f);
        }
        bounds.bounds.emplace_back(quantile(column, level), quantile(column, 1.0 - level));
    }
    return bounds;
}

Dataset apply_winsor(const Dataset& data, const WinsorBounds& bounds)
{
    if (bounds.bounds.size() != data.dimension()) {
        throw Error(Errc::DimensionMismatch, "winsor bounds do not match the feature count");
    }
    Dataset out = data;
    for (auto& row : out.rows) {
        for (std::size_t f = 0; f < row.features.size(); ++f) {
            row.features[f] = std::clamp(row.features[f], bounds.bounds[f].first, bounds.bounds[f].second);
        }
    }
    return out;
}

Standardizer fit_standardizer(const Dataset& train, double min_sd)
{
    if (train.size() == 0) {
        throw Error(Errc::InsufficientData, "cannot standardize an empty training set");
    }
    Standardizer st;
    const auto n = static_cast<double>(train.size());
    for (std::size_t f = 0; f < train.dimension(); ++f) {
        double mean = 0.0;
        for (const auto& row : train.rows) {
            mean += row.features[f];
        }
        mean /= n;
        double var = 0.0;
        for (const auto& row : train.rows) {
            const double d = row.features[f] - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var / n);
        if (!(sd > min_sd)) {
            spdlog::warn("feature {} is constant on the training set; dropped", train.feature_names[f]);
            st.dropped.push_back(train.feature_names[f]);
            continue;
        }
        st.kept.push_back(f);
        st.mean.push_back(mean);
        st.sd.push_back(sd);
    }
    return st;
}

Dataset Standardizer::apply(const Dataset& data) const
{
    Dataset out;
    for (auto f : kept) {
        out.feature_names.push_back(data.feature_names.at(f));
    }
    out.rows.reserve(data.size());
    for (const auto& row : data.rows) {
        Observation obs = row;
        obs.features.resize(kept.size());
        for (std::size_t k = 0; k < kept.size(); ++k) {
            obs.features[k] = (row.features.at(kept[k]) - mean[k]) / sd[k];
        }
        out.rows.push_back(std::move(obs));
    }
    return out;
}

}  // namespace distress
