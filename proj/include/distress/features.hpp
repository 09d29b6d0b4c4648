#pragma once

#include "distress/calendar.hpp"
#include "distress/lexicon_tone.hpp"
#include "distress/sentiment_scoring.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace distress {

// Altman-style ratios. EBIT holds the EBITDA-over-assets ratio (the two names are aliases here).
struct FinancialRecord {
    std::string firm_id;
    int fiscal_year = 0;
    Date filing_date{};
    double wc = 0.0;
    double re = 0.0;
    double ebit = 0.0;
    double mve = 0.0;
    double sale = 0.0;
    std::optional<Date> bankruptcy_date;
};

inline constexpr std::array<std::string_view, 5> kFinancialNames = {"WC", "RE", "EBIT", "MVE", "SALE"};

// Financial CSV: firm_id, fiscal_year, filing_date, wc, re, ebit, mve, sale, bankruptcy_date (may be empty).
std::vector<FinancialRecord> read_financial_csv(const std::filesystem::path& path);
void write_financial_csv(const std::filesystem::path& path, std::span<const FinancialRecord> records);

// 1 iff a bankruptcy follows the filing by 1..365 calendar days. Throws InvalidDateOrder.
int label_bankruptcy(const Date& filing_date, const std::optional<Date>& bankruptcy_date);

enum class VariableSet { Fin, FinDict, FinW2v, FinBert, FinDapt };
enum class SentimentFamily { Dict, W2v, Bert, Dapt };

std::string_view to_string(VariableSet set) noexcept;
std::string_view to_string(SentimentFamily family) noexcept;
VariableSet parse_variable_set(std::string_view text);
SentimentFamily parse_sentiment_family(std::string_view text);
std::optional<SentimentFamily> sentiment_family(VariableSet set) noexcept;

// Ordered feature names: the five financial ratios, then the family's (POS, NEG) pair.
std::vector<std::string> feature_names(VariableSet set);

struct Observation {
    std::string firm_id;
    int fiscal_year = 0;
    Date filing_date{};
    int brupt = 0;
    std::vector<double> features;
};

struct Dataset {
    std::vector<std::string> feature_names;
    std::vector<Observation> rows;

    [[nodiscard]] std::size_t size() const noexcept { return rows.size(); }
    [[nodiscard]] std::size_t dimension() const noexcept { return feature_names.size(); }

    // Rows at the given indices, in that order.
    [[nodiscard]] Dataset subset(std::span<const std::size_t> indices) const;
};

using FirmYear = std::pair<std::string, int>;

// Document-level (POS, NEG) pair for one firm-year.
struct SentimentPair {
    double pos = 0.0;
    double neg = 0.0;
};

using SentimentTable = std::map<FirmYear, SentimentPair>;

// All families available for assembly; DICT comes from DictTone, the others from DocumentSentiment.
using SentimentTables = std::map<SentimentFamily, SentimentTable>;

SentimentPair to_pair(const DictTone& tone) noexcept;
SentimentPair to_pair(const DocumentSentiment& sentiment) noexcept;

// Inner-joins records with the family required by `set` on (firm_id, fiscal_year). Any record
// without the required scores raises MissingSentiment.
Dataset assemble(std::span<const FinancialRecord> records, const SentimentTables& sentiments, VariableSet set);

// Round-trips exactly: values are written with 17 significant digits.
void write_observation_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_observation_csv(const std::filesystem::path& path);

// Type-7 empirical quantile (linear interpolation between order statistics).
double quantile(std::vector<double> values, double q);

struct WinsorBounds {
    std::vector<std::pair<double, double>> bounds;  // (lower, upper) per feature column
    double level = 0.01;
};

// Bounds at the `level` and 1 - `level` quantiles of each column. Throws InsufficientData or InvalidArgument.
WinsorBounds fit_winsor(const Dataset& data, double level = 0.01);
Dataset apply_winsor(const Dataset& data, const WinsorBounds& bounds);

// Z-scores with population standard deviation; constant columns are dropped.
struct Standardizer {
    std::vector<std::size_t> kept;  // source column indices
    std::vector<double> mean;
    std::vector<double> sd;
    std::vector<std::string> dropped;

    [[nodiscard]] Dataset apply(const Dataset& data) const;
};

Standardizer fit_standardizer(const Dataset& train, double min_sd = 1e-12);

}  // namespace distress
