#include "distress/evaluation.hpp"

#include "distress/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace distress {

Accuracy accuracy(const ConfusionCounts& counts)
{
    if (counts.nb == 0 || counts.b == 0) {
        throw Error(Errc::EmptyClass, fmt::format("class totals NB={} B={}", counts.nb, counts.b));
    }
    if (counts.cnb > counts.nb || counts.cb > counts.b) {
        throw Error(Errc::InvalidArgument, "correct counts exceed class totals");
    }
    return {static_cast<double>(counts.cnb) / static_cast<double>(counts.nb),
            static_cast<double>(counts.cb) / static_cast<double>(counts.b)};
}

ConfusionCounts confusion(std::span<const int> truth, std::span<const int> predicted)
{
    if (truth.size() != predicted.size()) {
        throw Error(Errc::DimensionMismatch, fmt::format("{} labels vs {} predictions", truth.size(), predicted.size()));
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 1) {
            ++c.b;
            c.cb += predicted[i] == 1 ? 1 : 0;
        } else {
            ++c.nb;
            c.cnb += predicted[i] == 1 ? 0 : 1;
        }
    }
    return c;
}

PseudoR2 pseudo_r2(double log_lik_fit, double log_lik_null, std::size_t n)
{
    if (n == 0) {
        throw Error(Errc::InvalidArgument, "pseudo R2 needs n > 0");
    }
    if (log_lik_fit < log_lik_null) {
        throw Error(Errc::InvalidLikelihoodOrder,
                    fmt::format("fitted log-likelihood {} below null {}", log_lik_fit, log_lik_null));
    }
    const double nd = static_cast<double>(n);
    PseudoR2 r;
    r.cox_snell = -std::expm1(-2.0 * (log_lik_fit - log_lik_null) / nd);
    const double max_r2 = -std::expm1(2.0 * log_lik_null / nd);
    r.nagelkerke = max_r2 > 0.0 ? r.cox_snell / max_r2 : 0.0;
    return r;
}

std::string significance_stars(double p_value)
{
    if (p_value < 0.01) {
        return "***";
    }
    if (p_value < 0.05) {
        return "**";
    }
    if (p_value < 0.10) {
        return "*";
    }
    return "";
}

TTestResult univariate_ttest(std::span<const double> class1, std::span<const double> class0)
{
    if (class1.size() < 2 || class0.size() < 2) {
        throw Error(Errc::InsufficientData,
                    fmt::format("t-test needs two values per group, got {} and {}", class1.size(), class0.size()));
    }
    auto moments = [](std::span<const double> v) {
        const double n = static_cast<double>(v.size());
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : v) {
            ss += (x - mean) * (x - mean);
        }
        return std::pair{mean, ss / (n - 1.0)};
    };
    const auto [m1, v1] = moments(class1);
    const auto [m0, v0] = moments(class0);
    TTestResult r;
    r.mean1 = m1;
    r.mean0 = m0;
    r.diff = m1 - m0;
    const double se = std::sqrt(v1 / static_cast<double>(class1.size()) + v0 / static_cast<double>(class0.size()));
    if (r.diff == 0.0) {
        r.t_stat = 0.0;
    } else if (se == 0.0) {
        r.t_stat = std::copysign(std::numeric_limits<double>::infinity(), r.diff);
    } else {
        r.t_stat = r.diff / se;
    }
    r.p_value = std::erfc(std::abs(r.t_stat) / std::sqrt(2.0));
    r.stars = significance_stars(r.p_value);
    return r;
}

void SplitPlan::validate() const
{
    if (test_end_year < test_start_year) {
        throw Error(Errc::InvalidArgument, "test window ends before it starts");
    }
    if (n_bankrupt_test == 0 || repetitions == 0) {
        throw Error(Errc::InvalidArgument, "n_bankrupt_test and repetitions must be positive");
    }
    if (train_fraction <= 0.0 || val_fraction < 0.0 || test_fraction <= 0.0) {
        throw Error(Errc::InvalidArgument, "split fractions must be positive");
    }
    if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
        throw Error(Errc::InvalidArgument, "split fractions must sum to 1");
    }
}

std::uint64_t repetition_seed(std::uint64_t seed, std::uint64_t repetition)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(repetition), static_cast<std::uint32_t>(repetition >> 32)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<Split> time_based_resample(const Dataset& data, const SplitPlan& plan)
{
    plan.validate();
    std::vector<std::size_t> window_bankrupt;
    std::vector<std::size_t> window_healthy;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& row = data.rows[i];
        if (row.fiscal_year < plan.test_start_year || row.fiscal_year > plan.test_end_year) {
            continue;
        }
        (row.brupt == 1 ? window_bankrupt : window_healthy).push_back(i);
    }
    const auto n = plan.n_bankrupt_test;
    if (window_bankrupt.size() < n || window_healthy.size() < n) {
        throw Error(Errc::WindowTooSparse,
                    fmt::format("window {}-{} has {} bankrupt and {} non-bankrupt observations; need {} of each",
                                plan.test_start_year, plan.test_end_year, window_bankrupt.size(),
                                window_healthy.size(), n));
    }
    std::stable_sort(window_bankrupt.begin(), window_bankrupt.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = data.rows[a];
        const auto& rb = data.rows[b];
        if (ra.filing_date != rb.filing_date) {
            return ra.filing_date > rb.filing_date;
        }
        return ra.firm_id < rb.firm_id;
    });
    const std::vector<std::size_t> fixed_bankrupt(window_bankrupt.begin(),
                                                  window_bankrupt.begin() + static_cast<std::ptrdiff_t>(n));
    const double train_share = plan.train_fraction / (plan.train_fraction + plan.val_fraction);

    std::vector<Split> splits;
    splits.reserve(plan.repetitions);
    for (std::size_t rep = 0; rep < plan.repetitions; ++rep) {
        std::mt19937_64 rng(repetition_seed(plan.rng_seed, rep));
        Split split;
        split.test = fixed_bankrupt;
        std::sample(window_healthy.begin(), window_healthy.end(), std::back_inserter(split.test),
                    static_cast<std::ptrdiff_t>(n), rng);

        std::vector<char> in_test(data.size(), 0);
        for (auto i : split.test) {
            in_test[i] = 1;
        }
        // Stratified train/validation split of the remainder so both parts keep both classes.
        for (int cls : {1, 0}) {
            std::vector<std::size_t> pool;
            for (std::size_t i = 0; i < data.size(); ++i) {
                if (!in_test[i] && data.rows[i].brupt == cls) {
                    pool.push_back(i);
                }
            }
            std::shuffle(pool.begin(), pool.end(), rng);
            const auto n_train = static_cast<std::size_t>(std::llround(train_share * static_cast<double>(pool.size())));
            split.train.insert(split.train.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_train));
            split.val.insert(split.val.end(), pool.begin() + static_cast<std::ptrdiff_t>(n_train), pool.end());
        }
        std::sort(split.train.begin(), split.train.end());
        std::sort(split.val.begin(), split.val.end());
        splits.push_back(std::move(split));
    }
    return splits;
}

SweepResult hyperparameter_sweep(std::span<const double> grid, const std::function<Accuracy(double)>& evaluate)
{
    if (grid.empty()) {
        throw Error(Errc::InvalidArgument, "hyperparameter grid is empty");
    }
    SweepResult result;
    for (double value : grid) {
        SweepRow row;
        row.value = value;
        try {
            row.metrics = evaluate(value);
        } catch (const Error& e) {
            row.error = std::string(to_string(e.code()));
        }
        result.rows.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const auto& row = result.rows[i];
        if (!row.metrics) {
            continue;
        }
        if (!result.best) {
            result.best = i;
            continue;
        }
        const auto& best = result.rows[*result.best];
        if (row.metrics->a2 > best.metrics->a2 || (row.metrics->a2 == best.metrics->a2 && row.value < best.value)) {
            result.best = i;
        }
    }
    return result;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n)
{
    if (!(lo > 0.0) || !(hi >= lo) || n == 0) {
        throw Error(Errc::InvalidArgument, "log grid needs 0 < lo <= hi and n > 0");
    }
    std::vector<double> grid(n, lo);
    if (n == 1) {
        return grid;
    }
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

Summary summarize(std::span<const double> values)
{
    Summary s;
    if (values.empty()) {
        return s;
    }
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) {
        ss += (v - s.mean) * (v - s.mean);
    }
    s.sd = std::sqrt(ss / n);
    return s;
}

nlohmann::json to_json(const MetricReport& report)
{
    auto stats = [](const std::vector<double>& v) {
        const auto s = summarize(v);
        return nlohmann::json{{"mean", s.mean}, {"sd", s.sd}, {"values", v}};
    };
    nlohmann::json j = {
        {"variable_set", report.variable_set},
        {"classifier", report.classifier},
        {"repetitions", report.a1.size()},
        {"A1", stats(report.a1)},
        {"A2", stats(report.a2)},
    };
    if (!report.r2_cox_snell.empty()) {
        j["R2_cox_snell"] = stats(report.r2_cox_snell);
        j["R2_nagelkerke"] = stats(report.r2_nagelkerke);
    }
    if (!report.selected.empty()) {
        j["selected_hyperparameter"] = report.selected;
    }
    if (!report.sweeps.empty()) {
        auto sweeps = nlohmann::json::array();
        for (const auto& sweep : report.sweeps) {
            auto rows = nlohmann::json::array();
            for (const auto& row : sweep.rows) {
                nlohmann::json r = {{"value", row.value}};
                if (row.metrics) {
                    r["A1"] = row.metrics->a1;
                    r["A2"] = row.metrics->a2;
                } else {
                    r["error"] = row.error;
                }
                rows.push_back(std::move(r));
            }
            sweeps.push_back({{"rows", std::move(rows)},
                              {"best", sweep.best ? nlohmann::json(*sweep.best) : nlohmann::json(nullptr)}});
        }
        j["sweeps"] = std::move(sweeps);
    }
    if (!report.failures.empty()) {
        j["failures"] = report.failures;
    }
    if (!report.error.empty()) {
        j["error"] = report.error;
    }
    return j;
}

}  // namespace distress
