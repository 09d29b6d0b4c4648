#pragma once

#include "distress/features.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace distress {

struct ConfusionCounts {
    std::size_t nb = 0;   // non-bankrupt total
    std::size_t b = 0;    // bankrupt total
    std::size_t cnb = 0;  // non-bankrupt classified non-bankrupt
    std::size_t cb = 0;   // bankrupt classified bankrupt
};

struct Accuracy {
    double a1 = 0.0;
    double a2 = 0.0;
};

// Throws EmptyClass when either class total is zero, InvalidArgument when a correct count exceeds its total.
Accuracy accuracy(const ConfusionCounts& counts);

ConfusionCounts confusion(std::span<const int> truth, std::span<const int> predicted);

struct PseudoR2 {
    double cox_snell = 0.0;
    double nagelkerke = 0.0;
};

// Cox-Snell 1 - exp(-2 (lf - l0) / n); Nagelkerke rescales by its maximum 1 - exp(2 l0 / n).
// Throws InvalidLikelihoodOrder (lf < l0) and InvalidArgument (n == 0).
PseudoR2 pseudo_r2(double log_lik_fit, double log_lik_null, std::size_t n);

struct TTestResult {
    double mean1 = 0.0;
    double mean0 = 0.0;
    double diff = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    std::string stars;
};

// Welch two-sample t on mean1 - mean0; p-value and stars from the normal approximation.
TTestResult univariate_ttest(std::span<const double> class1, std::span<const double> class0);

std::string significance_stars(double p_value);

struct SplitPlan {
    int test_start_year = 2018;
    int test_end_year = 2020;
    std::size_t n_bankrupt_test = 104;
    std::size_t repetitions = 100;
    double train_fraction = 0.6;
    double val_fraction = 0.2;
    double test_fraction = 0.2;
    std::uint64_t rng_seed = 0;

    // Throws InvalidArgument on fractions that do not sum to 1 or zero sizes.
    void validate() const;
};

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;  // bankrupt half first, then the sampled non-bankrupt half
};

// Indices into `data`. The bankrupt half of each test set is the n latest bankrupt observations in the
// window (by filing date, then firm id); the non-bankrupt half is drawn per repetition from a stream
// seeded by (rng_seed, repetition). Throws WindowTooSparse.
std::vector<Split> time_based_resample(const Dataset& data, const SplitPlan& plan);

// Deterministic per-repetition seed derived from (seed, repetition).
std::uint64_t repetition_seed(std::uint64_t seed, std::uint64_t repetition);

struct SweepRow {
    double value = 0.0;
    std::optional<Accuracy> metrics;
    std::string error;  // error code when the fit failed
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::optional<std::size_t> best;  // argmax A2, ties to the smaller value
};

// `evaluate` trains at one grid value and scores the validation set; thrown distress::Error values are
// recorded on the row and the sweep continues.
SweepResult hyperparameter_sweep(std::span<const double> grid, const std::function<Accuracy(double)>& evaluate);

std::vector<double> log_grid(double lo, double hi, std::size_t n);

struct Summary {
    double mean = 0.0;
    double sd = 0.0;  // population
};

Summary summarize(std::span<const double> values);

struct MetricReport {
    std::string variable_set;
    std::string classifier;
    std::vector<double> a1;
    std::vector<double> a2;
    std::vector<double> r2_cox_snell;  // hazard only
    std::vector<double> r2_nagelkerke;
    std::vector<double> selected;       // per repetition hyperparameter, when swept
    std::vector<SweepResult> sweeps;
    std::vector<std::string> failures;  // per repetition errors
    std::string error;                  // set when the whole cell failed
};

nlohmann::json to_json(const MetricReport& report);

}  // namespace distress
