#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace distress {

// Desk-scale substitute for a filings corpus plus a financial panel. Two latent AR(1) distress
// factors per firm drive bankruptcy: z_fin shows up in the ratios, z_text in the MD&A sentence mix.
struct SyntheticSpec {
    std::size_t n_firms = 900;  // active firms per year; bankrupt firms are replaced by entrants
    int first_year = 2009;
    int last_year = 2020;
    double base_rate = 0.06;    // mean annual bankruptcy probability
    double persistence = 0.6;   // AR(1) coefficient of both latent factors

    // Bankruptcy log-odds slopes on the latent factors.
    double fin_hazard_effect = 0.8;
    double text_hazard_effect = 2.0;
    // Loading of the ratios on z_fin (in ratio standard deviations).
    double fin_effect = 0.6;
    // Slope of the negative-sentence share on z_text.
    double text_effect = 1.2;

    // Of the negative sentences, the share written as hedged statements (positive vocabulary plus
    // domain-specific warnings the lexicon does not know).
    double hedged_share = 0.85;
    // Chance that an explicit negative sentence carries domain warning words.
    double domain_in_negative = 0.7;
    double positive_share = 0.35;
    int min_sentences = 16;
    int max_sentences = 24;
    double outlier_rate = 0.01;

    std::vector<std::string> positive_words;
    std::vector<std::string> negative_words;
    std::vector<std::string> domain_words;
    std::vector<std::string> neutral_words;

    std::uint64_t rng_seed = 7;

    // Fills empty vocabulary pools with the built-in ones.
    [[nodiscard]] SyntheticSpec with_default_vocabulary() const;

    // Throws InvalidArgument.
    void validate() const;
};

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SyntheticSpec& spec);

struct SyntheticOutput {
    std::filesystem::path index;        // filing index CSV
    std::filesystem::path financials;   // financial CSV
    std::filesystem::path positive_lexicon;
    std::filesystem::path negative_lexicon;
    std::filesystem::path manifest;
    std::size_t n_filings = 0;
    std::size_t n_bankrupt = 0;
    double intercept = 0.0;  // calibrated bankruptcy log-odds intercept
};

// Writes filings/<id>.txt, index.csv, financials.csv, lexicon/{positive,negative}.txt and
// manifest.json under `dir`. Output bytes depend only on the spec.
SyntheticOutput generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir);

// Intercept a such that E[logistic(a + s Z)] = rate for standard normal Z.
double calibrate_intercept(double rate, double slope);

}  // namespace distress
