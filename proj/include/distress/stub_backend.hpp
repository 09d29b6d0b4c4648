#pragma once

#include "distress/lexicon_tone.hpp"
#include "distress/sentiment_scoring.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace distress {

inline constexpr double kStubNeutralPrior = 0.5;

// softmax((n_pos, n_neg, 0.5) / temperature) over the sentence's lexicon hits. Throws InvalidArgument
// for a non-positive temperature.
ClassProbs stub_score(std::string_view sentence, const Lexicon& lexicon, double temperature);
SentenceScore stub_score(const Sentence& sentence, const Lexicon& lexicon, double temperature);

// Offline sentence classifier: every token carries a class-weight triple, the sentence logits are
// (sum of token weights + bias) / temperature. Initialised from a lexicon it reproduces stub_score
// exactly; fine-tuning on labelled sentences moves the weights.
class TokenWeightModel {
public:
    using Weights = std::array<double, kNumClasses>;

    static TokenWeightModel from_lexicon(const Lexicon& lexicon, double temperature);

    [[nodiscard]] ClassProbs predict(std::string_view sentence) const;
    [[nodiscard]] Weights logits(std::span<const std::string> tokens) const;

    [[nodiscard]] double temperature() const noexcept { return temperature_; }
    [[nodiscard]] const Weights& bias() const noexcept { return bias_; }
    [[nodiscard]] const std::unordered_map<std::string, Weights>& weights() const noexcept { return weights_; }

    [[nodiscard]] nlohmann::json to_json() const;
    static TokenWeightModel from_json(const nlohmann::json& j);

    // Content hash of the serialized parameters.
    [[nodiscard]] std::string fingerprint() const;

private:
    friend struct FineTuner;

    double temperature_ = 1.0;
    Weights bias_{};
    std::unordered_map<std::string, Weights> weights_;
};

struct FineTuneOptions {
    int epochs = 2;
    std::size_t batch_size = 32;
    double learning_rate = 0.05;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
};

struct FineTuneResult {
    TokenWeightModel model;
    std::vector<double> step_losses;
    std::vector<double> epoch_mean_losses;
};

// Cross-entropy fine-tuning with Adam over all token weights and the bias.
// Throws EmptyTrainingSet or InvalidArgument on labels outside {0, 1, 2}.
FineTuneResult fine_tune(const TokenWeightModel& base, std::span<const TrainingExample> examples,
                         const FineTuneOptions& options);

// ScoringBackend over a TokenWeightModel; the version string names the parameter set.
class StubBackend final : public ScoringBackend {
public:
    StubBackend(TokenWeightModel model, std::string model_version, std::size_t max_sentence_tokens = 512,
                std::string name = "stub");

    // The plain lexicon stub; the version is derived from the parameter fingerprint.
    static StubBackend lexicon(const Lexicon& lex, double temperature, std::size_t max_sentence_tokens = 512,
                               std::string name = "stub");

    [[nodiscard]] std::string name() const override { return name_; }
    [[nodiscard]] std::string model_version() const override { return version_; }
    [[nodiscard]] std::size_t max_sentence_tokens() const override { return max_tokens_; }
    [[nodiscard]] std::vector<RawProbs> score_batch(std::span<const std::string> sentences) const override;

    [[nodiscard]] const TokenWeightModel& model() const noexcept { return model_; }

private:
    TokenWeightModel model_;
    std::string version_;
    std::size_t max_tokens_;
    std::string name_;
};

}  // namespace distress
