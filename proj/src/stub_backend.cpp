#include "distress/stub_backend.hpp"

#include "distress/errors.hpp"
#include "distress/io.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace distress {

namespace {

ClassProbs softmax(const std::array<double, kNumClasses>& logits)
{
    const double peak = *std::max_element(logits.begin(), logits.end());
    ClassProbs p{};
    double sum = 0.0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        p[c] = std::exp(logits[c] - peak);
        sum += p[c];
    }
    for (auto& v : p) {
        v /= sum;
    }
    return p;
}

void require_temperature(double temperature)
{
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw Error(Errc::InvalidArgument, fmt::format("temperature must be positive, got {}", temperature));
    }
}

}  // namespace

ClassProbs stub_score(std::string_view sentence, const Lexicon& lexicon, double temperature)
{
    require_temperature(temperature);
    double n_pos = 0.0;
    double n_neg = 0.0;
    for (const auto& token : tokenize_words(sentence)) {
        if (lexicon.is_positive(token)) {
            n_pos += 1.0;
        } else if (lexicon.is_negative(token)) {
            n_neg += 1.0;
        }
    }
    return softmax({n_pos / temperature, n_neg / temperature, kStubNeutralPrior / temperature});
}

SentenceScore stub_score(const Sentence& sentence, const Lexicon& lexicon, double temperature)
{
    return {sentence.doc_id, sentence.index, stub_score(sentence.text, lexicon, temperature)};
}

TokenWeightModel TokenWeightModel::from_lexicon(const Lexicon& lexicon, double temperature)
{
    require_temperature(temperature);
    TokenWeightModel model;
    model.temperature_ = temperature;
    model.bias_ = {0.0, 0.0, kStubNeutralPrior};
    for (const auto& w : lexicon.positive) {
        model.weights_[w] = {1.0, 0.0, 0.0};
    }
    for (const auto& w : lexicon.negative) {
        model.weights_[w] = {0.0, 1.0, 0.0};
    }
    return model;
}

TokenWeightModel::Weights TokenWeightModel::logits(std::span<const std::string> tokens) const
{
    Weights z = bias_;
    for (const auto& token : tokens) {
        const auto it = weights_.find(token);
        if (it == weights_.end()) {
            continue;
        }
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            z[c] += it->second[c];
        }
    }
    for (auto& v : z) {
        v /= temperature_;
    }
    return z;
}

ClassProbs TokenWeightModel::predict(std::string_view sentence) const
{
    const auto tokens = tokenize_words(sentence);
    return softmax(logits(tokens));
}

nlohmann::json TokenWeightModel::to_json() const
{
    // Sorted keys keep the serialization, and so the fingerprint, stable.
    std::map<std::string, Weights> sorted(weights_.begin(), weights_.end());
    nlohmann::json w = nlohmann::json::object();
    for (const auto& [token, weights] : sorted) {
        w[token] = weights;
    }
    return {{"kind", "token_weight"}, {"temperature", temperature_}, {"bias", bias_}, {"weights", std::move(w)}};
}

TokenWeightModel TokenWeightModel::from_json(const nlohmann::json& j)
{
    TokenWeightModel model;
    model.temperature_ = j.at("temperature").get<double>();
    require_temperature(model.temperature_);
    model.bias_ = j.at("bias").get<Weights>();
    for (const auto& [token, weights] : j.at("weights").items()) {
        model.weights_[token] = weights.get<Weights>();
    }
    return model;
}

std::string TokenWeightModel::fingerprint() const
{
    return io::sha256_hex(to_json().dump());
}

struct FineTuner {
    static FineTuneResult run(const TokenWeightModel& base, std::span<const TrainingExample> examples,
                              const FineTuneOptions& options)
    {
        if (examples.empty()) {
            throw Error(Errc::EmptyTrainingSet, "no training examples");
        }
        if (options.epochs < 1 || options.batch_size == 0 || !(options.learning_rate > 0.0)) {
            throw Error(Errc::InvalidArgument, "epochs, batch_size and learning_rate must be positive");
        }

        // Dense parameter layout: vocabulary rows (sorted for determinism), then the bias row.
        std::map<std::string, TokenWeightModel::Weights> vocab(base.weights_.begin(), base.weights_.end());
        std::vector<std::vector<std::string>> tokenized;
        tokenized.reserve(examples.size());
        for (const auto& ex : examples) {
            if (ex.label < 0 || ex.label >= static_cast<int>(kNumClasses)) {
                throw Error(Errc::InvalidArgument, fmt::format("label {} outside {{0, 1, 2}}", ex.label));
            }
            tokenized.push_back(tokenize_words(ex.text));
            for (const auto& t : tokenized.back()) {
                vocab.try_emplace(t, TokenWeightModel::Weights{});
            }
        }
        std::unordered_map<std::string, std::size_t> row_of;
        std::vector<double> params;
        params.reserve((vocab.size() + 1) * kNumClasses);
        for (const auto& [token, w] : vocab) {
            row_of.emplace(token, params.size() / kNumClasses);
            params.insert(params.end(), w.begin(), w.end());
        }
        const std::size_t bias_row = params.size() / kNumClasses;
        params.insert(params.end(), base.bias_.begin(), base.bias_.end());

        std::vector<std::vector<std::size_t>> rows(examples.size());
        for (std::size_t n = 0; n < examples.size(); ++n) {
            for (const auto& t : tokenized[n]) {
                rows[n].push_back(row_of.at(t));
            }
        }

        const double inv_t = 1.0 / base.temperature_;
        std::vector<double> m(params.size(), 0.0);
        std::vector<double> v(params.size(), 0.0);
        std::vector<double> grad(params.size(), 0.0);
        std::vector<std::size_t> order(examples.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(options.seed);

        FineTuneResult result;
        long step = 0;
        for (int epoch = 0; epoch < options.epochs; ++epoch) {
            std::shuffle(order.begin(), order.end(), rng);
            double epoch_loss = 0.0;
            std::size_t epoch_steps = 0;
            for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
                const std::size_t end = std::min(order.size(), begin + options.batch_size);
                std::fill(grad.begin(), grad.end(), 0.0);
                double batch_loss = 0.0;
                for (std::size_t b = begin; b < end; ++b) {
                    const auto n = order[b];
                    std::array<double, kNumClasses> z{};
                    for (std::size_t c = 0; c < kNumClasses; ++c) {
                        z[c] = params[bias_row * kNumClasses + c];
                    }
                    for (auto r : rows[n]) {
                        for (std::size_t c = 0; c < kNumClasses; ++c) {
                            z[c] += params[r * kNumClasses + c];
                        }
                    }
                    for (auto& value : z) {
                        value *= inv_t;
                    }
                    const auto p = softmax(z);
                    const auto label = static_cast<std::size_t>(examples[n].label);
                    batch_loss -= std::log(std::max(p[label], 1e-300));
                    std::array<double, kNumClasses> dz{};
                    for (std::size_t c = 0; c < kNumClasses; ++c) {
                        dz[c] = (p[c] - (c == label ? 1.0 : 0.0)) * inv_t;
                    }
                    for (auto r : rows[n]) {
                        for (std::size_t c = 0; c < kNumClasses; ++c) {
                            grad[r * kNumClasses + c] += dz[c];
                        }
                    }
                    for (std::size_t c = 0; c < kNumClasses; ++c) {
                        grad[bias_row * kNumClasses + c] += dz[c];
                    }
                }
                const double scale = 1.0 / static_cast<double>(end - begin);
                ++step;
                const double correction1 = 1.0 - std::pow(options.beta1, static_cast<double>(step));
                const double correction2 = 1.0 - std::pow(options.beta2, static_cast<double>(step));
                for (std::size_t i = 0; i < params.size(); ++i) {
                    if (grad[i] == 0.0) {
                        continue;
                    }
                    const double g = grad[i] * scale;
                    m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * g;
                    v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * g * g;
                    const double m_hat = m[i] / correction1;
                    const double v_hat = v[i] / correction2;
                    params[i] -= options.learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon);
                }
                const double mean_loss = batch_loss * scale;
                result.step_losses.push_back(mean_loss);
                epoch_loss += mean_loss;
                ++epoch_steps;
            }
            result.epoch_mean_losses.push_back(epoch_loss / static_cast<double>(epoch_steps));
        }

        TokenWeightModel tuned;
        tuned.temperature_ = base.temperature_;
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            tuned.bias_[c] = params[bias_row * kNumClasses + c];
        }
        for (const auto& [token, row] : row_of) {
            TokenWeightModel::Weights w{};
            for (std::size_t c = 0; c < kNumClasses; ++c) {
                w[c] = params[row * kNumClasses + c];
            }
            tuned.weights_.emplace(token, w);
        }
        result.model = std::move(tuned);
        return result;
    }
};

FineTuneResult fine_tune(const TokenWeightModel& base, std::span<const TrainingExample> examples,
                         const FineTuneOptions& options)
{
    return FineTuner::run(base, examples, options);
}

StubBackend::StubBackend(TokenWeightModel model, std::string model_version, std::size_t max_sentence_tokens,
                         std::string name)
    : model_(std::move(model)), version_(std::move(model_version)), max_tokens_(max_sentence_tokens),
      name_(std::move(name))
{
}

StubBackend StubBackend::lexicon(const Lexicon& lex, double temperature, std::size_t max_sentence_tokens,
                                 std::string name)
{
    auto model = TokenWeightModel::from_lexicon(lex, temperature);
    auto version = "lexicon-" + model.fingerprint().substr(0, 12);
    return StubBackend(std::move(model), std::move(version), max_sentence_tokens, std::move(name));
}

std::vector<RawProbs> StubBackend::score_batch(std::span<const std::string> sentences) const
{
    std::vector<RawProbs> rows;
    rows.reserve(sentences.size());
    for (const auto& s : sentences) {
        const auto p = model_.predict(s);
        rows.emplace_back(p.begin(), p.end());
    }
    return rows;
}

}  // namespace distress
