#include "distress/domain_adaptation.hpp"

#include "distress/errors.hpp"
#include "distress/io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace distress {

void AdaptationConfig::validate(std::size_t corpus_size) const
{
    if (!(entropy_threshold > 0.0 && entropy_threshold <= 1.0)) {
        throw Error(Errc::InvalidArgument, fmt::format("entropy_threshold {} outside (0, 1]", entropy_threshold));
    }
    if (n_classes < 2) {
        throw Error(Errc::InvalidArgument, "at least two classes are required");
    }
    if (rounds < 1) {
        throw Error(Errc::InvalidArgument, "rounds must be positive");
    }
    if (n_documents == 0 || n_documents > corpus_size) {
        throw Error(Errc::CorpusTooSmall,
                    fmt::format("need {} documents, corpus has {}", n_documents, corpus_size));
    }
}

double self_entropy(std::span<const double> p, double tolerance)
{
    if (p.size() < 2) {
        throw Error(Errc::InvalidDistribution, "need at least two classes");
    }
    double sum = 0.0;
    double h = 0.0;
    for (double v : p) {
        if (!std::isfinite(v) || v < 0.0) {
            throw Error(Errc::InvalidDistribution, fmt::format("negative or non-finite probability {}", v));
        }
        sum += v;
        if (v > 0.0) {
            h -= v * std::log(v);
        }
    }
    if (std::abs(sum - 1.0) > tolerance) {
        throw Error(Errc::InvalidDistribution, fmt::format("probabilities sum to {}", sum));
    }
    return std::clamp(h / std::log(static_cast<double>(p.size())), 0.0, 1.0);
}

std::vector<std::size_t> sample_documents(std::size_t corpus_size, std::size_t n_documents, std::uint64_t seed)
{
    if (n_documents > corpus_size) {
        throw Error(Errc::CorpusTooSmall, fmt::format("need {} documents, corpus has {}", n_documents, corpus_size));
    }
    std::vector<std::size_t> all(corpus_size);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<std::size_t> picked;
    picked.reserve(n_documents);
    std::mt19937_64 rng(seed);
    std::sample(all.begin(), all.end(), std::back_inserter(picked), static_cast<std::ptrdiff_t>(n_documents), rng);
    return picked;
}

std::vector<PseudoLabel> generate_pseudo_labels(std::span<const MdnaDocument> corpus, const ScoringBackend& backend,
                                                const AdaptationConfig& config, ScoreCache* cache)
{
    config.validate(corpus.size());
    const auto picked = sample_documents(corpus.size(), config.n_documents, config.rng_seed);
    std::vector<MdnaDocument> sample;
    sample.reserve(picked.size());
    for (auto i : picked) {
        sample.push_back(corpus[i]);
    }
    const auto scored = score_corpus(sample, backend, cache);

    std::vector<PseudoLabel> labels;
    for (std::size_t d = 0; d < sample.size(); ++d) {
        for (std::size_t s = 0; s < sample[d].sentences.size(); ++s) {
            PseudoLabel pl;
            pl.sentence = sample[d].sentences[s];
            pl.score = scored[d][s];
            pl.label = argmax_class(pl.score.p);
            pl.self_entropy = self_entropy(pl.score.p);
            labels.push_back(std::move(pl));
        }
    }
    return labels;
}

FilterResult filter_reliable(std::span<const PseudoLabel> labels, double threshold)
{
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw Error(Errc::InvalidArgument, fmt::format("threshold {} outside (0, 1]", threshold));
    }
    FilterResult result;
    std::copy_if(labels.begin(), labels.end(), std::back_inserter(result.retained),
                 [threshold](const PseudoLabel& pl) { return pl.self_entropy <= threshold; });
    result.retained_fraction =
        labels.empty() ? 0.0 : static_cast<double>(result.retained.size()) / static_cast<double>(labels.size());
    return result;
}

TrainingSetSummary emit_training_set(std::span<const PseudoLabel> labels, const std::filesystem::path& path,
                                     std::uint64_t seed)
{
    if (labels.empty()) {
        throw Error(Errc::EmptyTrainingSet, "no reliable pseudo-labels to emit");
    }
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    TrainingSetSummary summary;
    std::string out;
    for (auto i : order) {
        const auto& pl = labels[i];
        out += nlohmann::json{{"text", pl.sentence.text}, {"label", pl.label}}.dump();
        out += '\n';
        ++summary.class_counts.at(static_cast<std::size_t>(pl.label));
        ++summary.n_records;
    }
    io::write_text(path, out);
    return summary;
}

std::vector<TrainingExample> read_training_set(const std::filesystem::path& path)
{
    std::istringstream in(io::read_text(path));
    std::vector<TrainingExample> examples;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(line);
            examples.push_back({j.at("text").get<std::string>(), j.at("label").get<int>()});
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::InvalidArgument, fmt::format("bad training record in '{}': {}", path.string(), e.what()));
        }
    }
    return examples;
}

AdaptationOutcome prepare_adaptation_round(std::span<const MdnaDocument> corpus, const ScoringBackend& backend,
                                           const AdaptationConfig& config, const std::filesystem::path& training_set,
                                           ScoreCache* cache)
{
    const auto labels = generate_pseudo_labels(corpus, backend, config, cache);
    const auto filtered = filter_reliable(labels, config.entropy_threshold);

    AdaptationOutcome outcome;
    outcome.n_documents = config.n_documents;
    outcome.n_sentences = labels.size();
    outcome.n_retained = filtered.retained.size();
    outcome.retained_fraction = filtered.retained_fraction;
    outcome.summary = emit_training_set(filtered.retained, training_set, config.rng_seed);
    outcome.training_set = training_set;
    outcome.manifest = training_set;
    outcome.manifest += ".manifest.json";

    const nlohmann::json manifest = {
        {"config",
         {{"n_documents", config.n_documents},
          {"entropy_threshold", config.entropy_threshold},
          {"n_classes", config.n_classes},
          {"rng_seed", config.rng_seed},
          {"rounds", config.rounds}}},
        {"backend", {{"name", backend.name()}, {"model_version", backend.model_version()}}},
        {"n_sentences", outcome.n_sentences},
        {"n_retained", outcome.n_retained},
        {"retained_fraction", outcome.retained_fraction},
        {"class_counts", outcome.summary.class_counts},
    };
    io::write_text(outcome.manifest, manifest.dump(2) + "\n");
    return outcome;
}

}  // namespace distress
