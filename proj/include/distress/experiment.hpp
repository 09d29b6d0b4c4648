#pragma once

#include "distress/classifiers.hpp"
#include "distress/domain_adaptation.hpp"
#include "distress/evaluation.hpp"
#include "distress/features.hpp"
#include "distress/synthetic.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace distress {

enum class ClassifierKind { Hazard, Knn, Svm };

std::string_view to_string(ClassifierKind kind) noexcept;
ClassifierKind parse_classifier(std::string_view text);

enum class Stage { Synth, Extract, Tone, Score, Adapt, Features, Evaluate, Report };

std::string_view to_string(Stage stage) noexcept;
Stage parse_stage(std::string_view text);
inline constexpr std::array<Stage, 8> kStages = {Stage::Synth, Stage::Extract,  Stage::Tone,     Stage::Score,
                                                 Stage::Adapt, Stage::Features, Stage::Evaluate, Stage::Report};

struct ScoringConfig {
    std::string backend = "stub";  // "stub" or "service"
    double bert_temperature = 1.0;
    double w2v_temperature = 1.5;
    std::size_t bert_max_tokens = 512;
    std::size_t w2v_max_tokens = 50;
    std::string service_url;
    std::string bert_model = "transformer-base";
    std::string w2v_model = "w2v-cnn-base";
    std::chrono::milliseconds timeout{30000};
    std::size_t batch_size = 64;
    std::size_t max_in_flight = 4;
};

struct AdaptationSettings {
    AdaptationConfig config;
    int epochs = 2;
    std::size_t batch_size = 32;
    double learning_rate = 0.05;          // offline token-weight trainer
    double service_learning_rate = 5e-5;  // remote trainer
    std::chrono::milliseconds poll_interval{500};
    std::chrono::milliseconds deadline{600000};
};

struct ClassifierSettings {
    int knn_k = 5;
    double svm_c = 1e-5;
    double hazard_threshold = 0.5;
    std::vector<double> knn_grid = {3, 5, 7, 9, 11};
    std::vector<double> svm_grid;  // defaults to 10 log-spaced values in [1e-5, 1]
    std::size_t sweep_repetitions = 1;
};

struct ExperimentConfig {
    std::filesystem::path source;  // the config file, when loaded from one
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = "out";
    std::optional<SyntheticSpec> synthetic;
    std::filesystem::path index;
    std::filesystem::path financials;
    std::filesystem::path positive_lexicon;
    std::filesystem::path negative_lexicon;
    std::filesystem::path abbreviations;
    ScoringConfig scoring;
    AdaptationSettings adaptation;
    std::vector<VariableSet> variable_sets;
    std::vector<ClassifierKind> classifiers;
    SplitPlan split;
    double winsor_level = 0.01;
    bool balance_training = true;
    ClassifierSettings classifier;
    std::size_t threads = 0;  // 0 = hardware concurrency

    // Canonical JSON used for hashing and the run manifest.
    [[nodiscard]] nlohmann::json to_json() const;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> backend_url;
    std::optional<std::filesystem::path> out_dir;
};

// Parses a JSON config; relative paths resolve against the file's directory. DISTRESS_BACKEND_URL and
// DISTRESS_OUT_DIR override the file, explicit overrides win over both. Throws InvalidConfig.
ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir,
                              const Overrides& overrides = {});

struct StageRecord {
    std::string key;
    bool cache_hit = false;
    double seconds = 0.0;
};

struct RunSummary {
    std::map<std::string, StageRecord> stages;
    std::vector<MetricReport> cells;
    std::size_t failed_cells = 0;
    std::filesystem::path manifest;
    std::filesystem::path table;
    std::filesystem::path metrics;

    // 0 when every cell succeeded, 1 when some cell failed.
    [[nodiscard]] int exit_code() const noexcept { return failed_cells == 0 ? 0 : 1; }
};

// Runs every stage up to and including `last`, reusing cached stage outputs whose input hash is
// unchanged. Cell-level failures are recorded, stage-level failures throw.
RunSummary run_pipeline(const ExperimentConfig& config, Stage last = Stage::Report);

// One (variable set x classifier) cell over the resampling plan.
MetricReport evaluate_cell(const Dataset& data, const std::vector<Split>& splits, ClassifierKind classifier,
                           const ExperimentConfig& config);

// Per-cell metric table (CSV) and a grouped A2 bar chart (SVG).
std::string render_table(const std::vector<MetricReport>& cells);
std::string render_chart(const std::vector<MetricReport>& cells);

}  // namespace distress
