#pragma once

#include "distress/sentiment_scoring.hpp"

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace distress {

// Client side of the sentence-sentiment service HTTP/JSON API:
//   POST /v1/score  {model_version, sentences}      -> {probs: [[p_pos, p_neg, p_neu], ...]}
//   POST /v1/train  {base_model_version, dataset, epochs, batch_size, learning_rate} -> {job_id}
//   GET  /v1/train/{job_id}                          -> TrainJob
//   GET  /v1/models
struct ServiceOptions {
    std::string base_url;  // "http://host:port"
    std::chrono::milliseconds timeout{30000};
    std::size_t batch_size = 64;
    std::size_t max_in_flight = 4;
    int max_retries = 2;
    std::chrono::milliseconds retry_backoff{200};
};

// Parses a /v1/score response body and checks every row. Throws BackendRejected.
std::vector<RawProbs> parse_score_response(const std::string& body, std::size_t expected_rows);

class ServiceBackend final : public ScoringBackend {
public:
    ServiceBackend(ServiceOptions options, std::string model_version, std::size_t max_sentence_tokens = 512);

    [[nodiscard]] std::string name() const override { return "service"; }
    [[nodiscard]] std::string model_version() const override { return version_; }
    [[nodiscard]] std::size_t max_sentence_tokens() const override { return max_tokens_; }

    // Splits into batches and keeps at most max_in_flight requests outstanding; rows come back in input order.
    [[nodiscard]] std::vector<RawProbs> score_batch(std::span<const std::string> sentences) const override;

private:
    [[nodiscard]] std::vector<RawProbs> post_batch(std::span<const std::string> sentences) const;

    ServiceOptions options_;
    std::string version_;
    std::size_t max_tokens_;
};

enum class JobStatus { Pending, Running, Done, Failed };

struct TrainJob {
    std::string job_id;
    JobStatus status = JobStatus::Pending;
    std::optional<std::string> model_version;
    std::optional<std::string> reason;
    std::vector<double> losses;
};

struct TrainRequest {
    std::string base_model_version;
    std::vector<TrainingExample> dataset;
    int epochs = 2;
    std::size_t batch_size = 32;
    double learning_rate = 5e-5;
};

class ServiceClient {
public:
    explicit ServiceClient(ServiceOptions options);

    std::string submit_training(const TrainRequest& request) const;
    [[nodiscard]] TrainJob get_job(const std::string& job_id) const;
    [[nodiscard]] std::vector<std::string> list_models() const;

    // Polls until the job is terminal or the deadline passes (BackendUnavailable).
    TrainJob wait_for_job(const std::string& job_id, std::chrono::milliseconds poll_interval,
                          std::chrono::milliseconds deadline) const;

private:
    ServiceOptions options_;
};

}  // namespace distress
