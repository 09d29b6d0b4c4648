#include "distress/service_client.hpp"

#include "distress/errors.hpp"

#include <algorithm>
#include <future>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

namespace distress {

namespace {

httplib::Client make_client(const ServiceOptions& options)
{
    httplib::Client client(options.base_url);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    return client;
}

// Maps transport failures and HTTP status codes onto the library's error codes.
void check_response(const httplib::Result& res, std::string_view what)
{
    if (!res) {
        throw Error(Errc::BackendUnavailable, fmt::format("{}: {}", what, httplib::to_string(res.error())));
    }
    const int status = res->status;
    if (status >= 200 && status < 300) {
        return;
    }
    if (status >= 500 || status == 409 || status == 429) {
        throw Error(Errc::BackendUnavailable, fmt::format("{}: HTTP {}", what, status));
    }
    throw Error(Errc::BackendRejected, fmt::format("{}: HTTP {}: {}", what, status, res->body.substr(0, 200)));
}

nlohmann::json parse_body(const std::string& body, std::string_view what)
{
    try {
        return nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::BackendRejected, fmt::format("{}: malformed JSON: {}", what, e.what()));
    }
}

template <typename Fn>
auto with_retries(const ServiceOptions& options, Fn&& fn)
{
    for (int attempt = 0;; ++attempt) {
        try {
            return fn();
        } catch (const Error& e) {
            if (!e.retriable() || attempt >= options.max_retries) {
                throw;
            }
            std::this_thread::sleep_for(options.retry_backoff * (attempt + 1));
        }
    }
}

JobStatus parse_status(const std::string& s)
{
    if (s == "pending") return JobStatus::Pending;
    if (s == "running") return JobStatus::Running;
    if (s == "done") return JobStatus::Done;
    if (s == "failed") return JobStatus::Failed;
    throw Error(Errc::BackendRejected, fmt::format("unknown job status '{}'", s));
}

}  // namespace

std::vector<RawProbs> parse_score_response(const std::string& body, std::size_t expected_rows)
{
    const auto j = parse_body(body, "score response");
    if (!j.is_object() || !j.contains("probs") || !j["probs"].is_array()) {
        throw Error(Errc::BackendRejected, "score response lacks a 'probs' array");
    }
    const auto& probs = j["probs"];
    if (probs.size() != expected_rows) {
        throw Error(Errc::BackendRejected,
                    fmt::format("score response has {} rows for {} sentences", probs.size(), expected_rows));
    }
    std::vector<RawProbs> rows;
    rows.reserve(probs.size());
    for (const auto& row : probs) {
        if (!row.is_array() || !std::all_of(row.begin(), row.end(), [](const auto& v) { return v.is_number(); })) {
            throw Error(Errc::BackendRejected, "score row is not a numeric array");
        }
        RawProbs values = row.get<RawProbs>();
        validate_probabilities(values);
        rows.push_back(std::move(values));
    }
    return rows;
}

ServiceBackend::ServiceBackend(ServiceOptions options, std::string model_version, std::size_t max_sentence_tokens)
    : options_(std::move(options)), version_(std::move(model_version)), max_tokens_(max_sentence_tokens)
{
    if (options_.batch_size == 0 || options_.max_in_flight == 0) {
        throw Error(Errc::InvalidArgument, "batch_size and max_in_flight must be positive");
    }
}

std::vector<RawProbs> ServiceBackend::post_batch(std::span<const std::string> sentences) const
{
    return with_retries(options_, [&] {
        auto client = make_client(options_);
        const nlohmann::json request = {{"model_version", version_},
                                        {"sentences", std::vector<std::string>(sentences.begin(), sentences.end())}};
        const auto res = client.Post("/v1/score", request.dump(), "application/json");
        check_response(res, "POST /v1/score");
        return parse_score_response(res->body, sentences.size());
    });
}

std::vector<RawProbs> ServiceBackend::score_batch(std::span<const std::string> sentences) const
{
    std::vector<RawProbs> rows;
    rows.reserve(sentences.size());
    std::vector<std::future<std::vector<RawProbs>>> in_flight;
    std::size_t next = 0;
    auto drain_one = [&] {
        auto part = in_flight.front().get();
        in_flight.erase(in_flight.begin());
        std::move(part.begin(), part.end(), std::back_inserter(rows));
    };
    while (next < sentences.size()) {
        const auto count = std::min(options_.batch_size, sentences.size() - next);
        const auto slice = sentences.subspan(next, count);
        in_flight.push_back(std::async(std::launch::async, [this, slice] { return post_batch(slice); }));
        next += count;
        if (in_flight.size() >= options_.max_in_flight) {
            drain_one();
        }
    }
    while (!in_flight.empty()) {
        drain_one();
    }
    return rows;
}

ServiceClient::ServiceClient(ServiceOptions options) : options_(std::move(options)) {}

std::string ServiceClient::submit_training(const TrainRequest& request) const
{
    if (request.dataset.empty()) {
        throw Error(Errc::EmptyTrainingSet, "refusing to submit an empty dataset");
    }
    nlohmann::json dataset = nlohmann::json::array();
    for (const auto& ex : request.dataset) {
        dataset.push_back({{"text", ex.text}, {"label", ex.label}});
    }
    const nlohmann::json body = {{"base_model_version", request.base_model_version},
                                 {"dataset", std::move(dataset)},
                                 {"epochs", request.epochs},
                                 {"batch_size", request.batch_size},
                                 {"learning_rate", request.learning_rate}};
    return with_retries(options_, [&] {
        auto client = make_client(options_);
        const auto res = client.Post("/v1/train", body.dump(), "application/json");
        check_response(res, "POST /v1/train");
        const auto j = parse_body(res->body, "train response");
        if (!j.contains("job_id") || !j["job_id"].is_string()) {
            throw Error(Errc::BackendRejected, "train response lacks job_id");
        }
        return j["job_id"].get<std::string>();
    });
}

TrainJob ServiceClient::get_job(const std::string& job_id) const
{
    return with_retries(options_, [&] {
        auto client = make_client(options_);
        const auto res = client.Get("/v1/train/" + job_id);
        check_response(res, "GET /v1/train");
        const auto j = parse_body(res->body, "job response");
        TrainJob job;
        try {
            job.job_id = j.at("job_id").get<std::string>();
            job.status = parse_status(j.at("status").get<std::string>());
            if (j.contains("model_version") && j["model_version"].is_string()) {
                job.model_version = j["model_version"].get<std::string>();
            }
            if (j.contains("reason") && j["reason"].is_string()) {
                job.reason = j["reason"].get<std::string>();
            }
            if (j.contains("losses") && j["losses"].is_array()) {
                job.losses = j["losses"].get<std::vector<double>>();
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::BackendRejected, fmt::format("malformed job record: {}", e.what()));
        }
        return job;
    });
}

std::vector<std::string> ServiceClient::list_models() const
{
    return with_retries(options_, [&] {
        auto client = make_client(options_);
        const auto res = client.Get("/v1/models");
        check_response(res, "GET /v1/models");
        const auto j = parse_body(res->body, "models response");
        std::vector<std::string> versions;
        const auto& models = j.is_object() && j.contains("models") ? j["models"] : j;
        if (!models.is_array()) {
            throw Error(Errc::BackendRejected, "models response is not a list");
        }
        for (const auto& m : models) {
            if (m.is_string()) {
                versions.push_back(m.get<std::string>());
            } else if (m.is_object() && m.contains("model_version")) {
                versions.push_back(m["model_version"].get<std::string>());
            }
        }
        return versions;
    });
}

TrainJob ServiceClient::wait_for_job(const std::string& job_id, std::chrono::milliseconds poll_interval,
                                     std::chrono::milliseconds deadline) const
{
    const auto until = std::chrono::steady_clock::now() + deadline;
    for (;;) {
        auto job = get_job(job_id);
        if (job.status == JobStatus::Done || job.status == JobStatus::Failed) {
            return job;
        }
        if (std::chrono::steady_clock::now() >= until) {
            throw Error(Errc::BackendUnavailable, fmt::format("training job '{}' not finished before deadline", job_id));
        }
        std::this_thread::sleep_for(poll_interval);
    }
}

}  // namespace distress
