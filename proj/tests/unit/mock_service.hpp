#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace testing {

// In-process stand-in for the sentence-sentiment service. Scores are a deterministic function of the
// sentence and model version; training jobs finish on the second poll.
class MockService {
public:
    MockService()
    {
        server_.Post("/v1/score", [this](const httplib::Request& req, httplib::Response& res) {
            ++score_requests;
            if (fail_score_with != 0) {
                res.status = fail_score_with;
                res.set_content("{\"error\": \"forced\"}", "application/json");
                return;
            }
            const auto j = nlohmann::json::parse(req.body);
            const auto version = j.at("model_version").get<std::string>();
            nlohmann::json probs = nlohmann::json::array();
            for (const auto& s : j.at("sentences")) {
                const auto text = s.get<std::string>();
                {
                    std::lock_guard lock(mutex_);
                    ++scored_sentences;
                    max_sentence_words = std::max(max_sentence_words, words(text));
                }
                if (two_element_rows) {
                    probs.push_back({0.5, 0.5});
                    continue;
                }
                std::string lower = text;
                std::transform(lower.begin(), lower.end(), lower.begin(),
                               [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
                const auto has = [&](const char* w) { return lower.find(w) != std::string::npos; };
                const bool adapted = version != base_version;
                if (has("loss") || has("decline") || (adapted && has("covenant"))) {
                    probs.push_back({0.01, 0.98, 0.01});
                } else if (has("strong") || has("improved") || has("gains")) {
                    probs.push_back({0.98, 0.01, 0.01});
                } else {
                    probs.push_back({0.15, 0.1, 0.75});
                }
            }
            res.set_content(nlohmann::json{{"probs", probs}}.dump(), "application/json");
        });
        server_.Post("/v1/train", [this](const httplib::Request& req, httplib::Response& res) {
            const auto j = nlohmann::json::parse(req.body);
            std::lock_guard lock(mutex_);
            last_train_request = j;
            const auto id = "job-" + std::to_string(++jobs_);
            polls_[id] = 0;
            res.set_content(nlohmann::json{{"job_id", id}}.dump(), "application/json");
        });
        server_.Get(R"(/v1/train/([\w-]+))", [this](const httplib::Request& req, httplib::Response& res) {
            std::lock_guard lock(mutex_);
            const auto id = req.matches[1].str();
            if (polls_.count(id) == 0) {
                res.status = 404;
                return;
            }
            nlohmann::json job = {{"job_id", id}, {"status", "running"}, {"losses", {0.9, 0.7}}};
            if (++polls_[id] >= 2) {
                if (fail_training) {
                    job["status"] = "failed";
                    job["reason"] = "diverged";
                } else {
                    job["status"] = "done";
                    job["model_version"] = base_version + "-dapt-" + id;
                }
            }
            res.set_content(job.dump(), "application/json");
        });
        server_.Get("/v1/models", [this](const httplib::Request&, httplib::Response& res) {
            res.set_content(nlohmann::json{{"models", {base_version}}}.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockService()
    {
        server_.stop();
        thread_.join();
    }

    MockService(const MockService&) = delete;
    MockService& operator=(const MockService&) = delete;

    [[nodiscard]] std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    std::string base_version = "transformer-base";
    std::atomic<int> fail_score_with{0};
    std::atomic<bool> two_element_rows{false};
    std::atomic<bool> fail_training{false};
    std::atomic<int> score_requests{0};
    std::size_t scored_sentences = 0;
    std::size_t max_sentence_words = 0;
    nlohmann::json last_train_request;

private:
    static std::size_t words(const std::string& s)
    {
        std::size_t n = 0;
        bool in = false;
        for (char c : s) {
            const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
            n += (!space && !in) ? 1 : 0;
            in = !space;
        }
        return n;
    }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::mutex mutex_;
    int jobs_ = 0;
    std::map<std::string, int> polls_;
};

}  // namespace testing
