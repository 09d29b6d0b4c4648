#include "helpers.hpp"

#include "distress/service_client.hpp"

#include "mock_service.hpp"

using namespace distress;

namespace {

ServiceOptions options(const testing::MockService& svc)
{
    ServiceOptions o;
    o.base_url = svc.url();
    o.timeout = std::chrono::milliseconds(2000);
    o.batch_size = 3;
    o.max_in_flight = 2;
    o.max_retries = 1;
    o.retry_backoff = std::chrono::milliseconds(1);
    return o;
}

}  // namespace

TEST_CASE("service backend batches requests and keeps input order")
{
    testing::MockService svc;
    const ServiceBackend backend(options(svc), "transformer-base", 4);
    std::vector<std::string> sentences;
    for (int i = 0; i < 10; ++i) {
        sentences.push_back(i % 3 == 0 ? "a loss here" : "strong year");
    }
    const auto rows = backend.score_batch(sentences);
    REQUIRE(rows.size() == 10);
    for (int i = 0; i < 10; ++i) {
        CHECK(argmax_class(validate_probabilities(rows[static_cast<std::size_t>(i)])) == (i % 3 == 0 ? 1 : 0));
    }
    CHECK(svc.score_requests == 4);
    CHECK(backend.name() == "service");
    CHECK(backend.model_version() == "transformer-base");
}

TEST_CASE("scoring through the service truncates to the backend limit")
{
    testing::MockService svc;
    const ServiceBackend backend(options(svc), "transformer-base", 4);
    MdnaDocument doc;
    doc.filing_id = "D";
    doc.sentences.push_back({"D", 0, "one two three four five six seven", 7});
    const auto scores = score_document(doc, backend);
    CHECK(scores.size() == 1);
    CHECK(svc.max_sentence_words == 4);
}

TEST_CASE("transport and status failures map to error codes")
{
    testing::MockService svc;
    auto o = options(svc);
    const std::vector<std::string> one = {"x"};

    svc.fail_score_with = 503;
    CHECK_ERRC(ServiceBackend(o, "v").score_batch(one), Errc::BackendUnavailable);
    CHECK(svc.score_requests == 2);

    svc.fail_score_with = 400;
    CHECK_ERRC(ServiceBackend(o, "v").score_batch(one), Errc::BackendRejected);

    svc.fail_score_with = 0;
    svc.two_element_rows = true;
    CHECK_ERRC(ServiceBackend(o, "v").score_batch(one), Errc::BackendRejected);

    ServiceOptions closed = o;
    closed.base_url = "http://127.0.0.1:1";
    CHECK_ERRC(ServiceBackend(closed, "v").score_batch(one), Errc::BackendUnavailable);

    o.batch_size = 0;
    CHECK_ERRC(ServiceBackend(o, "v"), Errc::InvalidArgument);
}

TEST_CASE("score response parsing")
{
    CHECK(parse_score_response("{\"probs\": [[0.2, 0.3, 0.5]]}", 1).size() == 1);
    CHECK_ERRC(parse_score_response("{\"probs\": [[0.2, 0.3, 0.5]]}", 2), Errc::BackendRejected);
    CHECK_ERRC(parse_score_response("{\"probs\": [[0.5, 0.5]]}", 1), Errc::BackendRejected);
    CHECK_ERRC(parse_score_response("{\"probs\": [[\"a\", 0.5, 0.5]]}", 1), Errc::BackendRejected);
    CHECK_ERRC(parse_score_response("not json", 1), Errc::BackendRejected);
    CHECK_ERRC(parse_score_response("{}", 0), Errc::BackendRejected);
}

TEST_CASE("training jobs are submitted and polled to completion")
{
    testing::MockService svc;
    const ServiceClient client(options(svc));
    TrainRequest req;
    req.base_model_version = "transformer-base";
    req.dataset = {{"covenant waiver", 1}, {"strong year", 0}};
    const auto id = client.submit_training(req);
    CHECK(svc.last_train_request.at("dataset").size() == 2);
    CHECK(svc.last_train_request.at("epochs") == 2);
    CHECK(svc.last_train_request.at("batch_size") == 32);
    CHECK(svc.last_train_request.at("learning_rate").get<double>() == doctest::Approx(5e-5));
    const auto job = client.wait_for_job(id, std::chrono::milliseconds(1), std::chrono::milliseconds(5000));
    CHECK(job.status == JobStatus::Done);
    REQUIRE(job.model_version.has_value());
    CHECK(job.model_version->find("dapt") != std::string::npos);
    CHECK(job.losses.size() == 2);
    CHECK(client.list_models() == std::vector<std::string>{"transformer-base"});

    CHECK_ERRC(client.get_job("job-999"), Errc::BackendRejected);
    req.dataset.clear();
    CHECK_ERRC(client.submit_training(req), Errc::EmptyTrainingSet);

    svc.fail_training = true;
    req.dataset = {{"x", 0}};
    const auto failed = client.wait_for_job(client.submit_training(req), std::chrono::milliseconds(1),
                                            std::chrono::milliseconds(5000));
    CHECK(failed.status == JobStatus::Failed);
    CHECK(failed.reason == std::optional<std::string>("diverged"));
}
