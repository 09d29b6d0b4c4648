#include "distress/experiment.hpp"

#include "distress/errors.hpp"
#include "distress/filing_corpus.hpp"
#include "distress/io.hpp"
#include "distress/lexicon_tone.hpp"
#include "distress/service_client.hpp"
#include "distress/stub_backend.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <mutex>
#include <random>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace distress {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(ClassifierKind kind) noexcept
{
    switch (kind) {
        case ClassifierKind::Hazard: return "hazard";
        case ClassifierKind::Knn: return "knn";
        case ClassifierKind::Svm: return "svm";
    }
    return "hazard";
}

ClassifierKind parse_classifier(std::string_view text)
{
    for (auto k : {ClassifierKind::Hazard, ClassifierKind::Knn, ClassifierKind::Svm}) {
        if (to_string(k) == text) {
            return k;
        }
    }
    throw Error(Errc::InvalidConfig, fmt::format("unknown classifier '{}'", text));
}

std::string_view to_string(Stage stage) noexcept
{
    switch (stage) {
        case Stage::Synth: return "synth";
        case Stage::Extract: return "extract";
        case Stage::Tone: return "tone";
        case Stage::Score: return "score";
        case Stage::Adapt: return "adapt";
        case Stage::Features: return "features";
        case Stage::Evaluate: return "evaluate";
        case Stage::Report: return "report";
    }
    return "report";
}

Stage parse_stage(std::string_view text)
{
    for (auto s : kStages) {
        if (to_string(s) == text) {
            return s;
        }
    }
    throw Error(Errc::InvalidConfig, fmt::format("unknown stage '{}'", text));
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p)
{
    const fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::vector<std::string> names_of(const std::vector<VariableSet>& sets)
{
    std::vector<std::string> out;
    for (auto s : sets) {
        out.emplace_back(to_string(s));
    }
    return out;
}

std::vector<std::string> names_of(const std::vector<ClassifierKind>& kinds)
{
    std::vector<std::string> out;
    for (auto k : kinds) {
        out.emplace_back(to_string(k));
    }
    return out;
}

std::string path_string(const fs::path& p) { return p.empty() ? std::string() : p.generic_string(); }

}  // namespace

json ExperimentConfig::to_json() const
{
    json j = {
        {"seed", seed},
        {"out_dir", path_string(out_dir)},
        {"corpus",
         {{"index", path_string(index)},
          {"financials", path_string(financials)},
          {"lexicon", {{"positive", path_string(positive_lexicon)}, {"negative", path_string(negative_lexicon)}}},
          {"abbreviations", path_string(abbreviations)}}},
        {"scoring",
         {{"backend", scoring.backend},
          {"stub", {{"bert_temperature", scoring.bert_temperature}, {"w2v_temperature", scoring.w2v_temperature}}},
          {"max_tokens", {{"BERT", scoring.bert_max_tokens}, {"W2V", scoring.w2v_max_tokens}}},
          {"service",
           {{"url", scoring.service_url},
            {"bert_model", scoring.bert_model},
            {"w2v_model", scoring.w2v_model},
            {"timeout_ms", scoring.timeout.count()},
            {"batch_size", scoring.batch_size},
            {"max_in_flight", scoring.max_in_flight}}}}},
        {"adaptation",
         {{"n_documents", adaptation.config.n_documents},
          {"entropy_threshold", adaptation.config.entropy_threshold},
          {"n_classes", adaptation.config.n_classes},
          {"rounds", adaptation.config.rounds},
          {"epochs", adaptation.epochs},
          {"batch_size", adaptation.batch_size},
          {"learning_rate", adaptation.learning_rate},
          {"service_learning_rate", adaptation.service_learning_rate},
          {"poll_ms", adaptation.poll_interval.count()},
          {"deadline_ms", adaptation.deadline.count()}}},
        {"variable_sets", names_of(variable_sets)},
        {"classifiers", names_of(classifiers)},
        {"split",
         {{"test_start_year", split.test_start_year},
          {"test_end_year", split.test_end_year},
          {"n_bankrupt_test", split.n_bankrupt_test},
          {"repetitions", split.repetitions},
          {"train_fraction", split.train_fraction},
          {"val_fraction", split.val_fraction},
          {"test_fraction", split.test_fraction}}},
        {"features", {{"winsor_level", winsor_level}, {"balance_training", balance_training}}},
        {"classifier_options",
         {{"knn_k", classifier.knn_k},
          {"svm_C", classifier.svm_c},
          {"hazard_threshold", classifier.hazard_threshold},
          {"knn_grid", classifier.knn_grid},
          {"svm_grid", classifier.svm_grid},
          {"sweep_repetitions", classifier.sweep_repetitions}}},
        {"threads", threads},
    };
    if (synthetic) {
        j["synthetic"] = distress::to_json(*synthetic);
    }
    return j;
}

ExperimentConfig parse_config(const json& j, const fs::path& base_dir, const Overrides& overrides)
{
    ExperimentConfig c;
    try {
        c.seed = j.value("seed", std::uint64_t{0});
        if (overrides.seed) {
            c.seed = *overrides.seed;
        }
        c.out_dir = resolve(base_dir, j.value("out_dir", std::string("out")));
        if (const char* env = std::getenv("DISTRESS_OUT_DIR"); env != nullptr && *env != '\0') {
            c.out_dir = env;
        }
        if (overrides.out_dir) {
            c.out_dir = *overrides.out_dir;
        }

        const json corpus = j.value("corpus", json::object());
        if (j.contains("synthetic")) {
            json spec = j.at("synthetic");
            if (!spec.contains("rng_seed")) {
                spec["rng_seed"] = c.seed;
            }
            c.synthetic = synthetic_spec_from_json(spec).with_default_vocabulary();
            const fs::path data = c.out_dir / "data";
            c.index = data / "index.csv";
            c.financials = data / "financials.csv";
            c.positive_lexicon = data / "lexicon" / "positive.txt";
            c.negative_lexicon = data / "lexicon" / "negative.txt";
        } else {
            c.index = resolve(base_dir, corpus.at("index").get<std::string>());
            c.financials = resolve(base_dir, corpus.at("financials").get<std::string>());
            c.positive_lexicon = resolve(base_dir, corpus.at("lexicon").at("positive").get<std::string>());
            c.negative_lexicon = resolve(base_dir, corpus.at("lexicon").at("negative").get<std::string>());
        }
        if (corpus.contains("abbreviations")) {
            c.abbreviations = resolve(base_dir, corpus.at("abbreviations").get<std::string>());
        }

        const json scoring = j.value("scoring", json::object());
        c.scoring.backend = scoring.value("backend", c.scoring.backend);
        const json stub = scoring.value("stub", json::object());
        c.scoring.bert_temperature = stub.value("bert_temperature", c.scoring.bert_temperature);
        c.scoring.w2v_temperature = stub.value("w2v_temperature", c.scoring.w2v_temperature);
        const json max_tokens = scoring.value("max_tokens", json::object());
        c.scoring.bert_max_tokens = max_tokens.value("BERT", c.scoring.bert_max_tokens);
        c.scoring.w2v_max_tokens = max_tokens.value("W2V", c.scoring.w2v_max_tokens);
        const json service = scoring.value("service", json::object());
        c.scoring.service_url = service.value("url", c.scoring.service_url);
        c.scoring.bert_model = service.value("bert_model", c.scoring.bert_model);
        c.scoring.w2v_model = service.value("w2v_model", c.scoring.w2v_model);
        c.scoring.timeout = std::chrono::milliseconds(service.value("timeout_ms", c.scoring.timeout.count()));
        c.scoring.batch_size = service.value("batch_size", c.scoring.batch_size);
        c.scoring.max_in_flight = service.value("max_in_flight", c.scoring.max_in_flight);
        if (const char* env = std::getenv("DISTRESS_BACKEND_URL"); env != nullptr && *env != '\0') {
            c.scoring.service_url = env;
            c.scoring.backend = "service";
        }
        if (overrides.backend_url) {
            c.scoring.service_url = *overrides.backend_url;
            c.scoring.backend = "service";
        }
        if (c.scoring.backend != "stub" && c.scoring.backend != "service") {
            throw Error(Errc::InvalidConfig, fmt::format("unknown scoring backend '{}'", c.scoring.backend));
        }
        if (c.scoring.backend == "service" && c.scoring.service_url.empty()) {
            throw Error(Errc::InvalidConfig, "the service backend needs a URL");
        }

        const json adapt = j.value("adaptation", json::object());
        c.adaptation.config.n_documents = adapt.value("n_documents", c.adaptation.config.n_documents);
        c.adaptation.config.entropy_threshold = adapt.value("entropy_threshold", c.adaptation.config.entropy_threshold);
        c.adaptation.config.n_classes = adapt.value("n_classes", c.adaptation.config.n_classes);
        c.adaptation.config.rounds = adapt.value("rounds", c.adaptation.config.rounds);
        c.adaptation.config.rng_seed = c.seed;
        c.adaptation.epochs = adapt.value("epochs", c.adaptation.epochs);
        c.adaptation.batch_size = adapt.value("batch_size", c.adaptation.batch_size);
        c.adaptation.learning_rate = adapt.value("learning_rate", c.adaptation.learning_rate);
        c.adaptation.service_learning_rate = adapt.value("service_learning_rate", c.adaptation.service_learning_rate);
        c.adaptation.poll_interval = std::chrono::milliseconds(adapt.value("poll_ms", c.adaptation.poll_interval.count()));
        c.adaptation.deadline = std::chrono::milliseconds(adapt.value("deadline_ms", c.adaptation.deadline.count()));

        for (const auto& s : j.value("variable_sets", std::vector<std::string>{"FIN", "FIN+DICT", "FIN+W2V", "FIN+BERT",
                                                                              "FIN+DAPT"})) {
            c.variable_sets.push_back(parse_variable_set(s));
        }
        for (const auto& s : j.value("classifiers", std::vector<std::string>{"hazard", "knn", "svm"})) {
            c.classifiers.push_back(parse_classifier(s));
        }
        if (c.variable_sets.empty() || c.classifiers.empty()) {
            throw Error(Errc::InvalidConfig, "at least one variable set and one classifier are required");
        }

        const json split = j.value("split", json::object());
        c.split.test_start_year = split.value("test_start_year", c.split.test_start_year);
        c.split.test_end_year = split.value("test_end_year", c.split.test_end_year);
        c.split.n_bankrupt_test = split.value("n_bankrupt_test", c.split.n_bankrupt_test);
        c.split.repetitions = split.value("repetitions", c.split.repetitions);
        c.split.train_fraction = split.value("train_fraction", c.split.train_fraction);
        c.split.val_fraction = split.value("val_fraction", c.split.val_fraction);
        c.split.test_fraction = split.value("test_fraction", c.split.test_fraction);
        c.split.rng_seed = c.seed;
        c.split.validate();

        const json features = j.value("features", json::object());
        c.winsor_level = features.value("winsor_level", c.winsor_level);
        c.balance_training = features.value("balance_training", c.balance_training);

        const json opts = j.value("classifier_options", json::object());
        c.classifier.knn_k = opts.value("knn_k", c.classifier.knn_k);
        c.classifier.svm_c = opts.value("svm_C", c.classifier.svm_c);
        c.classifier.hazard_threshold = opts.value("hazard_threshold", c.classifier.hazard_threshold);
        c.classifier.knn_grid = opts.value("knn_grid", c.classifier.knn_grid);
        c.classifier.svm_grid = log_grid(1e-5, 1.0, 10);
        if (opts.contains("svm_grid")) {
            const auto& g = opts.at("svm_grid");
            c.classifier.svm_grid = g.is_array() ? g.get<std::vector<double>>()
                                                 : log_grid(g.at("min").get<double>(), g.at("max").get<double>(),
                                                            g.at("n").get<std::size_t>());
        }
        c.classifier.sweep_repetitions = opts.value("sweep_repetitions", c.classifier.sweep_repetitions);
        c.threads = j.value("threads", c.threads);
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidConfig, fmt::format("malformed config: {}", e.what()));
    } catch (const Error& e) {
        if (e.code() == Errc::InvalidConfig) {
            throw;
        }
        throw Error(Errc::InvalidConfig, e.what());
    }

    if (!c.synthetic) {
        for (const auto& p : {c.index, c.financials, c.positive_lexicon, c.negative_lexicon}) {
            if (!fs::exists(p)) {
                throw Error(Errc::InvalidConfig, fmt::format("configured path '{}' does not exist", p.string()));
            }
        }
    }
    if (!c.abbreviations.empty() && !fs::exists(c.abbreviations)) {
        throw Error(Errc::InvalidConfig, fmt::format("abbreviation list '{}' does not exist", c.abbreviations.string()));
    }
    return c;
}

ExperimentConfig load_config(const fs::path& path, const Overrides& overrides)
{
    json j;
    try {
        j = json::parse(io::read_text(path));
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidConfig, fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
    } catch (const Error& e) {
        throw Error(Errc::InvalidConfig, e.what());
    }
    auto c = parse_config(j, fs::absolute(path).parent_path(), overrides);
    c.source = path;
    return c;
}

namespace {

std::size_t thread_count(const ExperimentConfig& c)
{
    if (c.threads > 0) {
        return c.threads;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is handled exactly once; results
// go to caller-owned slots, so scheduling never shows in the output.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn)
{
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

struct SentimentRow {
    std::string firm_id;
    int fiscal_year = 0;
    std::string doc_id;
    std::array<double, 3> values{};
    std::size_t n = 0;
};

void write_sentiment_csv(const fs::path& path, const std::vector<SentimentRow>& rows, const char* header)
{
    std::string out = fmt::format("firm_id,fiscal_year,doc_id,{}\n", header);
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{:.17g},{:.17g},{:.17g},{}\n", io::csv_escape(r.firm_id), r.fiscal_year,
                           io::csv_escape(r.doc_id), r.values[0], r.values[1], r.values[2], r.n);
    }
    io::write_text(path, out);
}

SentimentTable read_sentiment_csv(const fs::path& path, std::string_view pos_column, std::string_view neg_column)
{
    const auto table = io::read_csv(path);
    const auto c_firm = table.column("firm_id");
    const auto c_year = table.column("fiscal_year");
    const auto c_pos = table.column(pos_column);
    const auto c_neg = table.column(neg_column);
    SentimentTable out;
    for (const auto& row : table.rows) {
        out[{row[c_firm], std::stoi(row[c_year])}] = {std::stod(row[c_pos]), std::stod(row[c_neg])};
    }
    return out;
}

std::vector<SentimentRow> to_rows(std::span<const MdnaDocument> docs,
                                  const std::vector<std::vector<SentenceScore>>& scores)
{
    std::vector<SentimentRow> rows;
    rows.reserve(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        const auto agg = aggregate_document(scores[d]);
        rows.push_back({docs[d].firm_id, docs[d].fiscal_year, docs[d].filing_id, {agg.pos, agg.neg, agg.neu},
                        agg.n_sentences});
    }
    return rows;
}

std::string json_error(const Error& e)
{
    return json{{"error", to_string(e.code())}, {"message", e.what()}}.dump();
}

class Pipeline {
public:
    explicit Pipeline(const ExperimentConfig& config) : c_(config), out_(config.out_dir) {}

    RunSummary run(Stage last)
    {
        fs::create_directories(out_);
        const auto started = std::chrono::system_clock::now();
        for (auto stage : kStages) {
            if (stage == Stage::Synth && !c_.synthetic) {
                continue;
            }
            execute(stage);
            if (stage == last) {
                break;
            }
        }
        write_manifest(started);
        return summary_;
    }

private:
    fs::path stage_dir(Stage s) const { return out_ / "stages" / std::string(to_string(s)); }

    static std::string file_hash(const fs::path& p) { return fs::exists(p) ? io::sha256_file(p) : std::string("-"); }

    // Reuses the stage directory when its recorded key matches and all recorded outputs exist.
    void cached(Stage s, const json& inputs, const std::function<std::vector<std::string>()>& compute)
    {
        const auto dir = stage_dir(s);
        const auto name = std::string(to_string(s));
        const auto key = io::sha256_hex(json{{"stage", name}, {"inputs", inputs}}.dump());
        const auto record_path = dir / "stage.json";
        const auto t0 = std::chrono::steady_clock::now();
        StageRecord record;
        record.key = key;
        if (fs::exists(record_path)) {
            try {
                const auto rec = json::parse(io::read_text(record_path));
                bool complete = rec.at("key").get<std::string>() == key;
                for (const auto& f : rec.at("outputs")) {
                    complete = complete && fs::exists(dir / f.get<std::string>());
                }
                record.cache_hit = complete;
            } catch (const std::exception&) {
                record.cache_hit = false;
            }
        }
        if (record.cache_hit) {
            spdlog::info("stage {}: cache hit ({})", name, key.substr(0, 12));
        } else {
            spdlog::info("stage {}: running", name);
            fs::create_directories(dir);
            fs::remove(record_path);
            const auto outputs = compute();
            if (!incomplete_) {
                io::write_text(record_path, json{{"key", key}, {"outputs", outputs}}.dump(2) + "\n");
            }
            incomplete_ = false;
        }
        record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        summary_.stages[name] = record;
    }

    void execute(Stage s)
    {
        switch (s) {
            case Stage::Synth: return synth();
            case Stage::Extract: return extract();
            case Stage::Tone: return tone();
            case Stage::Score: return score();
            case Stage::Adapt: return adapt();
            case Stage::Features: return features();
            case Stage::Evaluate: return evaluate();
            case Stage::Report: return report();
        }
    }

    Lexicon lexicon() const { return load_lexicon(c_.positive_lexicon, c_.negative_lexicon); }

    AbbreviationList abbreviations() const
    {
        return c_.abbreviations.empty() ? AbbreviationList::defaults() : AbbreviationList::load(c_.abbreviations);
    }

    bool wants(SentimentFamily f) const
    {
        return std::any_of(c_.variable_sets.begin(), c_.variable_sets.end(),
                           [f](VariableSet s) { return sentiment_family(s) == f; });
    }

    ServiceOptions service_options() const
    {
        ServiceOptions o;
        o.base_url = c_.scoring.service_url;
        o.timeout = c_.scoring.timeout;
        o.batch_size = c_.scoring.batch_size;
        o.max_in_flight = c_.scoring.max_in_flight;
        return o;
    }

    std::unique_ptr<ScoringBackend> backend(SentimentFamily f) const
    {
        const bool bert = f == SentimentFamily::Bert;
        const auto max_tokens = bert ? c_.scoring.bert_max_tokens : c_.scoring.w2v_max_tokens;
        if (c_.scoring.backend == "service") {
            return std::make_unique<ServiceBackend>(service_options(), bert ? c_.scoring.bert_model : c_.scoring.w2v_model,
                                                    max_tokens);
        }
        const double t = bert ? c_.scoring.bert_temperature : c_.scoring.w2v_temperature;
        return std::make_unique<StubBackend>(StubBackend::lexicon(lexicon(), t, max_tokens, bert ? "bert-stub" : "w2v-stub"));
    }

    json scoring_inputs() const
    {
        return {{"documents", file_hash(docs_path())},
                {"scoring", c_.to_json().at("scoring")},
                {"lexicon", {file_hash(c_.positive_lexicon), file_hash(c_.negative_lexicon)}}};
    }

    fs::path docs_path() const { return stage_dir(Stage::Extract) / "documents.jsonl"; }

    const std::vector<MdnaDocument>& documents()
    {
        if (!docs_) {
            docs_ = read_documents_jsonl(docs_path());
        }
        return *docs_;
    }

    void synth()
    {
        cached(Stage::Synth, to_json(*c_.synthetic), [&] {
            const auto out = generate_synthetic(*c_.synthetic, out_ / "data");
            notes_["synthetic"] = {{"n_filings", out.n_filings}, {"n_bankrupt", out.n_bankrupt},
                                   {"intercept", out.intercept}};
            return std::vector<std::string>{};
        });
        // The generated data lives outside the stage directory; a missing file forces regeneration.
        for (const auto& p : {c_.index, c_.financials, c_.positive_lexicon, c_.negative_lexicon}) {
            if (!fs::exists(p)) {
                fs::remove(stage_dir(Stage::Synth) / "stage.json");
                summary_.stages.erase("synth");
                return synth();
            }
        }
    }

    void extract()
    {
        const auto filings = load_filing_index(c_.index);
        std::string material;
        for (const auto& f : filings) {
            material += f.filing_id;
            material += io::sha256_hex(f.body);
        }
        const json inputs = {{"index", file_hash(c_.index)},
                             {"filings", io::sha256_hex(material)},
                             {"abbreviations", file_hash(c_.abbreviations)}};
        cached(Stage::Extract, inputs, [&] {
            const auto abbrevs = abbreviations();
            std::vector<std::optional<MdnaDocument>> docs(filings.size());
            std::vector<std::optional<ExtractionFailure>> failures(filings.size());
            parallel_for(filings.size(), thread_count(c_), [&](std::size_t i) {
                try {
                    docs[i] = extract_mdna(filings[i], abbrevs);
                } catch (const Error& e) {
                    failures[i] = ExtractionFailure{filings[i].filing_id, e.code(), e.what()};
                }
            });
            std::vector<MdnaDocument> kept;
            std::string failure_csv = "filing_id,error,message\n";
            for (std::size_t i = 0; i < filings.size(); ++i) {
                if (docs[i]) {
                    kept.push_back(std::move(*docs[i]));
                } else {
                    failure_csv += fmt::format("{},{},{}\n", io::csv_escape(failures[i]->filing_id),
                                               to_string(failures[i]->code), io::csv_escape(failures[i]->message));
                }
            }
            write_documents_jsonl(docs_path(), kept);
            io::write_text(stage_dir(Stage::Extract) / "failures.csv", failure_csv);
            notes_["extract"] = {{"filings", filings.size()}, {"documents", kept.size()},
                                 {"failures", filings.size() - kept.size()}};
            return std::vector<std::string>{"documents.jsonl", "failures.csv"};
        });
    }

    void tone()
    {
        const json inputs = {{"documents", file_hash(docs_path())},
                             {"lexicon", {file_hash(c_.positive_lexicon), file_hash(c_.negative_lexicon)}}};
        cached(Stage::Tone, inputs, [&] {
            const auto lex = lexicon();
            const auto& docs = documents();
            std::string out = "firm_id,fiscal_year,doc_id,DICTPOS,DICTNEG,n_pos,n_neg,n_words\n";
            std::size_t empty = 0;
            for (const auto& d : docs) {
                try {
                    const auto t = compute_dict_tone(d, lex);
                    out += fmt::format("{},{},{},{:.17g},{:.17g},{},{},{}\n", io::csv_escape(d.firm_id), d.fiscal_year,
                                       io::csv_escape(d.filing_id), t.dict_pos, t.dict_neg, t.n_pos, t.n_neg, t.n_words);
                } catch (const Error& e) {
                    if (e.code() != Errc::EmptyDocument) {
                        throw;
                    }
                    ++empty;
                }
            }
            io::write_text(stage_dir(Stage::Tone) / "dict.csv", out);
            notes_["tone"] = {{"documents", docs.size()}, {"empty", empty}};
            return std::vector<std::string>{"dict.csv"};
        });
    }

    void score_family(SentimentFamily f, const fs::path& csv, std::vector<std::string>& outputs)
    {
        const auto name = std::string(to_string(f));
        try {
            const auto b = backend(f);
            ScoreCache cache(out_ / "cache" / fmt::format("scores-{}.jsonl", b->name()));
            const auto& docs = documents();
            const auto scores = score_corpus(docs, *b, &cache);
            cache.flush();
            write_sentiment_csv(csv, to_rows(docs, scores), fmt::format("{0}POS,{0}NEG,{0}NEU,n_sentences", name).c_str());
            outputs.push_back(csv.filename().string());
            notes_["score"][name] = {{"backend", b->name()}, {"model_version", b->model_version()},
                                     {"cache_hits", cache.hits()}, {"cache_misses", cache.misses()}};
        } catch (const Error& e) {
            spdlog::error("scoring {} failed: {}", name, e.what());
            stage_errors_[name] = json::parse(json_error(e));
            incomplete_ = true;
        }
    }

    void score()
    {
        cached(Stage::Score, scoring_inputs(), [&] {
            std::vector<std::string> outputs;
            for (auto f : {SentimentFamily::W2v, SentimentFamily::Bert}) {
                if (wants(f)) {
                    const auto file = lower_name(f) + ".csv";
                    score_family(f, stage_dir(Stage::Score) / file, outputs);
                }
            }
            return outputs;
        });
    }

    static std::string lower_name(SentimentFamily f)
    {
        std::string s(to_string(f));
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        return s;
    }

    void adapt()
    {
        if (!wants(SentimentFamily::Dapt)) {
            return;
        }
        json inputs = scoring_inputs();
        inputs["adaptation"] = c_.to_json().at("adaptation");
        inputs["seed"] = c_.seed;
        cached(Stage::Adapt, inputs, [&] {
            const auto dir = stage_dir(Stage::Adapt);
            std::vector<std::string> outputs;
            try {
                const auto& docs = documents();
                std::unique_ptr<ScoringBackend> current = backend(SentimentFamily::Bert);
                json rounds = json::array();
                for (int round = 0; round < c_.adaptation.config.rounds; ++round) {
                    auto cfg = c_.adaptation.config;
                    cfg.rng_seed = c_.seed + static_cast<std::uint64_t>(round);
                    const auto set_name = fmt::format("training_set_round{}.jsonl", round + 1);
                    ScoreCache cache(out_ / "cache" / fmt::format("scores-{}.jsonl", current->name()));
                    const auto outcome = prepare_adaptation_round(docs, *current, cfg, dir / set_name, &cache);
                    cache.flush();
                    outputs.push_back(set_name);
                    outputs.push_back(set_name + ".manifest.json");
                    const auto examples = read_training_set(outcome.training_set);
                    json round_note = {{"n_documents", outcome.n_documents},
                                       {"n_sentences", outcome.n_sentences},
                                       {"n_retained", outcome.n_retained},
                                       {"retained_fraction", outcome.retained_fraction},
                                       {"class_counts", outcome.summary.class_counts},
                                       {"base_model_version", current->model_version()}};
                    current = train(*current, examples, round, round_note, outputs);
                    round_note["model_version"] = current->model_version();
                    rounds.push_back(std::move(round_note));
                }
                ScoreCache cache(out_ / "cache" / fmt::format("scores-{}.jsonl", current->name()));
                const auto scores = score_corpus(docs, *current, &cache);
                cache.flush();
                write_sentiment_csv(dir / "dapt.csv", to_rows(docs, scores), "DAPTPOS,DAPTNEG,DAPTNEU,n_sentences");
                outputs.push_back("dapt.csv");
                io::write_text(dir / "summary.json", json{{"rounds", rounds}}.dump(2) + "\n");
                outputs.push_back("summary.json");
                notes_["adapt"] = rounds;
            } catch (const Error& e) {
                spdlog::error("adaptation failed: {}", e.what());
                stage_errors_["DAPT"] = json::parse(json_error(e));
                incomplete_ = true;
            }
            return outputs;
        });
    }

    std::unique_ptr<ScoringBackend> train(const ScoringBackend& base, const std::vector<TrainingExample>& examples,
                                          int round, json& note, std::vector<std::string>& outputs)
    {
        const auto dir = stage_dir(Stage::Adapt);
        if (const auto* stub = dynamic_cast<const StubBackend*>(&base)) {
            FineTuneOptions opts;
            opts.epochs = c_.adaptation.epochs;
            opts.batch_size = c_.adaptation.batch_size;
            opts.learning_rate = c_.adaptation.learning_rate;
            opts.seed = c_.seed + static_cast<std::uint64_t>(round);
            auto tuned = fine_tune(stub->model(), examples, opts);
            note["epoch_mean_losses"] = tuned.epoch_mean_losses;
            const auto model_file = fmt::format("model_round{}.json", round + 1);
            io::write_text(dir / model_file, tuned.model.to_json().dump() + "\n");
            outputs.push_back(model_file);
            auto version = "dapt-" + tuned.model.fingerprint().substr(0, 12);
            return std::make_unique<StubBackend>(std::move(tuned.model), std::move(version), c_.scoring.bert_max_tokens,
                                                 "dapt-stub");
        }
        const ServiceClient client(service_options());
        TrainRequest req;
        req.base_model_version = base.model_version();
        req.dataset = examples;
        req.epochs = c_.adaptation.epochs;
        req.batch_size = c_.adaptation.batch_size;
        req.learning_rate = c_.adaptation.service_learning_rate;
        const auto job_id = client.submit_training(req);
        const auto job = client.wait_for_job(job_id, c_.adaptation.poll_interval, c_.adaptation.deadline);
        if (job.status != JobStatus::Done || !job.model_version) {
            throw Error(Errc::BackendRejected,
                        fmt::format("training job {} failed: {}", job_id, job.reason.value_or("no reason given")));
        }
        note["job_id"] = job_id;
        note["losses"] = job.losses;
        return std::make_unique<ServiceBackend>(service_options(), *job.model_version, c_.scoring.bert_max_tokens);
    }

    fs::path family_csv(SentimentFamily f) const
    {
        switch (f) {
            case SentimentFamily::Dict: return stage_dir(Stage::Tone) / "dict.csv";
            case SentimentFamily::W2v: return stage_dir(Stage::Score) / "w2v.csv";
            case SentimentFamily::Bert: return stage_dir(Stage::Score) / "bert.csv";
            case SentimentFamily::Dapt: return stage_dir(Stage::Adapt) / "dapt.csv";
        }
        return {};
    }

    static fs::path observation_file(VariableSet s)
    {
        std::string name(to_string(s));
        std::replace(name.begin(), name.end(), '+', '_');
        return fmt::format("observations_{}.csv", name);
    }

    void features()
    {
        json inputs = {{"financials", file_hash(c_.financials)},
                       {"documents", file_hash(docs_path())},
                       {"variable_sets", names_of(c_.variable_sets)}};
        for (auto f : {SentimentFamily::Dict, SentimentFamily::W2v, SentimentFamily::Bert, SentimentFamily::Dapt}) {
            inputs["sentiment"][std::string(to_string(f))] = file_hash(family_csv(f));
        }
        cached(Stage::Features, inputs, [&] {
            const auto dir = stage_dir(Stage::Features);
            const auto all = read_financial_csv(c_.financials);
            std::set<FirmYear> with_docs;
            for (const auto& d : documents()) {
                with_docs.insert({d.firm_id, d.fiscal_year});
            }
            std::vector<FinancialRecord> records;
            for (const auto& r : all) {
                if (with_docs.count({r.firm_id, r.fiscal_year}) > 0) {
                    records.push_back(r);
                }
            }
            if (records.size() < all.size()) {
                spdlog::warn("{} financial records have no extracted MD&A and are excluded", all.size() - records.size());
            }

            SentimentTables tables;
            for (auto f : {SentimentFamily::Dict, SentimentFamily::W2v, SentimentFamily::Bert, SentimentFamily::Dapt}) {
                const auto p = family_csv(f);
                if (fs::exists(p)) {
                    const auto name = std::string(to_string(f));
                    tables[f] = read_sentiment_csv(p, name + "POS", name + "NEG");
                }
            }

            std::vector<std::string> outputs;
            json assembled = json::object();
            for (auto s : c_.variable_sets) {
                try {
                    const auto data = assemble(records, tables, s);
                    write_observation_csv(dir / observation_file(s), data);
                    outputs.push_back(observation_file(s).string());
                    assembled[std::string(to_string(s))] = data.size();
                } catch (const Error& e) {
                    assembled[std::string(to_string(s))] = json::parse(json_error(e));
                    io::write_text(dir / (observation_file(s).string() + ".error.json"), json_error(e) + "\n");
                    outputs.push_back(observation_file(s).string() + ".error.json");
                }
            }

            // Univariate comparison of bankrupt and non-bankrupt firm-years over every available variable.
            const auto fin = assemble(records, tables, VariableSet::Fin);
            std::vector<std::pair<std::string, std::vector<double>>> columns;
            for (std::size_t f = 0; f < fin.dimension(); ++f) {
                std::vector<double> v;
                for (const auto& row : fin.rows) {
                    v.push_back(row.features[f]);
                }
                columns.emplace_back(fin.feature_names[f], std::move(v));
            }
            for (const auto& [family, table] : tables) {
                const auto name = std::string(to_string(family));
                std::vector<double> pos;
                std::vector<double> neg;
                for (const auto& r : records) {
                    const auto it = table.find({r.firm_id, r.fiscal_year});
                    if (it == table.end()) {
                        break;
                    }
                    pos.push_back(it->second.pos);
                    neg.push_back(it->second.neg);
                }
                if (pos.size() != records.size()) {
                    continue;
                }
                columns.emplace_back(name + "POS", std::move(pos));
                columns.emplace_back(name + "NEG", std::move(neg));
            }
            std::string t1 = "variable,mean_bankrupt,mean_nonbankrupt,difference,t_stat,stars\n";
            for (const auto& [name, values] : columns) {
                std::vector<double> b;
                std::vector<double> nb;
                for (std::size_t i = 0; i < fin.size(); ++i) {
                    (fin.rows[i].brupt == 1 ? b : nb).push_back(values[i]);
                }
                try {
                    const auto t = univariate_ttest(b, nb);
                    t1 += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.4f},{}\n", name, t.mean1, t.mean0, t.diff, t.t_stat,
                                      t.stars);
                } catch (const Error& e) {
                    t1 += fmt::format("{},,,,,{}\n", name, to_string(e.code()));
                }
            }
            io::write_text(dir / "univariate.csv", t1);
            outputs.push_back("univariate.csv");
            notes_["features"] = {{"records", all.size()}, {"with_documents", records.size()}, {"assembled", assembled}};
            return outputs;
        });
    }

    void evaluate()
    {
        json inputs = {{"evaluation", c_.to_json()}, {"files", json::object()}};
        inputs["evaluation"].erase("out_dir");
        inputs["evaluation"].erase("threads");
        for (auto s : c_.variable_sets) {
            const auto p = stage_dir(Stage::Features) / observation_file(s);
            inputs["files"][std::string(to_string(s))] = file_hash(p);
        }
        cached(Stage::Evaluate, inputs, [&] {
            json cells = json::array();
            for (auto s : c_.variable_sets) {
                const auto p = stage_dir(Stage::Features) / observation_file(s);
                std::optional<Dataset> data;
                std::vector<Split> splits;
                std::string error;
                try {
                    if (!fs::exists(p)) {
                        const auto err_file = p.string() + ".error.json";
                        if (fs::exists(err_file)) {
                            const auto j = json::parse(io::read_text(err_file));
                            throw Error(Errc::MissingSentiment, j.at("message").get<std::string>());
                        }
                        throw Error(Errc::MissingSentiment, fmt::format("no observations for {}", to_string(s)));
                    }
                    data = read_observation_csv(p);
                    splits = time_based_resample(*data, c_.split);
                } catch (const Error& e) {
                    error = json_error(e);
                }
                for (auto k : c_.classifiers) {
                    MetricReport report;
                    if (data) {
                        report = evaluate_cell(*data, splits, k, c_);
                    } else {
                        report.variable_set = std::string(to_string(s));
                        report.classifier = std::string(to_string(k));
                        report.error = error;
                    }
                    cells.push_back(to_json(report));
                }
            }
            io::write_text(stage_dir(Stage::Evaluate) / "metrics.json", json{{"cells", cells}}.dump(2) + "\n");
            return std::vector<std::string>{"metrics.json"};
        });
        const auto metrics = json::parse(io::read_text(stage_dir(Stage::Evaluate) / "metrics.json"));
        summary_.cells.clear();
        for (const auto& cell : metrics.at("cells")) {
            summary_.cells.push_back(report_from_json(cell));
        }
        summary_.failed_cells = static_cast<std::size_t>(std::count_if(
            summary_.cells.begin(), summary_.cells.end(), [](const MetricReport& r) { return !r.error.empty(); }));
        summary_.metrics = stage_dir(Stage::Evaluate) / "metrics.json";
    }

    static MetricReport report_from_json(const json& j)
    {
        MetricReport r;
        r.variable_set = j.at("variable_set").get<std::string>();
        r.classifier = j.at("classifier").get<std::string>();
        r.error = j.value("error", std::string());
        if (j.contains("A1")) {
            r.a1 = j.at("A1").at("values").get<std::vector<double>>();
            r.a2 = j.at("A2").at("values").get<std::vector<double>>();
        }
        if (j.contains("R2_cox_snell")) {
            r.r2_cox_snell = j.at("R2_cox_snell").at("values").get<std::vector<double>>();
            r.r2_nagelkerke = j.at("R2_nagelkerke").at("values").get<std::vector<double>>();
        }
        r.failures = j.value("failures", std::vector<std::string>{});
        return r;
    }

    void report()
    {
        const auto metrics_path = stage_dir(Stage::Evaluate) / "metrics.json";
        cached(Stage::Report, json{{"metrics", file_hash(metrics_path)}}, [&] {
            const auto dir = stage_dir(Stage::Report);
            io::write_text(dir / "results.csv", render_table(summary_.cells));
            io::write_text(dir / "a2_chart.svg", render_chart(summary_.cells));
            return std::vector<std::string>{"results.csv", "a2_chart.svg"};
        });
        summary_.table = stage_dir(Stage::Report) / "results.csv";
    }

    void write_manifest(std::chrono::system_clock::time_point started)
    {
        json stages = json::object();
        for (const auto& [name, rec] : summary_.stages) {
            stages[name] = {{"key", rec.key}, {"cache_hit", rec.cache_hit}, {"seconds", rec.seconds}};
        }
        json cells = json::array();
        for (const auto& cell : summary_.cells) {
            json entry = {{"variable_set", cell.variable_set}, {"classifier", cell.classifier}};
            if (!cell.error.empty()) {
                entry["error"] = json::parse(cell.error);
            }
            if (!cell.failures.empty()) {
                entry["repetition_failures"] = cell.failures.size();
            }
            cells.push_back(std::move(entry));
        }
        const auto config = c_.to_json();
        const std::time_t t = std::chrono::system_clock::to_time_t(started);
        std::array<char, 32> stamp{};
        std::strftime(stamp.data(), stamp.size(), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        const json manifest = {
            {"config_hash", io::sha256_hex(config.dump())},
            {"config", config},
            {"seed", c_.seed},
            {"versions", {{"distress", "0.1.0"}, {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION,
                                                                       EIGEN_MINOR_VERSION)}}},
            {"started", stamp.data()},
            {"stages", stages},
            {"stage_errors", stage_errors_},
            {"notes", notes_},
            {"cells", cells},
        };
        summary_.manifest = out_ / "manifest.json";
        io::write_text(summary_.manifest, manifest.dump(2) + "\n");
    }

    const ExperimentConfig& c_;
    fs::path out_;
    RunSummary summary_;
    std::optional<std::vector<MdnaDocument>> docs_;
    json notes_ = json::object();
    json stage_errors_ = json::object();
    bool incomplete_ = false;
};

// Keeps every minority-class index and an equal-size seeded sample of the majority class.
std::vector<std::size_t> balance(const Dataset& data, const std::vector<std::size_t>& idx, std::mt19937_64& rng)
{
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (auto i : idx) {
        (data.rows[i].brupt == 1 ? pos : neg).push_back(i);
    }
    auto& major = pos.size() > neg.size() ? pos : neg;
    auto& minor = pos.size() > neg.size() ? neg : pos;
    std::vector<std::size_t> kept;
    std::sample(major.begin(), major.end(), std::back_inserter(kept), static_cast<std::ptrdiff_t>(minor.size()), rng);
    kept.insert(kept.end(), minor.begin(), minor.end());
    std::sort(kept.begin(), kept.end());
    return kept;
}

struct Prepared {
    Matrix train_x;
    Labels train_y;
    Matrix val_x;
    Labels val_y;
    Matrix test_x;
    Labels test_y;
    std::vector<std::string> names;
};

Prepared prepare(const Dataset& data, const std::vector<std::size_t>& train, const std::vector<std::size_t>& val,
                 const std::vector<std::size_t>& test, double winsor_level)
{
    const auto train_set = data.subset(train);
    const auto bounds = fit_winsor(train_set, winsor_level);
    const auto train_w = apply_winsor(train_set, bounds);
    const auto st = fit_standardizer(train_w);
    auto transform = [&](const std::vector<std::size_t>& idx) { return st.apply(apply_winsor(data.subset(idx), bounds)); };
    const auto tr = st.apply(train_w);
    const auto va = transform(val);
    const auto te = transform(test);
    return {design_matrix(tr), label_vector(tr), design_matrix(va), label_vector(va),
            design_matrix(te), label_vector(te), tr.feature_names};
}

template <typename Predict>
Accuracy score_set(const Matrix& x, const Labels& y, Predict predict)
{
    std::vector<int> truth(static_cast<std::size_t>(y.size()));
    std::vector<int> pred(truth.size());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        truth[static_cast<std::size_t>(i)] = y(i);
        pred[static_cast<std::size_t>(i)] = predict(Vector(x.row(i).transpose()));
    }
    return accuracy(confusion(truth, pred));
}

}  // namespace

MetricReport evaluate_cell(const Dataset& data, const std::vector<Split>& splits, ClassifierKind classifier,
                           const ExperimentConfig& config)
{
    MetricReport report;
    report.variable_set = data.feature_names.size() > kFinancialNames.size()
                              ? "FIN+" + data.feature_names.back().substr(0, data.feature_names.back().size() - 3)
                              : "FIN";
    report.classifier = std::string(to_string(classifier));

    struct RepResult {
        std::optional<Accuracy> acc;
        std::optional<PseudoR2> r2;
        std::optional<double> selected;
        std::optional<SweepResult> sweep;
        std::string error;
    };
    std::vector<RepResult> results(splits.size());
    const auto& opts = config.classifier;

    parallel_for(splits.size(), thread_count(config), [&](std::size_t rep) {
        auto& out = results[rep];
        try {
            std::mt19937_64 rng(repetition_seed(config.seed ^ 0x9e3779b97f4a7c15ULL, rep));
            auto train = splits[rep].train;
            auto val = splits[rep].val;
            if (config.balance_training) {
                train = balance(data, train, rng);
                val = balance(data, val, rng);
            }
            const auto p = prepare(data, train, val, splits[rep].test, config.winsor_level);
            const bool sweep = rep < opts.sweep_repetitions && p.val_x.rows() > 0;
            switch (classifier) {
                case ClassifierKind::Hazard: {
                    const auto model = hazard_fit(p.train_x, p.train_y, {}, p.names);
                    out.r2 = pseudo_r2(model.log_lik_fit, model.log_lik_null, model.n);
                    out.acc = score_set(p.test_x, p.test_y, [&](const Vector& x) {
                        return hazard_predict(model, x, opts.hazard_threshold);
                    });
                    break;
                }
                case ClassifierKind::Knn: {
                    if (sweep) {
                        out.sweep = hyperparameter_sweep(opts.knn_grid, [&](double k) {
                            const auto m = knn_fit(p.train_x, p.train_y, static_cast<int>(k));
                            return score_set(p.val_x, p.val_y, [&](const Vector& x) { return knn_predict(m, x); });
                        });
                    }
                    const auto model = knn_fit(p.train_x, p.train_y, opts.knn_k);
                    out.selected = opts.knn_k;
                    out.acc = score_set(p.test_x, p.test_y, [&](const Vector& x) { return knn_predict(model, x); });
                    break;
                }
                case ClassifierKind::Svm: {
                    if (sweep) {
                        out.sweep = hyperparameter_sweep(opts.svm_grid, [&](double c) {
                            SvmOptions so;
                            so.C = c;
                            const auto m = svm_fit(p.train_x, p.train_y, so);
                            return score_set(p.val_x, p.val_y, [&](const Vector& x) { return svm_predict(m, x); });
                        });
                    }
                    SvmOptions so;
                    so.C = opts.svm_c;
                    const auto model = svm_fit(p.train_x, p.train_y, so);
                    out.selected = opts.svm_c;
                    out.acc = score_set(p.test_x, p.test_y, [&](const Vector& x) { return svm_predict(model, x); });
                    break;
                }
            }
        } catch (const Error& e) {
            out.error = fmt::format("repetition {}: {}: {}", rep, to_string(e.code()), e.what());
        }
    });

    for (auto& r : results) {
        if (!r.error.empty()) {
            report.failures.push_back(r.error);
            continue;
        }
        report.a1.push_back(r.acc->a1);
        report.a2.push_back(r.acc->a2);
        if (r.r2) {
            report.r2_cox_snell.push_back(r.r2->cox_snell);
            report.r2_nagelkerke.push_back(r.r2->nagelkerke);
        }
        if (r.selected) {
            report.selected.push_back(*r.selected);
        }
        if (r.sweep) {
            report.sweeps.push_back(std::move(*r.sweep));
        }
    }
    if (report.a1.empty()) {
        report.error = json{{"error", "NoSuccessfulRepetition"},
                            {"message", report.failures.empty() ? "no repetitions" : report.failures.front()}}
                           .dump();
    }
    return report;
}

std::string render_table(const std::vector<MetricReport>& cells)
{
    std::string out = "variable_set,classifier,repetitions,A1_mean,A1_sd,A2_mean,A2_sd,R2_cox_snell,R2_nagelkerke,error\n";
    for (const auto& c : cells) {
        if (!c.error.empty()) {
            std::string code = "error";
            try {
                code = json::parse(c.error).at("error").get<std::string>();
            } catch (const std::exception&) {
            }
            out += fmt::format("{},{},0,,,,,,,{}\n", c.variable_set, c.classifier, code);
            continue;
        }
        const auto a1 = summarize(c.a1);
        const auto a2 = summarize(c.a2);
        std::string r2;
        std::string r2n;
        if (!c.r2_cox_snell.empty()) {
            r2 = fmt::format("{:.6f}", summarize(c.r2_cox_snell).mean);
            r2n = fmt::format("{:.6f}", summarize(c.r2_nagelkerke).mean);
        }
        out += fmt::format("{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{},{},\n", c.variable_set, c.classifier, c.a1.size(),
                           a1.mean, a1.sd, a2.mean, a2.sd, r2, r2n);
    }
    return out;
}

std::string render_chart(const std::vector<MetricReport>& cells)
{
    std::vector<std::string> sets;
    std::vector<std::string> classifiers;
    for (const auto& c : cells) {
        if (std::find(sets.begin(), sets.end(), c.variable_set) == sets.end()) {
            sets.push_back(c.variable_set);
        }
        if (std::find(classifiers.begin(), classifiers.end(), c.classifier) == classifiers.end()) {
            classifiers.push_back(c.classifier);
        }
    }
    const std::array<const char*, 3> colors = {"#4c72b0", "#dd8452", "#55a868"};
    constexpr double left = 60.0;
    constexpr double top = 40.0;
    constexpr double plot_h = 260.0;
    constexpr double bar_w = 22.0;
    const double group_w = bar_w * static_cast<double>(classifiers.size()) + 30.0;
    const double width = left + group_w * static_cast<double>(sets.size()) + 150.0;
    const double height = top + plot_h + 60.0;

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" font-family=\"sans-serif\" "
        "font-size=\"12\">\n",
        width, height);
    svg += fmt::format("<text x=\"{:.0f}\" y=\"20\" font-size=\"14\">Mean A2 (bankrupt accuracy) by variable set</text>\n", left);
    for (int tick = 0; tick <= 10; tick += 2) {
        const double y = top + plot_h * (1.0 - tick / 10.0);
        svg += fmt::format("<line x1=\"{:.0f}\" y1=\"{:.1f}\" x2=\"{:.0f}\" y2=\"{:.1f}\" stroke=\"#ddd\"/>\n", left, y,
                           left + group_w * static_cast<double>(sets.size()), y);
        svg += fmt::format("<text x=\"{:.0f}\" y=\"{:.1f}\" text-anchor=\"end\">{}%</text>\n", left - 6, y + 4, tick * 10);
    }
    for (std::size_t g = 0; g < sets.size(); ++g) {
        const double gx = left + group_w * static_cast<double>(g) + 15.0;
        for (std::size_t k = 0; k < classifiers.size(); ++k) {
            const auto it = std::find_if(cells.begin(), cells.end(), [&](const MetricReport& c) {
                return c.variable_set == sets[g] && c.classifier == classifiers[k];
            });
            if (it == cells.end() || !it->error.empty()) {
                continue;
            }
            const double v = summarize(it->a2).mean;
            const double h = plot_h * v;
            svg += fmt::format(
                "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.0f}\" height=\"{:.1f}\" fill=\"{}\"><title>{} {} "
                "{:.4f}</title></rect>\n",
                gx + bar_w * static_cast<double>(k), top + plot_h - h, bar_w - 2.0, h, colors[k % colors.size()],
                sets[g], classifiers[k], v);
        }
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
                           gx + bar_w * static_cast<double>(classifiers.size()) / 2.0, top + plot_h + 18.0, sets[g]);
    }
    const double lx = left + group_w * static_cast<double>(sets.size()) + 20.0;
    for (std::size_t k = 0; k < classifiers.size(); ++k) {
        const double ly = top + 20.0 * static_cast<double>(k);
        svg += fmt::format("<rect x=\"{:.0f}\" y=\"{:.0f}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n", lx, ly,
                           colors[k % colors.size()]);
        svg += fmt::format("<text x=\"{:.0f}\" y=\"{:.0f}\">{}</text>\n", lx + 18.0, ly + 10.0, classifiers[k]);
    }
    svg += "</svg>\n";
    return svg;
}

RunSummary run_pipeline(const ExperimentConfig& config, Stage last)
{
    Pipeline pipeline(config);
    return pipeline.run(last);
}

}  // namespace distress
