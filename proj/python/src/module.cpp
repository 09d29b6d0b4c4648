#include "distress/classifiers.hpp"
#include "distress/domain_adaptation.hpp"
#include "distress/evaluation.hpp"
#include "distress/experiment.hpp"
#include "distress/filing_corpus.hpp"
#include "distress/lexicon_tone.hpp"
#include "distress/sentiment_scoring.hpp"
#include "distress/stub_backend.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace distress;

namespace {

py::dict tone_dict(const DictTone& t)
{
    py::dict d;
    d["dict_pos"] = t.dict_pos;
    d["dict_neg"] = t.dict_neg;
    d["n_pos"] = t.n_pos;
    d["n_neg"] = t.n_neg;
    d["n_words"] = t.n_words;
    return d;
}

Lexicon make_lexicon(const std::set<std::string>& positive, const std::set<std::string>& negative)
{
    return Lexicon::from_words(positive, negative);
}

py::object to_python(const nlohmann::json& j)
{
    return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_distress, m)
{
    m.doc() = "Bankruptcy prediction from financial ratios and MD&A sentiment";

    static PyObject* error_type = py::exception<Error>(m, "DistressError").ptr();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const Error& e) {
            py::object exc = py::handle(error_type)(e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            exc.attr("retriable") = e.retriable();
            PyErr_SetObject(error_type, exc.ptr());
        }
    });

    m.def(
        "aggregate_document",
        [](const std::vector<std::array<double, 3>>& rows) {
            std::vector<SentenceScore> scores;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                scores.push_back({"doc", i, rows[i]});
            }
            const auto d = aggregate_document(scores);
            py::dict out;
            out["pos"] = d.pos;
            out["neg"] = d.neg;
            out["neu"] = d.neu;
            out["n_sentences"] = d.n_sentences;
            return out;
        },
        py::arg("rows"), "Document (POS, NEG, NEU) shares from per-sentence (pos, neg, neu) rows.");

    m.def(
        "self_entropy", [](const std::vector<double>& p) { return self_entropy(p); }, py::arg("p"));

    m.def(
        "filter_reliable",
        [](const std::vector<std::vector<double>>& rows, double threshold) {
            std::vector<PseudoLabel> labels;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                PseudoLabel l;
                l.sentence.index = i;
                l.self_entropy = self_entropy(rows[i]);
                labels.push_back(l);
            }
            std::vector<std::size_t> kept;
            for (const auto& l : filter_reliable(labels, threshold).retained) {
                kept.push_back(l.sentence.index);
            }
            return kept;
        },
        py::arg("rows"), py::arg("threshold"), "Indices of the probability rows whose self-entropy is at most threshold.");

    m.def(
        "dict_tone",
        [](const std::string& text, const std::set<std::string>& positive, const std::set<std::string>& negative) {
            return tone_dict(compute_dict_tone(text, make_lexicon(positive, negative)));
        },
        py::arg("text"), py::arg("positive"), py::arg("negative"));

    m.def(
        "dict_tone_files",
        [](const std::string& text, const std::filesystem::path& positive, const std::filesystem::path& negative) {
            return tone_dict(compute_dict_tone(text, load_lexicon(positive, negative)));
        },
        py::arg("text"), py::arg("positive_path"), py::arg("negative_path"));

    m.def(
        "stub_score",
        [](const std::string& sentence, const std::set<std::string>& positive, const std::set<std::string>& negative,
           double temperature) { return stub_score(sentence, make_lexicon(positive, negative), temperature); },
        py::arg("sentence"), py::arg("positive"), py::arg("negative"), py::arg("temperature") = 1.0);

    m.def(
        "segment_sentences",
        [](const std::string& text) {
            std::vector<std::string> out;
            for (const auto& s : segment_sentences(text)) {
                out.push_back(s.text);
            }
            return out;
        },
        py::arg("text"));

    m.def(
        "extract_mdna",
        [](const std::string& body) {
            RawFiling f;
            f.filing_id = "filing";
            f.body = body;
            std::vector<std::string> out;
            for (const auto& s : extract_mdna(f).sentences) {
                out.push_back(s.text);
            }
            return out;
        },
        py::arg("body"), "Sentences of the MD&A section of a 10-K body.");

    m.def(
        "hazard_fit",
        [](const Matrix& X, const Labels& y) {
            const auto model = hazard_fit(X, y);
            py::dict out;
            out["beta"] = model.beta;
            out["log_lik_fit"] = model.log_lik_fit;
            out["log_lik_null"] = model.log_lik_null;
            out["iterations"] = model.iterations;
            return out;
        },
        py::arg("X"), py::arg("y"), "Logistic hazard fit; beta is intercept first.");

    m.def(
        "knn_predict",
        [](const Matrix& X, const Labels& y, const Matrix& queries, int k) {
            const auto model = knn_fit(X, y, k);
            std::vector<int> out;
            for (Eigen::Index i = 0; i < queries.rows(); ++i) {
                out.push_back(knn_predict(model, queries.row(i).transpose()));
            }
            return out;
        },
        py::arg("X"), py::arg("y"), py::arg("queries"), py::arg("k") = 5);

    m.def(
        "svm_fit",
        [](const Matrix& X, const Labels& y, double C) {
            SvmOptions opts;
            opts.C = C;
            const auto model = svm_fit(X, y, opts);
            py::dict out;
            out["w"] = model.w;
            out["b"] = model.b;
            out["primal"] = model.primal;
            out["dual"] = model.dual;
            return out;
        },
        py::arg("X"), py::arg("y"), py::arg("C") = 1e-5);

    m.def(
        "pseudo_r2",
        [](double fit, double null, std::size_t n) {
            const auto r = pseudo_r2(fit, null, n);
            return std::pair{r.cox_snell, r.nagelkerke};
        },
        py::arg("log_lik_fit"), py::arg("log_lik_null"), py::arg("n"), "(Cox-Snell, Nagelkerke).");

    m.def(
        "accuracy",
        [](const std::vector<int>& truth, const std::vector<int>& predicted) {
            const auto a = accuracy(confusion(truth, predicted));
            return std::pair{a.a1, a.a2};
        },
        py::arg("truth"), py::arg("predicted"), "(A1, A2) for 0/1 labels with 1 = bankrupt.");

    m.def(
        "run_pipeline",
        [](const std::filesystem::path& config, std::optional<std::filesystem::path> out_dir,
           std::optional<std::uint64_t> seed, std::optional<std::string> backend_url, const std::string& stage) {
            Overrides o;
            o.out_dir = std::move(out_dir);
            o.seed = seed;
            o.backend_url = std::move(backend_url);
            const auto c = load_config(config, o);
            RunSummary summary;
            {
                py::gil_scoped_release release;
                summary = run_pipeline(c, parse_stage(stage));
            }
            nlohmann::json cells = nlohmann::json::array();
            for (const auto& cell : summary.cells) {
                cells.push_back(to_json(cell));
            }
            py::dict out;
            out["exit_code"] = summary.exit_code();
            out["failed_cells"] = summary.failed_cells;
            out["cells"] = to_python(cells);
            out["manifest"] = summary.manifest;
            out["table"] = summary.table;
            return out;
        },
        py::arg("config"), py::arg("out_dir") = py::none(), py::arg("seed") = py::none(),
        py::arg("backend_url") = py::none(), py::arg("stage") = "report");
}
