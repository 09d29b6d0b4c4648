#include "distress/errors.hpp"
#include "distress/experiment.hpp"

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace {

struct Options {
    std::string config;
    std::string stage;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> backend_url;
    std::optional<std::string> out;
    bool quiet = false;
};

void add_common(CLI::App* app, Options& o)
{
    app->add_option("--config", o.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    app->add_option("--seed", o.seed, "Override the global seed");
    app->add_option("--backend-url", o.backend_url, "Score with the sentiment service at this URL");
    app->add_option("--out", o.out, "Output directory");
    app->add_flag("-q,--quiet", o.quiet, "Only log warnings and errors");
}

int fail(distress::Errc code, const std::string& message)
{
    std::cerr << nlohmann::json{{"error", distress::to_string(code)}, {"message", message}}.dump() << '\n';
    return 2;
}

int run(const Options& o, distress::Stage last)
{
    distress::Overrides overrides;
    overrides.seed = o.seed;
    overrides.backend_url = o.backend_url;
    if (o.out) {
        overrides.out_dir = std::filesystem::absolute(*o.out);
    }
    const auto config = distress::load_config(o.config, overrides);
    const auto summary = distress::run_pipeline(config, last);

    nlohmann::json stages = nlohmann::json::object();
    for (const auto& [name, rec] : summary.stages) {
        stages[name] = {{"cache_hit", rec.cache_hit}, {"seconds", rec.seconds}};
    }
    nlohmann::json result = {{"out_dir", config.out_dir.string()},
                             {"manifest", summary.manifest.string()},
                             {"stages", stages}};
    if (!summary.table.empty()) {
        result["table"] = summary.table.string();
    }
    if (!summary.cells.empty()) {
        result["cells"] = summary.cells.size();
        result["failed_cells"] = summary.failed_cells;
    }
    std::cout << result.dump(2) << '\n';
    for (const auto& cell : summary.cells) {
        if (!cell.error.empty()) {
            std::cerr << nlohmann::json{{"variable_set", cell.variable_set},
                                        {"classifier", cell.classifier},
                                        {"error", nlohmann::json::parse(cell.error)}}
                             .dump()
                      << '\n';
        }
    }
    return summary.exit_code();
}

}  // namespace

int main(int argc, char** argv)
{
    auto logger = spdlog::stderr_color_mt("distress");
    spdlog::set_default_logger(logger);

    CLI::App app{"Bankruptcy prediction from financial ratios and MD&A sentiment"};
    app.require_subcommand(1);
    Options options;

    auto* run_cmd = app.add_subcommand("run", "Run the pipeline up to --stage (default: report)");
    add_common(run_cmd, options);
    run_cmd->add_option("--stage", options.stage, "Last stage to run")
        ->check(CLI::IsMember({"synth", "extract", "tone", "score", "adapt", "features", "evaluate", "report"}));

    std::vector<std::pair<CLI::App*, distress::Stage>> stage_cmds;
    for (auto stage : distress::kStages) {
        const std::string name(distress::to_string(stage));
        auto* cmd = app.add_subcommand(name, "Run the pipeline through the " + name + " stage");
        add_common(cmd, options);
        stage_cmds.emplace_back(cmd, stage);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(distress::Errc::InvalidConfig, e.what());
    }
    spdlog::set_level(options.quiet ? spdlog::level::warn : spdlog::level::info);

    try {
        if (*run_cmd) {
            return run(options, options.stage.empty() ? distress::Stage::Report : distress::parse_stage(options.stage));
        }
        for (const auto& [cmd, stage] : stage_cmds) {
            if (*cmd) {
                return run(options, stage);
            }
        }
    } catch (const distress::Error& e) {
        return fail(e.code(), e.what());
    } catch (const std::exception& e) {
        return fail(distress::Errc::IoFailure, e.what());
    }
    return 2;
}
