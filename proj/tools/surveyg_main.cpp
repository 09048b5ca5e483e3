// surveyg command line: ingest | graph | summarize | generate | eval | all
//
// exit codes: 0 ok, 1 runtime/validation failure, 2 missing prerequisite
// file, 3 config validation error.

#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "surveyg/http.hpp"
#include "surveyg/pipeline.hpp"

#include <CLI11.hpp>

namespace {

struct Overrides {
    std::optional<std::string> query, backend, out_dir, source_path;
    std::optional<int> k_foundation, landmark_year, t_max;
    std::optional<uint64_t> seed;
    bool no_vertical = false, no_horizontal = false, no_multiagent = false;
};

void add_common_flags(CLI::App* cmd, std::string& config_path, Overrides& ov) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--query", ov.query, "research query / survey topic");
    cmd->add_option("--k-foundation", ov.k_foundation, "foundation layer size K");
    cmd->add_option("--landmark-year", ov.landmark_year,
                    "development/frontier landmark year T");
    cmd->add_option("--tmax", ov.t_max, "max agent iterations per unit");
    cmd->add_option("--backend", ov.backend, "llm backend: mock | http");
    cmd->add_option("--seed", ov.seed, "root seed for all randomness");
    cmd->add_option("--out", ov.out_dir, "output directory");
    cmd->add_option("--source-path", ov.source_path, "fixture source directory");
    cmd->add_flag("--no-vertical", ov.no_vertical, "horizontal summaries only");
    cmd->add_flag("--no-horizontal", ov.no_horizontal, "vertical summaries only");
    cmd->add_flag("--no-multiagent", ov.no_multiagent,
                  "single writing pass, no evaluation agent");
}

surveyg::RunConfig resolve_config(const std::string& config_path,
                                  const Overrides& ov) {
    surveyg::RunConfig config;
    if (!config_path.empty()) config = surveyg::load_config(config_path);
    if (ov.query) config.query = *ov.query;
    if (ov.k_foundation) config.k_foundation = *ov.k_foundation;
    if (ov.landmark_year) config.landmark_year = *ov.landmark_year;
    if (ov.t_max) config.t_max = *ov.t_max;
    if (ov.backend) config.llm_backend = *ov.backend;
    if (ov.seed) config.seed = *ov.seed;
    if (ov.out_dir) config.out_dir = *ov.out_dir;
    if (ov.source_path) {
        config.source_path = *ov.source_path;
        config.source_kind = "fixture";
    }
    if (ov.no_vertical) config.use_vertical = false;
    if (ov.no_horizontal) config.use_horizontal = false;
    if (ov.no_multiagent) config.multiagent = false;
    return config;
}

int run_stage(surveyg::Stage stage, const std::string& config_path,
              const Overrides& ov) {
    using namespace surveyg;
    std::unique_ptr<HttpLlmBackend> http_llm;
    std::unique_ptr<HttpEncoder> http_encoder;
    std::unique_ptr<HttpSource> http_source;
    std::unique_ptr<HttpNli> http_nli;
    try {
        RunConfig config = resolve_config(config_path, ov);
        validate_config(config);

        PipelineBackends external;
        if (config.llm_backend == "http") {
            http_llm = std::make_unique<HttpLlmBackend>(config.llm_host,
                                                        config.llm_port,
                                                        config.llm_model);
            external.llm = http_llm.get();
        }
        if (config.encoder_backend == "http") {
            http_encoder = std::make_unique<HttpEncoder>(
                config.encoder_host, config.encoder_port, config.embedding_dim);
            external.encoder = http_encoder.get();
        }
        if (config.nli_backend == "http") {
            http_nli = std::make_unique<HttpNli>(config.llm_host, config.llm_port);
            external.nli = http_nli.get();
        }
        std::unique_ptr<PaperSource> source;
        if (config.source_kind == "http")
            source = std::make_unique<HttpSource>(config.source_host,
                                                  config.source_port);

        Pipeline pipeline(config, external, std::move(source));
        StageResult result = pipeline.run(stage);
        for (const auto& path : result.outputs) std::cout << path << '\n';
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 3;
    } catch (const MissingInputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        for (const auto& d : e.details) std::cerr << "  - " << d << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"surveyg: hierarchical citation-graph survey generation"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;
    std::map<std::string, surveyg::Stage> stages{
        {"ingest", surveyg::Stage::ingest},     {"graph", surveyg::Stage::graph},
        {"summarize", surveyg::Stage::summarize}, {"generate", surveyg::Stage::generate},
        {"eval", surveyg::Stage::eval},         {"all", surveyg::Stage::all}};

    for (auto& [name, stage] : stages) {
        auto* cmd = app.add_subcommand(name);
        add_common_flags(cmd, config_path, ov);
        surveyg::Stage s = stage;
        cmd->callback([&, s] { std::exit(run_stage(s, config_path, ov)); });
    }

    CLI11_PARSE(app, argc, argv);
    return 0;
}
