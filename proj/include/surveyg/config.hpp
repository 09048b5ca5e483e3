#pragma once
// Run configuration: JSON file + flag overrides, validation, stable hashing.

#include <fstream>
#include <string>

#include "surveyg/common.hpp"
#include "surveyg/prompts.hpp"

#include <json.hpp>

namespace surveyg {

struct RunConfig {
    std::string query;

    // source
    std::string source_kind = "fixture";  // "fixture" | "http"
    std::string source_path;              // fixture directory
    std::string source_host;              // http source
    int source_port = 443;
    int fetch_limit = 1500;               // candidate papers for outline stage
    int keywords_max = 8;

    // backends
    std::string llm_backend = "mock";      // "mock" | "http"
    std::string llm_host;
    int llm_port = 443;
    std::string llm_model;
    std::string encoder_backend = "mock";  // "mock" | "http"
    std::string encoder_host;
    int encoder_port = 443;
    int embedding_dim = 256;
    std::string nli_backend = "mock";
    std::string nli_table_path;            // mock NLI verdict table (JSON)

    // graph
    int k_foundation = 10;
    int landmark_year = 2026;
    int now_year = 2026;
    double tau_semantic = 0.75;
    bool semantic_in_traversal = true;

    // communities
    double leiden_resolution = 1.0;
    int leiden_restarts = 1;

    // generation
    int t_max = 2;
    int outline_threshold = 4;
    int section_threshold = 4;
    int retrieve_top_k = 60;
    double temperature_prose = 0.7;
    double temperature_eval = 0.0;
    int llm_retries = 2;

    // ablations
    bool use_vertical = true;
    bool use_horizontal = true;
    bool multiagent = true;

    // run
    uint64_t seed = 1;
    int concurrency = 8;
    bool parallel_subsections = false;
    std::string out_dir = "out";

    std::map<std::string, std::string> prompt_hashes =
        prompt_registry().body_hashes();
};

inline nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j;  // plain json sorts keys: hash is order-independent
    j["query"] = c.query;
    j["source_kind"] = c.source_kind;
    j["source_path"] = c.source_path;
    j["source_host"] = c.source_host;
    j["source_port"] = c.source_port;
    j["fetch_limit"] = c.fetch_limit;
    j["keywords_max"] = c.keywords_max;
    j["llm_backend"] = c.llm_backend;
    j["llm_host"] = c.llm_host;
    j["llm_port"] = c.llm_port;
    j["llm_model"] = c.llm_model;
    j["encoder_backend"] = c.encoder_backend;
    j["encoder_host"] = c.encoder_host;
    j["encoder_port"] = c.encoder_port;
    j["embedding_dim"] = c.embedding_dim;
    j["nli_backend"] = c.nli_backend;
    j["nli_table_path"] = c.nli_table_path;
    j["k_foundation"] = c.k_foundation;
    j["landmark_year"] = c.landmark_year;
    j["now_year"] = c.now_year;
    j["tau_semantic"] = c.tau_semantic;
    j["semantic_in_traversal"] = c.semantic_in_traversal;
    j["leiden_resolution"] = c.leiden_resolution;
    j["leiden_restarts"] = c.leiden_restarts;
    j["t_max"] = c.t_max;
    j["outline_threshold"] = c.outline_threshold;
    j["section_threshold"] = c.section_threshold;
    j["retrieve_top_k"] = c.retrieve_top_k;
    j["temperature_prose"] = c.temperature_prose;
    j["temperature_eval"] = c.temperature_eval;
    j["llm_retries"] = c.llm_retries;
    j["use_vertical"] = c.use_vertical;
    j["use_horizontal"] = c.use_horizontal;
    j["multiagent"] = c.multiagent;
    j["seed"] = c.seed;
    j["concurrency"] = c.concurrency;
    j["parallel_subsections"] = c.parallel_subsections;
    j["out_dir"] = c.out_dir;
    j["prompt_hashes"] = c.prompt_hashes;
    return j;
}

inline void apply_config_json(RunConfig& c, const nlohmann::json& j) {
    c.query = j.value("query", c.query);
    c.source_kind = j.value("source_kind", c.source_kind);
    c.source_path = j.value("source_path", c.source_path);
    c.source_host = j.value("source_host", c.source_host);
    c.source_port = j.value("source_port", c.source_port);
    c.fetch_limit = j.value("fetch_limit", c.fetch_limit);
    c.keywords_max = j.value("keywords_max", c.keywords_max);
    c.llm_backend = j.value("llm_backend", c.llm_backend);
    c.llm_host = j.value("llm_host", c.llm_host);
    c.llm_port = j.value("llm_port", c.llm_port);
    c.llm_model = j.value("llm_model", c.llm_model);
    c.encoder_backend = j.value("encoder_backend", c.encoder_backend);
    c.encoder_host = j.value("encoder_host", c.encoder_host);
    c.encoder_port = j.value("encoder_port", c.encoder_port);
    c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
    c.nli_backend = j.value("nli_backend", c.nli_backend);
    c.nli_table_path = j.value("nli_table_path", c.nli_table_path);
    c.k_foundation = j.value("k_foundation", c.k_foundation);
    c.landmark_year = j.value("landmark_year", c.landmark_year);
    c.now_year = j.value("now_year", c.now_year);
    c.tau_semantic = j.value("tau_semantic", c.tau_semantic);
    c.semantic_in_traversal = j.value("semantic_in_traversal", c.semantic_in_traversal);
    c.leiden_resolution = j.value("leiden_resolution", c.leiden_resolution);
    c.leiden_restarts = j.value("leiden_restarts", c.leiden_restarts);
    c.t_max = j.value("t_max", c.t_max);
    c.outline_threshold = j.value("outline_threshold", c.outline_threshold);
    c.section_threshold = j.value("section_threshold", c.section_threshold);
    c.retrieve_top_k = j.value("retrieve_top_k", c.retrieve_top_k);
    c.temperature_prose = j.value("temperature_prose", c.temperature_prose);
    c.temperature_eval = j.value("temperature_eval", c.temperature_eval);
    c.llm_retries = j.value("llm_retries", c.llm_retries);
    c.use_vertical = j.value("use_vertical", c.use_vertical);
    c.use_horizontal = j.value("use_horizontal", c.use_horizontal);
    c.multiagent = j.value("multiagent", c.multiagent);
    c.seed = j.value("seed", c.seed);
    c.concurrency = j.value("concurrency", c.concurrency);
    c.parallel_subsections = j.value("parallel_subsections", c.parallel_subsections);
    c.out_dir = j.value("out_dir", c.out_dir);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path, "config");
    RunConfig c;
    apply_config_json(c, nlohmann::json::parse(in));
    return c;
}

// Throws ConfigError naming the first offending field.
inline void validate_config(const RunConfig& c) {
    auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigError("invalid config field " + field + ": " + why, field);
    };
    if (c.fetch_limit < 1) fail("fetch_limit", "must be >= 1");
    if (c.keywords_max < 1) fail("keywords_max", "must be >= 1");
    if (c.embedding_dim < 1) fail("embedding_dim", "must be >= 1");
    if (c.k_foundation < 0) fail("k_foundation", "must be >= 0");
    if (c.now_year < 1900) fail("now_year", "must be >= 1900");
    if (c.tau_semantic < 0.0 || c.tau_semantic > 1.0)
        fail("tau_semantic", "must be in [0,1]");
    if (c.leiden_resolution <= 0) fail("leiden_resolution", "must be > 0");
    if (c.leiden_restarts < 1) fail("leiden_restarts", "must be >= 1");
    if (c.t_max < 1) fail("t_max", "must be >= 1");
    if (c.outline_threshold < 1 || c.outline_threshold > 5)
        fail("outline_threshold", "must be in 1-5");
    if (c.section_threshold < 1 || c.section_threshold > 5)
        fail("section_threshold", "must be in 1-5");
    if (c.retrieve_top_k < 1) fail("retrieve_top_k", "must be >= 1");
    if (c.llm_retries < 0) fail("llm_retries", "must be >= 0");
    if (c.concurrency < 1) fail("concurrency", "must be >= 1");
    if (!c.use_vertical && !c.use_horizontal)
        fail("use_vertical", "cannot disable both vertical and horizontal memory");
}

// Stable under key reordering: the plain json object sorts keys.
inline std::string config_hash(const RunConfig& c) {
    return content_hash(config_to_json(c).dump());
}

}  // namespace surveyg
