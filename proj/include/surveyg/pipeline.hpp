#pragma once
// Stage orchestration: ingest -> graph -> summarize -> generate -> eval,
// each reading and writing its documented files under the output directory.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "surveyg/agents.hpp"
#include "surveyg/citeval.hpp"
#include "surveyg/config.hpp"
#include "surveyg/corpus_io.hpp"
#include "surveyg/encoder.hpp"
#include "surveyg/graph.hpp"
#include "surveyg/ingest.hpp"
#include "surveyg/leiden.hpp"
#include "surveyg/llm.hpp"
#include "surveyg/traversal.hpp"

#include <json.hpp>

namespace surveyg {

enum class Stage { ingest, graph, summarize, generate, eval, all };

inline Stage stage_from_string(const std::string& s) {
    if (s == "ingest") return Stage::ingest;
    if (s == "graph") return Stage::graph;
    if (s == "summarize") return Stage::summarize;
    if (s == "generate") return Stage::generate;
    if (s == "eval") return Stage::eval;
    if (s == "all") return Stage::all;
    throw PreconditionError("unknown stage: " + s);
}

// Delegating backend that accumulates token usage across calls.
class UsageCountingBackend : public LlmBackend {
public:
    explicit UsageCountingBackend(LlmBackend& inner) : inner_(inner) {}

    CompletionResult complete(const CompletionRequest& request) override {
        CompletionResult result = inner_.complete(request);
        std::lock_guard lock(mutex_);
        input_tokens_ += result.input_tokens;
        output_tokens_ += result.output_tokens;
        ++calls_;
        return result;
    }

    std::string tag() const override { return inner_.tag(); }
    long long input_tokens() const { return input_tokens_; }
    long long output_tokens() const { return output_tokens_; }
    long long calls() const { return calls_; }

private:
    LlmBackend& inner_;
    std::mutex mutex_;
    long long input_tokens_ = 0;
    long long output_tokens_ = 0;
    long long calls_ = 0;
};

struct PipelineBackends {
    LlmBackend* llm = nullptr;
    Encoder* encoder = nullptr;
    NliBackend* nli = nullptr;
};

// Owns mock backends when the config selects them; HTTP backends are wired
// by the CLI (see surveyg/http.hpp) and passed through `external`.
struct BackendSet {
    std::unique_ptr<MockLlmBackend> mock_llm;
    std::unique_ptr<MockEncoder> mock_encoder;
    std::unique_ptr<MockNli> mock_nli;
    PipelineBackends refs;
};

inline BackendSet make_backends(const RunConfig& config,
                                PipelineBackends external = {}) {
    BackendSet set;
    if (external.llm) {
        set.refs.llm = external.llm;
    } else if (config.llm_backend == "mock") {
        set.mock_llm = std::make_unique<MockLlmBackend>(config.seed);
        set.refs.llm = set.mock_llm.get();
    } else {
        throw ConfigError("llm backend '" + config.llm_backend +
                              "' needs an externally wired client",
                          "llm_backend");
    }
    if (external.encoder) {
        set.refs.encoder = external.encoder;
    } else if (config.encoder_backend == "mock") {
        set.mock_encoder =
            std::make_unique<MockEncoder>(config.embedding_dim, config.seed);
        set.refs.encoder = set.mock_encoder.get();
    } else {
        throw ConfigError("encoder backend '" + config.encoder_backend +
                              "' needs an externally wired client",
                          "encoder_backend");
    }
    if (external.nli) {
        set.refs.nli = external.nli;
    } else if (config.nli_backend == "mock") {
        if (!config.nli_table_path.empty()) {
            std::ifstream in(config.nli_table_path);
            if (!in)
                throw ConfigError("cannot open NLI table: " + config.nli_table_path,
                                  "nli_table_path");
            set.mock_nli = std::make_unique<MockNli>(
                MockNli::from_json(nlohmann::json::parse(in)));
        } else {
            set.mock_nli = std::make_unique<MockNli>();
        }
        set.refs.nli = set.mock_nli.get();
    } else {
        throw ConfigError("nli backend '" + config.nli_backend +
                              "' needs an externally wired client",
                          "nli_backend");
    }
    return set;
}

struct StageResult {
    std::vector<std::string> outputs;  // file paths written
};

namespace pipeline_detail {

inline void require_file(const fs::path& path) {
    if (!fs::exists(path)) throw MissingInputError(path.string());
}

inline void write_file(const fs::path& path, const std::string& content,
                       StageResult& result) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
    result.outputs.push_back(path.string());
}

inline nlohmann::json read_json(const fs::path& path) {
    require_file(path);
    std::ifstream in(path);
    return nlohmann::json::parse(in);
}

inline GenerationConfig generation_config(const RunConfig& config) {
    GenerationConfig g;
    g.t_max = config.t_max;
    g.outline_threshold = config.outline_threshold;
    g.section_threshold = config.section_threshold;
    g.retrieve_top_k = config.retrieve_top_k;
    g.multiagent = config.multiagent;
    g.use_vertical = config.use_vertical;
    g.use_horizontal = config.use_horizontal;
    g.parallel_subsections = config.parallel_subsections;
    g.concurrency = static_cast<size_t>(config.concurrency);
    g.retry.max_retries = config.llm_retries;
    return g;
}

}  // namespace pipeline_detail

class Pipeline {
public:
    Pipeline(RunConfig config, PipelineBackends external = {},
             std::unique_ptr<PaperSource> source = nullptr)
        : config_(std::move(config)),
          backends_(make_backends(config_, external)),
          usage_(*backends_.refs.llm),
          source_(std::move(source)) {
        validate_config(config_);
        if (!source_ && config_.source_kind == "fixture" &&
            !config_.source_path.empty())
            source_ = std::make_unique<FixtureSource>(config_.source_path);
    }

    const RunConfig& config() const { return config_; }
    UsageCountingBackend& llm() { return usage_; }
    Encoder& encoder() { return *backends_.refs.encoder; }
    NliBackend& nli() { return *backends_.refs.nli; }

    fs::path out(const std::string& name) const {
        return fs::path(config_.out_dir) / name;
    }

    StageResult run_ingest() {
        StageResult result;
        if (!source_) throw ConfigError("no paper source configured", "source_kind");
        RetryPolicy retry{config_.llm_retries};
        KeywordSet keywords =
            expand_query(config_.query, usage_, config_.keywords_max, retry);
        Corpus corpus = fetch_papers(keywords, *source_, config_.fetch_limit);
        if (!corpus.papers.empty()) {
            summarize_corpus(corpus, usage_, config_.concurrency, retry);
            embed_corpus(corpus, encoder(), config_.concurrency);
        } else {
            corpus.embedding_dim = encoder().dim();
        }
        validate_corpus(corpus);
        save_corpus(corpus, out("corpus"));
        for (const auto& entry : fs::directory_iterator(out("corpus")))
            result.outputs.push_back(entry.path().string());
        std::sort(result.outputs.begin(), result.outputs.end());

        nlohmann::ordered_json kw;
        kw["query"] = keywords.query;
        kw["keywords"] = keywords.keywords;
        kw["fallback"] = keywords.fallback;
        pipeline_detail::write_file(out("keywords.json"), kw.dump(2) + "\n", result);
        return result;
    }

    StageResult run_graph() {
        StageResult result;
        Corpus corpus = load_corpus(out("corpus"));
        HierarchicalGraph graph = build_graph(corpus, graph_config());
        auto communities = all_communities(graph);

        nlohmann::ordered_json j = graph_to_json(graph);
        j["k_foundation"] = config_.k_foundation;
        j["landmark_year"] = config_.landmark_year;
        nlohmann::ordered_json comm = nlohmann::ordered_json::array();
        for (const auto& c : communities) {
            comm.push_back({{"community_id", c.community_id},
                            {"layer", to_string(c.layer)},
                            {"index", c.index},
                            {"member_ids", c.member_ids}});
        }
        j["communities"] = comm;
        pipeline_detail::write_file(out("graph.json"), j.dump(2) + "\n", result);
        pipeline_detail::write_file(out("graph.dot"), graph_to_dot(graph), result);
        return result;
    }

    StageResult run_summarize() {
        StageResult result;
        Corpus corpus = load_corpus(out("corpus"));
        nlohmann::json gj = pipeline_detail::read_json(out("graph.json"));
        HierarchicalGraph graph =
            graph_from_json(gj, config_.semantic_in_traversal);
        std::vector<Community> communities = communities_from_json(gj);

        RetryPolicy retry{config_.llm_retries};
        std::vector<SummaryArtifact> artifacts;
        if (config_.use_vertical && config_.use_horizontal) {
            artifacts = build_memory(graph, corpus, communities, usage_,
                                     config_.query, config_.concurrency, retry);
        } else if (config_.use_vertical) {
            auto paths = vertical_paths(graph);
            artifacts.resize(paths.size());
            parallel_for(paths.size(), config_.concurrency, [&](size_t i) {
                artifacts[i] = summarize_vertical(paths[i], corpus, usage_, retry);
            });
        } else {
            artifacts.resize(communities.size());
            parallel_for(communities.size(), config_.concurrency, [&](size_t i) {
                artifacts[i] = summarize_horizontal(communities[i], corpus, usage_,
                                                    config_.query, retry);
            });
        }
        pipeline_detail::write_file(out("memory.json"),
                                    memory_to_json(artifacts).dump(2) + "\n", result);
        return result;
    }

    StageResult run_generate() {
        StageResult result;
        Corpus corpus = load_corpus(out("corpus"));
        AgentMemory memory(
            memory_from_json(pipeline_detail::read_json(out("memory.json"))));
        GenerationConfig gen = pipeline_detail::generation_config(config_);

        OutlineDraft outline = outline_phase(memory, config_.query, usage_, gen);
        pipeline_detail::write_file(out("outline.json"),
                                    outline_to_json(outline).dump(2) + "\n", result);

        auto sections =
            subsection_phase(outline, memory, corpus, encoder(), usage_, gen);
        SurveyDocument doc = assemble(
            outline, sections, corpus, config_.query,
            {{"config_hash", config_hash(config_)},
             {"seed", std::to_string(config_.seed)},
             {"backend", usage_.tag()}});

        pipeline_detail::write_file(out("survey.tex"), survey_to_latex(doc, corpus),
                                    result);
        pipeline_detail::write_file(out("survey.md"),
                                    survey_to_markdown(doc, corpus), result);
        pipeline_detail::write_file(out("references.bib"),
                                    bibliography_to_bibtex(doc, corpus), result);
        pipeline_detail::write_file(out("survey.json"),
                                    survey_to_json(doc).dump(2) + "\n", result);
        return result;
    }

    StageResult run_eval() {
        StageResult result;
        Corpus corpus = load_corpus(out("corpus"));
        SurveyDocument doc =
            survey_from_json(pipeline_detail::read_json(out("survey.json")));
        auto claims = extract_claims(doc);
        CitationReport report = score(claims, corpus, nli());
        pipeline_detail::write_file(out("report.json"),
                                    report_to_json(report).dump(2) + "\n", result);
        pipeline_detail::write_file(out("report.txt"), report_to_table(report),
                                    result);
        return result;
    }

    // Runs the stage, appends to the run manifest, returns outputs.
    StageResult run(Stage stage) {
        using clock = std::chrono::steady_clock;
        std::vector<Stage> stages;
        if (stage == Stage::all) {
            stages = {Stage::ingest, Stage::graph, Stage::summarize, Stage::generate,
                      Stage::eval};
        } else {
            stages = {stage};
        }
        StageResult all_outputs;
        nlohmann::ordered_json stage_log = nlohmann::ordered_json::array();
        for (Stage s : stages) {
            auto t0 = clock::now();
            StageResult r;
            switch (s) {
                case Stage::ingest: r = run_ingest(); break;
                case Stage::graph: r = run_graph(); break;
                case Stage::summarize: r = run_summarize(); break;
                case Stage::generate: r = run_generate(); break;
                case Stage::eval: r = run_eval(); break;
                default: break;
            }
            auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          clock::now() - t0)
                          .count();
            nlohmann::ordered_json entry;
            entry["stage"] = stage_name(s);
            entry["duration_ms"] = ms;
            entry["outputs"] = r.outputs;
            stage_log.push_back(std::move(entry));
            for (auto& o : r.outputs) all_outputs.outputs.push_back(o);
        }
        write_manifest(stage_log, all_outputs);
        return all_outputs;
    }

    // Survey document round-trip for the eval stage.
    static nlohmann::ordered_json survey_to_json(const SurveyDocument& doc) {
        nlohmann::ordered_json j;
        j["topic"] = doc.topic;
        j["outline"] = outline_to_json(doc.outline);
        nlohmann::ordered_json secs = nlohmann::ordered_json::array();
        for (const auto& s : doc.sections) {
            secs.push_back({{"key", s.key},
                            {"title", s.title},
                            {"body", s.body},
                            {"word_count", s.word_count},
                            {"revision", s.revision},
                            {"retrieved_ids", s.retrieved_ids},
                            {"short_flagged", s.short_flagged}});
        }
        j["sections"] = secs;
        j["bibliography"] = doc.bibliography;
        j["metadata"] = doc.metadata;
        return j;
    }

    static SurveyDocument survey_from_json(const nlohmann::json& j) {
        SurveyDocument doc;
        doc.topic = j.at("topic").get<std::string>();
        doc.outline = outline_from_json(j.at("outline"));
        for (const auto& s : j.at("sections")) {
            SectionText sec;
            sec.key = s.at("key").get<std::string>();
            sec.title = s.value("title", "");
            sec.body = s.at("body").get<std::string>();
            sec.word_count = s.value("word_count", 0LL);
            sec.revision = s.value("revision", 0);
            sec.retrieved_ids =
                s.value("retrieved_ids", std::vector<std::string>{});
            sec.short_flagged = s.value("short_flagged", false);
            doc.sections.push_back(std::move(sec));
        }
        doc.bibliography = j.value("bibliography", std::vector<std::string>{});
        if (j.contains("metadata"))
            for (auto& [k, v] : j["metadata"].items())
                doc.metadata[k] = v.get<std::string>();
        return doc;
    }

private:
    GraphConfig graph_config() const {
        GraphConfig g;
        g.tau_semantic = config_.tau_semantic;
        g.k_foundation = config_.k_foundation;
        g.landmark_year = config_.landmark_year;
        g.now_year = config_.now_year;
        g.semantic_in_traversal = config_.semantic_in_traversal;
        return g;
    }

    std::vector<Community> all_communities(const HierarchicalGraph& graph) const {
        std::vector<Community> out;
        for (Layer layer : {Layer::Foundation, Layer::Development, Layer::Frontier}) {
            auto part = partition_layer_best(graph, layer, config_.leiden_resolution,
                                             config_.seed, config_.leiden_restarts);
            for (auto& c : part) out.push_back(std::move(c));
        }
        return out;
    }

    static std::vector<Community> communities_from_json(const nlohmann::json& gj) {
        std::vector<Community> out;
        for (const auto& c : gj.at("communities")) {
            Community comm;
            comm.community_id = c.at("community_id").get<std::string>();
            comm.layer = layer_from_string(c.at("layer").get<std::string>());
            comm.index = c.at("index").get<int>();
            for (const auto& m : c.at("member_ids"))
                comm.member_ids.insert(m.get<std::string>());
            out.push_back(std::move(comm));
        }
        return out;
    }

    static std::string stage_name(Stage s) {
        switch (s) {
            case Stage::ingest: return "ingest";
            case Stage::graph: return "graph";
            case Stage::summarize: return "summarize";
            case Stage::generate: return "generate";
            case Stage::eval: return "eval";
            default: return "all";
        }
    }

    void write_manifest(const nlohmann::ordered_json& stage_log,
                        const StageResult& outputs) {
        nlohmann::ordered_json manifest;
        manifest["config_hash"] = config_hash(config_);
        manifest["seed"] = config_.seed;
        manifest["backend"] = usage_.tag();
        manifest["token_usage"] = {{"input_tokens", usage_.input_tokens()},
                                   {"output_tokens", usage_.output_tokens()},
                                   {"calls", usage_.calls()}};
        manifest["stages"] = stage_log;
        nlohmann::ordered_json files = nlohmann::ordered_json::array();
        for (const auto& path : outputs.outputs) {
            if (!fs::is_regular_file(path)) continue;
            std::ifstream in(path, std::ios::binary);
            std::string content((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
            files.push_back({{"path", path}, {"hash", content_hash(content)}});
        }
        manifest["files"] = files;
        fs::create_directories(config_.out_dir);
        std::ofstream out_file(out("run_manifest.json"));
        out_file << manifest.dump(2) << '\n';
    }

    RunConfig config_;
    BackendSet backends_;
    UsageCountingBackend usage_;
    std::unique_ptr<PaperSource> source_;
};

}  // namespace surveyg
