#pragma once
// Graph traversal and the K+N summary artifacts: weighted BFS, vertical
// path extraction, horizontal community summaries, and the agent memory.

#include <deque>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "surveyg/common.hpp"
#include "surveyg/graph.hpp"
#include "surveyg/leiden.hpp"
#include "surveyg/llm.hpp"
#include "surveyg/paper.hpp"

#include <json.hpp>

namespace surveyg {

// "- [key: id] Title (year, type): summary" — the node-attribute block used
// in every prompt; the mock backend reads the key markers back out.
inline std::string format_paper_block(const PaperRecord& p) {
    std::string out = "- [key: " + p.id + "] " + p.title + " (" +
                      std::to_string(p.year) + ", " + to_string(p.paper_type) +
                      "): " + p.best_text();
    return out;
}

inline std::string format_paper_blocks(const Corpus& corpus,
                                       const std::vector<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) out += '\n';
        out += format_paper_block(corpus.at(id));
    }
    return out;
}

// Weighted BFS, multi-source. Successors are visited in descending edge
// weight (ties: ascending id); a successor in the target layer is collected
// but never expanded.
inline std::vector<std::string> wbfs(const HierarchicalGraph& graph,
                                     const std::set<std::string>& sources,
                                     Layer target_layer) {
    for (const auto& s : sources)
        if (!graph.contains(s)) throw PreconditionError("wbfs: unknown source " + s);

    std::set<std::string> visited(sources.begin(), sources.end());
    std::deque<std::string> queue(sources.begin(), sources.end());  // ascending id
    std::vector<std::string> collected;

    while (!queue.empty()) {
        std::string u = queue.front();
        queue.pop_front();
        for (const auto& nbr : graph.successors(u)) {
            if (visited.count(nbr.id)) continue;
            visited.insert(nbr.id);
            if (graph.layers().layer(nbr.id) == target_layer)
                collected.push_back(nbr.id);
            else
                queue.push_back(nbr.id);
        }
    }
    return collected;
}

struct TraversalPath {
    std::string seed;                 // Foundation paper id
    std::vector<std::string> p2_ids;  // Development tier, WBFS order
    std::vector<std::string> p3_ids;  // Frontier tier, WBFS order
};

inline std::vector<TraversalPath> vertical_paths(const HierarchicalGraph& graph) {
    auto foundation = graph.layers().members(Layer::Foundation);
    if (foundation.empty())
        throw PreconditionError("vertical_paths: empty Foundation layer");
    std::sort(foundation.begin(), foundation.end());

    std::vector<TraversalPath> paths;
    for (const auto& seed : foundation) {
        TraversalPath path;
        path.seed = seed;
        path.p2_ids = wbfs(graph, {seed}, Layer::Development);
        if (!path.p2_ids.empty()) {
            std::set<std::string> p2_set(path.p2_ids.begin(), path.p2_ids.end());
            path.p3_ids = wbfs(graph, p2_set, Layer::Frontier);
        }
        paths.push_back(std::move(path));
    }
    return paths;
}

struct SummaryArtifact {
    std::string artifact_id;  // community id, or "seed_<paper id>"
    enum class Kind { horizontal, vertical } kind;
    std::vector<std::string> source_ids;
    std::string text;
    std::string dev_summary;    // vertical only: the intermediate stage-1 text
    std::string layer_or_seed;  // provenance tag
    bool degraded = false;
};

inline SummaryArtifact summarize_horizontal(const Community& community,
                                            const Corpus& corpus,
                                            LlmBackend& backend,
                                            const std::string& query,
                                            RetryPolicy retry = {}) {
    if (community.member_ids.empty())
        throw PreconditionError("summarize_horizontal: empty community");

    SummaryArtifact artifact;
    artifact.artifact_id = community.community_id;
    artifact.kind = SummaryArtifact::Kind::horizontal;
    artifact.source_ids.assign(community.member_ids.begin(),
                               community.member_ids.end());
    artifact.layer_or_seed = to_string(community.layer);

    CompletionRequest request;
    request.template_name = TemplateName::horizontal_summary;
    request.rendered =
        render(TemplateName::horizontal_summary,
               {{"QUERY", query},
                {"papers", format_paper_blocks(corpus, artifact.source_ids)}});
    try {
        artifact.text = complete_with_retry(backend, request, retry).text;
    } catch (const TransportError&) {
        std::string joined;
        for (const auto& id : artifact.source_ids) {
            if (!joined.empty()) joined += "\n";
            joined += corpus.at(id).best_text();
        }
        artifact.text = joined;
        artifact.degraded = true;
    }
    return artifact;
}

inline SummaryArtifact summarize_vertical(const TraversalPath& path,
                                          const Corpus& corpus, LlmBackend& backend,
                                          RetryPolicy retry = {}) {
    SummaryArtifact artifact;
    artifact.artifact_id = "seed_" + path.seed;
    artifact.kind = SummaryArtifact::Kind::vertical;
    artifact.layer_or_seed = path.seed;
    artifact.source_ids.push_back(path.seed);
    for (const auto& id : path.p2_ids) artifact.source_ids.push_back(id);
    for (const auto& id : path.p3_ids) artifact.source_ids.push_back(id);

    std::vector<std::string> stage1_ids;
    stage1_ids.push_back(path.seed);
    for (const auto& id : path.p2_ids) stage1_ids.push_back(id);

    auto complete_or_degrade = [&](TemplateName name,
                                   const std::map<std::string, std::string>& bindings,
                                   const std::vector<std::string>& fallback_ids,
                                   bool& degraded) {
        CompletionRequest request;
        request.template_name = name;
        request.rendered = render(name, bindings);
        try {
            return complete_with_retry(backend, request, retry).text;
        } catch (const TransportError&) {
            degraded = true;
            std::string joined;
            for (const auto& id : fallback_ids) {
                if (!joined.empty()) joined += "\n";
                joined += corpus.at(id).best_text();
            }
            return joined;
        }
    };

    artifact.dev_summary = complete_or_degrade(
        TemplateName::vertical_stage1,
        {{"papers", format_paper_blocks(corpus, stage1_ids)}}, stage1_ids,
        artifact.degraded);
    artifact.text = complete_or_degrade(
        TemplateName::vertical_stage2,
        {{"dev_summary", artifact.dev_summary},
         {"papers", format_paper_blocks(corpus, path.p3_ids)}},
        artifact.source_ids, artifact.degraded);
    return artifact;
}

// K vertical artifacts (one per Foundation seed) + N horizontal artifacts
// (one per community across the three layers).
inline std::vector<SummaryArtifact> build_memory(
    const HierarchicalGraph& graph, const Corpus& corpus,
    const std::vector<Community>& communities, LlmBackend& backend,
    const std::string& query, size_t concurrency = 8, RetryPolicy retry = {}) {
    auto paths = vertical_paths(graph);

    std::vector<SummaryArtifact> artifacts(paths.size() + communities.size());
    parallel_for(paths.size(), concurrency, [&](size_t i) {
        artifacts[i] = summarize_vertical(paths[i], corpus, backend, retry);
    });
    parallel_for(communities.size(), concurrency, [&](size_t i) {
        artifacts[paths.size() + i] =
            summarize_horizontal(communities[i], corpus, backend, query, retry);
    });

    std::set<std::string> seen;
    for (const auto& a : artifacts)
        if (!seen.insert(a.artifact_id).second)
            throw ValidationError("duplicate artifact id: " + a.artifact_id);
    return artifacts;
}

// ------------------------------------------------------------- memory IO

inline nlohmann::ordered_json memory_to_json(
    const std::vector<SummaryArtifact>& artifacts) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& a : artifacts) {
        nlohmann::ordered_json j;
        j["artifact_id"] = a.artifact_id;
        j["kind"] = a.kind == SummaryArtifact::Kind::horizontal ? "horizontal"
                                                                : "vertical";
        j["source_ids"] = a.source_ids;
        j["text"] = a.text;
        if (!a.dev_summary.empty()) j["dev_summary"] = a.dev_summary;
        j["layer_or_seed"] = a.layer_or_seed;
        j["degraded"] = a.degraded;
        arr.push_back(std::move(j));
    }
    return arr;
}

inline std::vector<SummaryArtifact> memory_from_json(const nlohmann::json& arr) {
    std::vector<SummaryArtifact> out;
    for (const auto& j : arr) {
        SummaryArtifact a;
        a.artifact_id = j.at("artifact_id").get<std::string>();
        a.kind = j.at("kind") == "horizontal" ? SummaryArtifact::Kind::horizontal
                                              : SummaryArtifact::Kind::vertical;
        a.source_ids = j.at("source_ids").get<std::vector<std::string>>();
        a.text = j.at("text").get<std::string>();
        a.dev_summary = j.value("dev_summary", "");
        a.layer_or_seed = j.value("layer_or_seed", "");
        a.degraded = j.value("degraded", false);
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace surveyg
