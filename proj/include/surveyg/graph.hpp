#pragma once
// The hierarchical citation graph: citation + semantic edges weighted by
// abstract similarity, and the Foundation/Development/Frontier layering.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "surveyg/common.hpp"
#include "surveyg/encoder.hpp"
#include "surveyg/paper.hpp"

#include <json.hpp>

namespace surveyg {

enum class Layer { Foundation, Development, Frontier };

inline std::string to_string(Layer l) {
    switch (l) {
        case Layer::Foundation: return "Foundation";
        case Layer::Development: return "Development";
        default: return "Frontier";
    }
}

inline Layer layer_from_string(std::string_view s) {
    if (s == "Foundation") return Layer::Foundation;
    if (s == "Development") return Layer::Development;
    if (s == "Frontier") return Layer::Frontier;
    throw PreconditionError("unknown layer: " + std::string(s));
}

enum class EdgeKind { citation, semantic };

struct Edge {
    std::string src;  // citation: citing paper; semantic: smaller id
    std::string dst;  // citation: cited paper;  semantic: larger id
    EdgeKind kind;
    double weight;  // abstract-similarity of the endpoints
};

// citation_count / (1 + years since publication)
inline double trending_score(long long citation_count, int age_years) {
    if (citation_count < 0) throw PreconditionError("negative citation_count");
    if (age_years < 0) throw PreconditionError("negative age_years");
    return static_cast<double>(citation_count) / (1.0 + age_years);
}

struct LayerAssignment {
    std::map<std::string, Layer> layer_of;
    std::map<std::string, double> score_of;
    int k_foundation = 0;
    int landmark_year = 0;
    std::vector<std::string> flagged_missing_year;

    Layer layer(const std::string& id) const {
        auto it = layer_of.find(id);
        if (it == layer_of.end()) throw PreconditionError("unknown node: " + id);
        return it->second;
    }

    std::vector<std::string> members(Layer l) const {
        std::vector<std::string> out;
        for (const auto& [id, lay] : layer_of)
            if (lay == l) out.push_back(id);
        return out;
    }
};

inline EmbeddingVector embedding_of(const PaperRecord& p) {
    if (!p.embedding)
        throw PreconditionError("paper " + p.id + " not embedded");
    return EmbeddingVector{*p.embedding};
}

inline std::vector<Edge> build_edges(const Corpus& corpus, double tau_semantic) {
    if (tau_semantic < 0.0 || tau_semantic > 1.0)
        throw PreconditionError("tau_semantic out of [0,1]");
    for (const auto& [id, p] : corpus.papers)
        if (!p.embedding) throw PreconditionError("paper " + id + " not embedded");

    std::vector<Edge> edges;
    std::set<std::pair<std::string, std::string>> linked;  // unordered, src<dst

    for (const auto& [id, p] : corpus.papers) {
        for (const auto& cited : p.cited_ids) {
            if (!corpus.contains(cited) || cited == id) continue;  // external refs skipped
            double w = cosine_by_id(id, embedding_of(p), cited,
                                    embedding_of(corpus.at(cited)));
            edges.push_back({id, cited, EdgeKind::citation, w});
            linked.insert(id < cited ? std::make_pair(id, cited)
                                     : std::make_pair(cited, id));
        }
    }

    auto ids = corpus.ids();
    for (size_t i = 0; i < ids.size(); ++i) {
        for (size_t j = i + 1; j < ids.size(); ++j) {
            if (linked.count({ids[i], ids[j]})) continue;
            double w = cosine_by_id(ids[i], embedding_of(corpus.at(ids[i])),
                                    ids[j], embedding_of(corpus.at(ids[j])));
            if (w >= tau_semantic)
                edges.push_back({ids[i], ids[j], EdgeKind::semantic, w});
        }
    }
    return edges;
}

inline LayerAssignment assign_layers(const Corpus& corpus, int k,
                                     int landmark_year, int now_year) {
    if (k < 0) throw PreconditionError("k_foundation must be >= 0");
    if (corpus.papers.empty()) throw PreconditionError("empty corpus");

    LayerAssignment out;
    out.k_foundation = k;
    out.landmark_year = landmark_year;

    struct Ranked {
        std::string id;
        double score;
        long long citations;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(corpus.size());
    for (const auto& [id, p] : corpus.papers) {
        int age = std::max(0, now_year - p.year);
        double score = trending_score(p.citation_count, age);
        out.score_of[id] = score;
        ranked.push_back({id, score, p.citation_count});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.citations != b.citations) return a.citations > b.citations;
        return a.id < b.id;
    });

    size_t foundation_n = std::min<size_t>(k, ranked.size());
    for (size_t i = 0; i < ranked.size(); ++i) {
        const auto& r = ranked[i];
        const auto& p = corpus.at(r.id);
        if (i < foundation_n) {
            out.layer_of[r.id] = Layer::Foundation;
        } else if (p.year_missing) {
            out.layer_of[r.id] = Layer::Frontier;
            out.flagged_missing_year.push_back(r.id);
        } else {
            out.layer_of[r.id] =
                p.year < landmark_year ? Layer::Development : Layer::Frontier;
        }
    }
    std::sort(out.flagged_missing_year.begin(), out.flagged_missing_year.end());
    return out;
}

struct GraphConfig {
    double tau_semantic = 0.75;
    int k_foundation = 10;
    int landmark_year = 2026;
    int now_year = 2026;
    bool semantic_in_traversal = true;  // semantic edges usable by WBFS
};

class HierarchicalGraph {
public:
    HierarchicalGraph(std::set<std::string> node_ids, std::vector<Edge> edges,
                      LayerAssignment layers, bool semantic_in_traversal = true)
        : node_ids_(std::move(node_ids)),
          edges_(std::move(edges)),
          layers_(std::move(layers)) {
        for (const auto& e : edges_) {
            if (!node_ids_.count(e.src) || !node_ids_.count(e.dst))
                throw PreconditionError("edge endpoint outside node set");
            // Undirected weighted view for community detection.
            undirected_[e.src].push_back({e.dst, e.weight});
            undirected_[e.dst].push_back({e.src, e.weight});
            // Traversal successors: reverse-citation (cited -> citing) plus,
            // optionally, semantic neighbors in both directions.
            if (e.kind == EdgeKind::citation) {
                successors_[e.dst].push_back({e.src, e.weight});
            } else if (semantic_in_traversal) {
                successors_[e.src].push_back({e.dst, e.weight});
                successors_[e.dst].push_back({e.src, e.weight});
            }
        }
        auto by_weight_desc = [](const Neighbor& a, const Neighbor& b) {
            if (a.weight != b.weight) return a.weight > b.weight;
            return a.id < b.id;
        };
        for (auto& [_, nbrs] : successors_)
            std::sort(nbrs.begin(), nbrs.end(), by_weight_desc);
        for (auto& [_, nbrs] : undirected_) {
            std::sort(nbrs.begin(), nbrs.end(), [](const Neighbor& a, const Neighbor& b) {
                return a.id < b.id;
            });
        }
    }

    struct Neighbor {
        std::string id;
        double weight;
    };

    const std::set<std::string>& node_ids() const { return node_ids_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const LayerAssignment& layers() const { return layers_; }
    bool contains(const std::string& id) const { return node_ids_.count(id) > 0; }

    // sorted by weight desc, ties by ascending id
    const std::vector<Neighbor>& successors(const std::string& id) const {
        static const std::vector<Neighbor> kEmpty;
        auto it = successors_.find(id);
        return it == successors_.end() ? kEmpty : it->second;
    }

    const std::vector<Neighbor>& undirected_neighbors(const std::string& id) const {
        static const std::vector<Neighbor> kEmpty;
        auto it = undirected_.find(id);
        return it == undirected_.end() ? kEmpty : it->second;
    }

private:
    std::set<std::string> node_ids_;
    std::vector<Edge> edges_;
    LayerAssignment layers_;
    std::map<std::string, std::vector<Neighbor>> successors_;
    std::map<std::string, std::vector<Neighbor>> undirected_;
};

inline HierarchicalGraph build_graph(const Corpus& corpus, const GraphConfig& config) {
    if (corpus.papers.empty()) throw PreconditionError("empty corpus");
    auto edges = build_edges(corpus, config.tau_semantic);
    auto layers = assign_layers(corpus, config.k_foundation, config.landmark_year,
                                config.now_year);
    std::set<std::string> ids;
    for (const auto& [id, _] : corpus.papers) ids.insert(id);
    return HierarchicalGraph(std::move(ids), std::move(edges), std::move(layers),
                             config.semantic_in_traversal);
}

// ----------------------------------------------------------------- export

inline nlohmann::ordered_json graph_to_json(const HierarchicalGraph& g) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& id : g.node_ids()) {
        nodes.push_back({{"id", id},
                         {"layer", to_string(g.layers().layer(id))},
                         {"score", g.layers().score_of.at(id)}});
    }
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (const auto& e : g.edges()) {
        edges.push_back({{"src", e.src},
                         {"dst", e.dst},
                         {"kind", e.kind == EdgeKind::citation ? "citation" : "semantic"},
                         {"weight", e.weight}});
    }
    return {{"nodes", nodes}, {"edges", edges}};
}

inline HierarchicalGraph graph_from_json(const nlohmann::json& j,
                                         bool semantic_in_traversal = true) {
    std::set<std::string> ids;
    LayerAssignment layers;
    for (const auto& node : j.at("nodes")) {
        std::string id = node.at("id").get<std::string>();
        ids.insert(id);
        layers.layer_of[id] = layer_from_string(node.at("layer").get<std::string>());
        layers.score_of[id] = node.value("score", 0.0);
    }
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
        edges.push_back({e.at("src").get<std::string>(),
                         e.at("dst").get<std::string>(),
                         e.at("kind") == "citation" ? EdgeKind::citation
                                                    : EdgeKind::semantic,
                         e.at("weight").get<double>()});
    }
    return HierarchicalGraph(std::move(ids), std::move(edges), std::move(layers),
                             semantic_in_traversal);
}

inline std::string graph_to_dot(const HierarchicalGraph& g) {
    std::string out = "digraph surveyg {\n";
    for (const auto& id : g.node_ids())
        out += "  \"" + id + "\" [layer=\"" + to_string(g.layers().layer(id)) + "\"];\n";
    for (const auto& e : g.edges()) {
        bool directed = e.kind == EdgeKind::citation;
        out += "  \"" + e.src + "\" -> \"" + e.dst + "\" [weight=" +
               std::to_string(e.weight) +
               (directed ? "" : ", dir=none, style=dashed") + "];\n";
    }
    out += "}\n";
    return out;
}

}  // namespace surveyg
