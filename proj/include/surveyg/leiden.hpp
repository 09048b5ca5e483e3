#pragma once
// Deterministic Leiden community detection (local move, refinement,
// aggregation) over a layer-induced weighted subgraph. Negative edge weights
// are clamped to 0 for modularity purposes.

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "surveyg/common.hpp"
#include "surveyg/graph.hpp"

namespace surveyg {

struct Community {
    Layer layer;
    int index = 0;
    std::set<std::string> member_ids;
    std::string community_id;
};

namespace leiden_detail {

struct WeightedGraph {
    int n = 0;
    // adjacency[i] = (j, w) with i != j; each undirected edge appears in both
    // lists. self_weight[i] holds collapsed-internal weight (aggregation).
    std::vector<std::vector<std::pair<int, double>>> adjacency;
    std::vector<double> self_weight;
    std::vector<double> degree;  // weighted degree incl. 2*self_weight
    double total_weight = 0;     // W: sum of edge weights + self weights
};

inline WeightedGraph make_graph(int n,
                                const std::vector<std::tuple<int, int, double>>& edges) {
    WeightedGraph g;
    g.n = n;
    g.adjacency.assign(n, {});
    g.self_weight.assign(n, 0.0);
    g.degree.assign(n, 0.0);
    for (auto [a, b, w] : edges) {
        w = std::max(w, 0.0);
        if (a == b) {
            g.self_weight[a] += w;
        } else {
            g.adjacency[a].push_back({b, w});
            g.adjacency[b].push_back({a, w});
        }
        g.total_weight += w;
    }
    for (int i = 0; i < n; ++i) {
        double d = 2.0 * g.self_weight[i];
        for (auto& [_, w] : g.adjacency[i]) d += w;
        g.degree[i] = d;
    }
    return g;
}

// Q = sum_c [ in_c / (2W) - gamma * (tot_c / (2W))^2 ], in_c counting each
// internal edge twice (self weights twice as well).
inline double modularity(const WeightedGraph& g, const std::vector<int>& part,
                         double gamma) {
    if (g.total_weight <= 0) return 0.0;
    double two_w = 2.0 * g.total_weight;
    std::map<int, double> in, tot;
    for (int i = 0; i < g.n; ++i) {
        tot[part[i]] += g.degree[i];
        in[part[i]] += 2.0 * g.self_weight[i];
        for (auto& [j, w] : g.adjacency[i])
            if (part[j] == part[i]) in[part[i]] += w;
    }
    double q = 0;
    for (auto& [c, tc] : tot) q += in[c] / two_w - gamma * (tc / two_w) * (tc / two_w);
    return q;
}

inline std::vector<int> shuffled_order(int n, SplitMix64& rng) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i)
        std::swap(order[i], order[static_cast<int>(rng.next_below(i + 1))]);
    return order;
}

// Greedy local moving until stable; returns true if any node moved. Besides
// the neighboring communities, splitting out into a fresh empty community is
// always a candidate.
inline bool local_move(const WeightedGraph& g, std::vector<int>& part, double gamma,
                       SplitMix64& rng) {
    if (g.total_weight <= 0) return false;
    double two_w = 2.0 * g.total_weight;
    std::vector<double> tot(g.n, 0.0);
    std::vector<int> cnt(g.n, 0);
    for (int i = 0; i < g.n; ++i) {
        tot[part[i]] += g.degree[i];
        ++cnt[part[i]];
    }
    std::vector<int> free_ids;
    for (int c = 0; c < g.n; ++c)
        if (cnt[c] == 0) free_ids.push_back(c);

    bool moved_any = false;
    bool improved = true;
    while (improved) {
        improved = false;
        for (int i : shuffled_order(g.n, rng)) {
            int old_c = part[i];
            std::map<int, double> link;  // community -> weight from i
            link[old_c];                 // staying is always a candidate
            for (auto& [j, w] : g.adjacency[i]) link[part[j]] += w;
            int fresh = -1;  // splitting out, if i is not already alone
            if (cnt[old_c] > 1 && !free_ids.empty()) {
                fresh = free_ids.back();
                link[fresh];
            }

            tot[old_c] -= g.degree[i];
            --cnt[old_c];
            // gain of putting the (now isolated) node i into community c
            auto gain = [&](int c) {
                return link[c] / g.total_weight -
                       gamma * tot[c] * g.degree[i] / (two_w * two_w / 2.0);
            };
            int best_c = old_c;
            double best_gain = gain(old_c);
            for (auto& [c, _] : link) {
                double gn = gain(c);
                if (gn > best_gain + 1e-12) {
                    best_c = c;
                    best_gain = gn;
                }
            }
            part[i] = best_c;
            tot[best_c] += g.degree[i];
            ++cnt[best_c];
            if (best_c != old_c) {
                improved = true;
                moved_any = true;
                if (best_c == fresh) free_ids.pop_back();
                if (cnt[old_c] == 0) free_ids.push_back(old_c);
            }
        }
    }
    return moved_any;
}

inline std::vector<int> renumber(std::vector<int> part);

// Greedy pairwise community merging on strict modularity improvement;
// returns true if anything merged.
inline bool merge_pass(const WeightedGraph& g, std::vector<int>& part,
                       double gamma) {
    if (g.total_weight <= 0) return false;
    double w_total = g.total_weight;
    double two_w2 = 2.0 * w_total * w_total;
    bool merged_any = false;
    bool improved = true;
    while (improved) {
        improved = false;
        part = renumber(part);
        int communities = 1 + *std::max_element(part.begin(), part.end());
        if (communities <= 1) break;
        std::vector<double> tot(communities, 0.0);
        std::map<std::pair<int, int>, double> between;
        for (int i = 0; i < g.n; ++i) {
            tot[part[i]] += g.degree[i];
            for (auto& [j, w] : g.adjacency[i])
                if (i < j && part[i] != part[j])
                    between[{std::min(part[i], part[j]),
                             std::max(part[i], part[j])}] += w;
        }
        double best_gain = 1e-12;
        std::pair<int, int> best{-1, -1};
        for (int a = 0; a < communities; ++a)
            for (int b = a + 1; b < communities; ++b) {
                auto it = between.find({a, b});
                double e_ab = it == between.end() ? 0.0 : it->second;
                double gain = e_ab / w_total - gamma * tot[a] * tot[b] / two_w2;
                if (gain > best_gain) {
                    best_gain = gain;
                    best = {a, b};
                }
            }
        if (best.first >= 0) {
            for (int& c : part)
                if (c == best.second) c = best.first;
            improved = true;
            merged_any = true;
        }
    }
    return merged_any;
}

// Refinement: start from singletons inside each local-move community and
// greedily merge connected sub-communities while modularity does not drop.
inline std::vector<int> refine(const WeightedGraph& g, const std::vector<int>& part,
                               double gamma, SplitMix64& rng) {
    std::vector<int> refined(g.n);
    std::iota(refined.begin(), refined.end(), 0);
    if (g.total_weight <= 0) return refined;
    double two_w = 2.0 * g.total_weight;

    std::vector<double> tot(g.n, 0.0);
    std::vector<int> size(g.n, 1);
    for (int i = 0; i < g.n; ++i) tot[i] = g.degree[i];

    for (int i : shuffled_order(g.n, rng)) {
        if (size[refined[i]] > 1) continue;  // only move nodes still alone
        std::map<int, double> link;
        for (auto& [j, w] : g.adjacency[i])
            if (part[j] == part[i]) link[refined[j]] += w;
        int old_r = refined[i];
        tot[old_r] -= g.degree[i];
        int best_r = old_r;
        double best_gain = 1e-12;  // merge only on a strict improvement
        for (auto& [r, w] : link) {
            if (r == old_r) continue;
            double gn = w / g.total_weight -
                        gamma * tot[r] * g.degree[i] / (two_w * two_w / 2.0);
            if (gn > best_gain) {
                best_r = r;
                best_gain = gn;
            }
        }
        tot[best_r] += g.degree[i];
        if (best_r != old_r) {
            --size[old_r];
            ++size[best_r];
            refined[i] = best_r;
        }
    }
    return refined;
}

inline std::vector<int> renumber(std::vector<int> part) {
    std::map<int, int> remap;
    for (int& c : part) {
        auto it = remap.find(c);
        if (it == remap.end()) {
            int next = static_cast<int>(remap.size());
            remap[c] = next;
            c = next;
        } else {
            c = it->second;
        }
    }
    return part;
}

inline WeightedGraph aggregate(const WeightedGraph& g, const std::vector<int>& part,
                               int coarse_n) {
    std::vector<std::tuple<int, int, double>> coarse_edges;
    for (int i = 0; i < g.n; ++i) {
        if (g.self_weight[i] > 0)
            coarse_edges.push_back({part[i], part[i], g.self_weight[i]});
        for (auto& [j, w] : g.adjacency[i])
            if (i < j)
                coarse_edges.push_back({std::min(part[i], part[j]),
                                        std::max(part[i], part[j]), w});
    }
    return make_graph(coarse_n, coarse_edges);
}

// One multilevel pass: local move, refinement inside the local-move
// communities, aggregation on the refined partition; repeat on the coarse
// graph until local moving merges nothing further, then polish.
inline std::vector<int> leiden_once(const WeightedGraph& base, double gamma,
                                    SplitMix64& rng,
                                    std::vector<int> initial_part) {
    WeightedGraph g = base;
    std::vector<int> mapping(base.n);  // base node -> current coarse node
    std::iota(mapping.begin(), mapping.end(), 0);
    bool first_level = true;

    while (g.n > 1) {
        std::vector<int> part;
        if (first_level) {
            part = renumber(std::move(initial_part));
            first_level = false;
        } else {
            part.resize(g.n);
            std::iota(part.begin(), part.end(), 0);
        }
        local_move(g, part, gamma, rng);
        part = renumber(part);
        int communities = 1 + *std::max_element(part.begin(), part.end());
        if (communities == g.n) break;  // stable: nothing merged

        std::vector<int> refined = renumber(refine(g, part, gamma, rng));
        int refined_n = 1 + *std::max_element(refined.begin(), refined.end());

        // Fold refined communities into the base mapping, aggregate, and
        // continue on the coarse graph. The local-move partition is finer- or
        // equal-grained at the next level's first pass, which re-merges the
        // refined pieces whenever that improves modularity.
        if (refined_n == g.n) {
            // Refinement kept everything separate; adopt the local-move
            // partition directly to guarantee progress.
            for (int& c : mapping) c = part[c];
            g = aggregate(g, part, communities);
        } else {
            for (int& c : mapping) c = refined[c];
            g = aggregate(g, refined, refined_n);
        }
    }

    // Polish on the base graph: alternate single-node moves (splits allowed)
    // with pairwise community merges until neither improves modularity.
    bool changed = true;
    while (changed) {
        changed = local_move(base, mapping, gamma, rng);
        changed = merge_pass(base, mapping, gamma) || changed;
    }
    return renumber(mapping);
}

// Exhaustive optimum via restricted-growth-string enumeration. Only used
// for tiny graphs, where greedy moves can miss optima that need coordinated
// multi-node changes; Bell(10) = 115975 keeps this cheap.
inline std::vector<int> exact_partition(const WeightedGraph& g, double gamma) {
    std::vector<int> part(g.n, 0);
    if (g.total_weight <= 0) {
        // no evidence of structure: singletons
        std::iota(part.begin(), part.end(), 0);
        return part;
    }
    if (g.n <= 1) return part;
    std::vector<int> maxima(g.n, 0), best_part = part;
    double best = -1e18;
    while (true) {
        double q = modularity(g, part, gamma);
        if (q > best + 1e-15) {
            best = q;
            best_part = part;
        }
        int i = g.n - 1;
        while (i > 0 && part[i] > maxima[i - 1]) --i;
        if (i == 0) break;
        ++part[i];
        maxima[i] = std::max(maxima[i - 1], part[i]);
        for (int j = i + 1; j < g.n; ++j) {
            part[j] = 0;
            maxima[j] = maxima[i];
        }
    }
    return best_part;
}

constexpr int kExactPartitionMaxNodes = 10;

// Full Leiden run. Tiny graphs take the exact path; otherwise a canonical
// pass from singletons plus a pass from a random initial partition
// (diversification), the higher-modularity result winning. Deterministic
// for a fixed seed.
inline std::vector<int> leiden(const WeightedGraph& base, double gamma,
                               uint64_t seed) {
    if (base.n <= kExactPartitionMaxNodes)
        return renumber(exact_partition(base, gamma));
    SplitMix64 rng(seed);
    std::vector<int> singletons(base.n);
    std::iota(singletons.begin(), singletons.end(), 0);
    std::vector<int> best = leiden_once(base, gamma, rng, singletons);
    double best_q = modularity(base, best, gamma);

    std::vector<int> random_part(base.n);
    for (int i = 0; i < base.n; ++i)
        random_part[i] = static_cast<int>(rng.next_below(base.n));
    std::vector<int> alt = leiden_once(base, gamma, rng, std::move(random_part));
    if (modularity(base, alt, gamma) > best_q + 1e-12) best = std::move(alt);
    return renumber(best);
}

}  // namespace leiden_detail

// Partition one layer's induced subgraph. Deterministic for a fixed seed;
// singleton nodes come back as singleton communities.
inline std::vector<Community> partition_layer(const HierarchicalGraph& graph,
                                              Layer layer, double resolution,
                                              uint64_t seed) {
    if (resolution <= 0) throw PreconditionError("resolution must be > 0");
    std::vector<std::string> members = graph.layers().members(layer);
    std::sort(members.begin(), members.end());
    if (members.empty()) return {};

    std::map<std::string, int> index_of;
    for (size_t i = 0; i < members.size(); ++i) index_of[members[i]] = static_cast<int>(i);

    std::vector<std::tuple<int, int, double>> edges;
    for (const auto& e : graph.edges()) {
        auto a = index_of.find(e.src);
        auto b = index_of.find(e.dst);
        if (a == index_of.end() || b == index_of.end()) continue;  // inter-layer
        edges.push_back({a->second, b->second, std::max(e.weight, 0.0)});
    }

    auto g = leiden_detail::make_graph(static_cast<int>(members.size()), edges);
    auto part = leiden_detail::leiden(g, resolution, seed);

    // Stable community ordering: by smallest member id.
    std::map<int, std::set<std::string>> groups;
    for (size_t i = 0; i < members.size(); ++i) groups[part[i]].insert(members[i]);
    std::vector<std::set<std::string>> ordered;
    for (auto& [_, g2] : groups) ordered.push_back(std::move(g2));
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return *a.begin() < *b.begin(); });

    std::vector<Community> out;
    for (size_t j = 0; j < ordered.size(); ++j) {
        Community c;
        c.layer = layer;
        c.index = static_cast<int>(j);
        c.member_ids = std::move(ordered[j]);
        c.community_id =
            "community_" + to_string(layer) + "_" + std::to_string(j);
        out.push_back(std::move(c));
    }
    return out;
}

// Modularity of a community partition of `layer`, for quality checks.
inline double layer_partition_modularity(const HierarchicalGraph& graph, Layer layer,
                                         const std::vector<Community>& communities,
                                         double resolution) {
    std::vector<std::string> members = graph.layers().members(layer);
    std::sort(members.begin(), members.end());
    std::map<std::string, int> index_of;
    for (size_t i = 0; i < members.size(); ++i) index_of[members[i]] = static_cast<int>(i);
    std::vector<std::tuple<int, int, double>> edges;
    for (const auto& e : graph.edges()) {
        auto a = index_of.find(e.src);
        auto b = index_of.find(e.dst);
        if (a == index_of.end() || b == index_of.end()) continue;
        edges.push_back({a->second, b->second, std::max(e.weight, 0.0)});
    }
    auto g = leiden_detail::make_graph(static_cast<int>(members.size()), edges);
    std::vector<int> part(members.size(), 0);
    for (size_t j = 0; j < communities.size(); ++j)
        for (const auto& id : communities[j].member_ids)
            part[index_of.at(id)] = static_cast<int>(j);
    return leiden_detail::modularity(g, part, resolution);
}

// Best-of-n restarts with derived seeds; still deterministic.
inline std::vector<Community> partition_layer_best(const HierarchicalGraph& graph,
                                                   Layer layer, double resolution,
                                                   uint64_t seed, int restarts) {
    std::vector<Community> best;
    double best_q = -1e18;
    for (int r = 0; r < std::max(restarts, 1); ++r) {
        auto part = partition_layer(graph, layer, resolution, seed + r);
        double q = layer_partition_modularity(graph, layer, part, resolution);
        if (q > best_q + 1e-15) {
            best_q = q;
            best = std::move(part);
        }
    }
    return best;
}

}  // namespace surveyg
