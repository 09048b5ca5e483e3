#include <doctest.h>

#include <cmath>

#include "surveyg/encoder.hpp"
#include "surveyg/graph.hpp"
#include "surveyg/ingest.hpp"
#include "surveyg/source.hpp"

using namespace surveyg;

namespace {

const fs::path kFixtureCorpus = fs::path(SURVEYG_FIXTURE_DIR) / "corpus12";

Corpus load_fixture_corpus() {
    FixtureSource source(kFixtureCorpus);
    KeywordSet ks{"rag", {"rag"}, false};
    auto corpus = fetch_papers(ks, source, 1500);
    MockEncoder enc(64, 1);
    embed_corpus(corpus, enc, 4);
    return corpus;
}

PaperRecord make_paper(std::string id, int year, long long citations,
                       std::set<std::string> cited = {},
                       std::string abstract_text = "") {
    PaperRecord p;
    p.id = std::move(id);
    p.title = "title " + p.id;
    p.year = year;
    p.citation_count = citations;
    p.cited_ids = std::move(cited);
    p.abstract = abstract_text.empty() ? "unique abstract for " + p.id
                                       : std::move(abstract_text);
    return p;
}

Corpus random_corpus(SplitMix64& rng, int n, int now_year) {
    Corpus corpus;
    for (int i = 0; i < n; ++i) {
        PaperRecord p = make_paper("p" + std::to_string(1000 + i),
                                   now_year - static_cast<int>(rng.next_below(30)),
                                   static_cast<long long>(rng.next_below(5000)));
        if (rng.next_below(10) == 0) {
            p.year_missing = true;
            p.year = 0;
        }
        corpus.insert(p);
    }
    return corpus;
}

}  // namespace

TEST_CASE("trending_score hand values") {
    CHECK(trending_score(100, 4) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(trending_score(0, 7) == doctest::Approx(0.0));
    CHECK(trending_score(7, 0) == doctest::Approx(7.0));
    CHECK_THROWS_AS(trending_score(-1, 2), PreconditionError);
    CHECK_THROWS_AS(trending_score(1, -2), PreconditionError);
}

TEST_CASE("build_edges produces one citation edge per in-corpus reference") {
    auto corpus = load_fixture_corpus();
    auto edges = build_edges(corpus, 1.1 - 0.1);  // tau=1.0: no semantic edges expected
    int citation_edges = 0;
    for (const auto& e : edges)
        if (e.kind == EdgeKind::citation) ++citation_edges;
    // hand count over the fixture's cited_ids lists
    CHECK(citation_edges == 16);
    for (const auto& e : edges) {
        CHECK(e.weight <= 1.0 + 1e-12);
        CHECK(e.weight >= -1.0 - 1e-12);
        if (e.kind == EdgeKind::citation) {
            // direction: src cites dst
            const auto& cited = corpus.at(e.src).cited_ids;
            CHECK(std::count(cited.begin(), cited.end(), e.dst) == 1);
        }
    }
}

TEST_CASE("identical abstracts yield a semantic edge of weight 1") {
    Corpus corpus;
    corpus.insert(make_paper("a", 2020, 10, {}, "shared words here"));
    corpus.insert(make_paper("b", 2021, 5, {}, "shared words here"));
    corpus.insert(make_paper("c", 2022, 1, {}, "totally different topic entirely"));
    MockEncoder enc(64, 1);
    embed_corpus(corpus, enc, 1);

    auto edges = build_edges(corpus, 0.999);
    REQUIRE(edges.size() == 1);
    CHECK(edges[0].kind == EdgeKind::semantic);
    CHECK(edges[0].src == "a");  // stored smaller-id first
    CHECK(edges[0].dst == "b");
    CHECK(edges[0].weight == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("a citation pair never doubles as a semantic edge") {
    Corpus corpus;
    corpus.insert(make_paper("a", 2020, 10, {"b"}, "shared words here"));
    corpus.insert(make_paper("b", 2021, 5, {}, "shared words here"));
    MockEncoder enc(64, 1);
    embed_corpus(corpus, enc, 1);
    auto edges = build_edges(corpus, 0.5);
    REQUIRE(edges.size() == 1);
    CHECK(edges[0].kind == EdgeKind::citation);
}

TEST_CASE("dangling and self references are skipped") {
    Corpus corpus;
    corpus.insert(make_paper("a", 2020, 10, {"missing", "a", "b"}));
    corpus.insert(make_paper("b", 2021, 5));
    MockEncoder enc(64, 1);
    embed_corpus(corpus, enc, 1);
    auto edges = build_edges(corpus, 1.0);
    REQUIRE(edges.size() == 1);
    CHECK(edges[0].src == "a");
    CHECK(edges[0].dst == "b");
}

TEST_CASE("build_edges rejects unembedded corpus and bad tau") {
    Corpus corpus;
    corpus.insert(make_paper("a", 2020, 1));
    CHECK_THROWS_AS(build_edges(corpus, 0.5), PreconditionError);
    MockEncoder enc(16, 1);
    embed_corpus(corpus, enc, 1);
    CHECK_THROWS_AS(build_edges(corpus, -0.1), PreconditionError);
    CHECK_THROWS_AS(build_edges(corpus, 1.5), PreconditionError);
}

TEST_CASE("fixture layering matches the hand-computed assignment") {
    auto corpus = load_fixture_corpus();
    auto layers = assign_layers(corpus, 3, 2024, 2026);

    for (const auto& id : {"p01", "p02", "p03"})
        CHECK(layers.layer(id) == Layer::Foundation);
    for (const auto& id : {"p04", "p05", "p06", "p07", "p08"})
        CHECK(layers.layer(id) == Layer::Development);
    for (const auto& id : {"p09", "p10", "p11", "p12"})
        CHECK(layers.layer(id) == Layer::Frontier);

    // p01: 1500 citations, age 6 -> 1500/7
    CHECK(layers.score_of.at("p01") == doctest::Approx(1500.0 / 7.0).epsilon(1e-12));
    CHECK(layers.flagged_missing_year.empty());
}

TEST_CASE("k larger than the corpus puts everything in Foundation") {
    auto corpus = load_fixture_corpus();
    auto layers = assign_layers(corpus, 100, 2024, 2026);
    for (const auto& [id, layer] : layers.layer_of)
        CHECK(layer == Layer::Foundation);
}

TEST_CASE("foundation ties break by citation count then id") {
    Corpus corpus;
    // same trending score 10.0 for all three
    corpus.insert(make_paper("b", 2025, 20));  // age 1 -> 10, 20 citations
    corpus.insert(make_paper("a", 2024, 30));  // age 2 -> 10, 30 citations
    corpus.insert(make_paper("c", 2025, 20));  // tie with b on both -> id order
    auto layers = assign_layers(corpus, 2, 2030, 2026);
    CHECK(layers.layer("a") == Layer::Foundation);
    CHECK(layers.layer("b") == Layer::Foundation);
    CHECK(layers.layer("c") != Layer::Foundation);
}

TEST_CASE("missing-year papers land in Frontier and are flagged") {
    Corpus corpus;
    corpus.insert(make_paper("a", 2010, 500));
    PaperRecord unknown = make_paper("b", 0, 1);
    unknown.year_missing = true;
    corpus.insert(unknown);
    auto layers = assign_layers(corpus, 1, 2024, 2026);
    CHECK(layers.layer("a") == Layer::Foundation);
    CHECK(layers.layer("b") == Layer::Frontier);
    CHECK(layers.flagged_missing_year == std::vector<std::string>{"b"});
}

TEST_CASE("assign_layers rejects empty corpus; build_graph too") {
    Corpus corpus;
    CHECK_THROWS_AS(assign_layers(corpus, 3, 2024, 2026), PreconditionError);
    GraphConfig config;
    CHECK_THROWS_AS(build_graph(corpus, config), PreconditionError);
}

TEST_CASE("single-paper corpus builds a one-node graph") {
    Corpus corpus;
    corpus.insert(make_paper("only", 2024, 3));
    MockEncoder enc(16, 1);
    embed_corpus(corpus, enc, 1);
    GraphConfig config;
    config.k_foundation = 1;
    auto graph = build_graph(corpus, config);
    CHECK(graph.node_ids().size() == 1);
    CHECK(graph.edges().empty());
    CHECK(graph.layers().layer("only") == Layer::Foundation);
}

TEST_CASE("property: layers partition the corpus and respect the rules") {
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        auto corpus = random_corpus(rng, 1 + static_cast<int>(rng.next_below(80)), 2026);
        int k = static_cast<int>(rng.next_below(20));
        int landmark = 2015 + static_cast<int>(rng.next_below(12));
        auto layers = assign_layers(corpus, k, landmark, 2026);

        CHECK(layers.layer_of.size() == corpus.size());
        size_t foundation = layers.members(Layer::Foundation).size();
        CHECK(foundation == std::min<size_t>(k, corpus.size()));

        double min_foundation_score = 1e300;
        double max_rest_score = -1e300;
        for (const auto& [id, layer] : layers.layer_of) {
            double s = layers.score_of.at(id);
            if (layer == Layer::Foundation)
                min_foundation_score = std::min(min_foundation_score, s);
            else
                max_rest_score = std::max(max_rest_score, s);
            const auto& p = corpus.at(id);
            if (layer != Layer::Foundation) {
                if (p.year_missing)
                    CHECK(layer == Layer::Frontier);
                else if (p.year < landmark)
                    CHECK(layer == Layer::Development);
                else
                    CHECK(layer == Layer::Frontier);
            }
        }
        // monotonicity: no non-Foundation paper strictly out-scores Foundation
        if (foundation > 0 && foundation < corpus.size())
            CHECK(max_rest_score <= min_foundation_score + 1e-12);
    }
}

TEST_CASE("property: doubling every citation count preserves foundation ranks") {
    SplitMix64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        auto corpus = random_corpus(rng, 40, 2026);
        Corpus scaled;
        for (const auto& [id, p] : corpus.papers) {
            PaperRecord q = p;
            q.citation_count *= 2;
            scaled.insert(q);
        }
        auto a = assign_layers(corpus, 7, 2020, 2026);
        auto b = assign_layers(scaled, 7, 2020, 2026);
        CHECK(a.members(Layer::Foundation) == b.members(Layer::Foundation));
    }
}

TEST_CASE("property: edge weights are exactly symmetric") {
    SplitMix64 rng(5);
    Corpus corpus;
    for (int i = 0; i < 20; ++i) {
        std::string words;
        for (int w = 0; w < 8; ++w)
            words += "w" + std::to_string(rng.next_below(25)) + " ";
        corpus.insert(make_paper("p" + std::to_string(i + 10), 2020, 10, {}, words));
    }
    MockEncoder enc(32, 9);
    embed_corpus(corpus, enc, 4);
    for (const auto& a : corpus.ids()) {
        for (const auto& b : corpus.ids()) {
            if (a == b) continue;
            double w1 = cosine_by_id(a, embedding_of(corpus.at(a)), b,
                                     embedding_of(corpus.at(b)));
            double w2 = cosine_by_id(b, embedding_of(corpus.at(b)), a,
                                     embedding_of(corpus.at(a)));
            CHECK(w1 == w2);  // bitwise equal by canonical argument ordering
        }
    }
}

TEST_CASE("successors are reverse-citation plus semantic, sorted by weight") {
    auto corpus = load_fixture_corpus();
    GraphConfig config;
    config.k_foundation = 3;
    config.landmark_year = 2024;
    config.tau_semantic = 0.75;
    auto graph = build_graph(corpus, config);

    // p01 is cited by p02 and p03: both appear among its successors.
    std::set<std::string> succ;
    for (const auto& n : graph.successors("p01")) succ.insert(n.id);
    CHECK(succ.count("p02") == 1);
    CHECK(succ.count("p03") == 1);

    for (const auto& id : graph.node_ids()) {
        const auto& ns = graph.successors(id);
        for (size_t i = 1; i < ns.size(); ++i) {
            bool ordered = ns[i - 1].weight > ns[i].weight ||
                           (ns[i - 1].weight == ns[i].weight && ns[i - 1].id < ns[i].id);
            CHECK(ordered);
        }
    }
}

TEST_CASE("disabling semantic traversal removes semantic successors only") {
    Corpus corpus;
    corpus.insert(make_paper("a", 2020, 10, {}, "same text body"));
    corpus.insert(make_paper("b", 2021, 5, {}, "same text body"));
    corpus.insert(make_paper("c", 2022, 2, {"a"}));
    MockEncoder enc(32, 1);
    embed_corpus(corpus, enc, 1);
    GraphConfig config;
    config.tau_semantic = 0.9;
    config.semantic_in_traversal = false;
    auto graph = build_graph(corpus, config);
    CHECK(graph.successors("a").size() == 1);  // only reverse citation to c
    CHECK(graph.successors("a")[0].id == "c");
    CHECK(graph.successors("b").empty());
    // the semantic edge still exists for community detection
    CHECK(graph.undirected_neighbors("b").size() == 1);
}

TEST_CASE("graph json round-trip preserves nodes, edges, and layers") {
    auto corpus = load_fixture_corpus();
    GraphConfig config;
    config.k_foundation = 3;
    config.landmark_year = 2024;
    auto graph = build_graph(corpus, config);
    auto j = graph_to_json(graph);
    auto back = graph_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.node_ids() == graph.node_ids());
    CHECK(back.edges().size() == graph.edges().size());
    for (const auto& id : graph.node_ids())
        CHECK(back.layers().layer(id) == graph.layers().layer(id));
    CHECK(graph_to_json(back).dump() == j.dump());
}

TEST_CASE("dot export mentions every node and edge") {
    auto corpus = load_fixture_corpus();
    GraphConfig config;
    config.k_foundation = 3;
    config.landmark_year = 2024;
    auto graph = build_graph(corpus, config);
    auto dot = graph_to_dot(graph);
    for (const auto& id : graph.node_ids())
        CHECK(dot.find("\"" + id + "\"") != std::string::npos);
    CHECK(dot.rfind("digraph", 0) == 0);
}
