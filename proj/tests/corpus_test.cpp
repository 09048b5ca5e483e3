#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "surveyg/corpus_io.hpp"
#include "surveyg/encoder.hpp"
#include "surveyg/ingest.hpp"
#include "surveyg/llm.hpp"
#include "surveyg/source.hpp"

using namespace surveyg;

namespace {

const fs::path kFixtureCorpus = fs::path(SURVEYG_FIXTURE_DIR) / "corpus12";

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("expand_query returns bounded keyword set with query first") {
    MockLlmBackend backend(1);
    auto ks = expand_query("graph neural networks", backend, 5);
    CHECK(ks.keywords.size() <= 5);
    CHECK(ks.keywords.size() >= 1);
    CHECK(ks.keywords.front() == "graph neural networks");
    CHECK_FALSE(ks.fallback);
    // deduplicated case-insensitively, no empties
    std::set<std::string> lower;
    for (const auto& kw : ks.keywords) {
        CHECK_FALSE(kw.empty());
        CHECK(lower.insert(to_lower(kw)).second);
    }
}

namespace {

// Backend whose reply is not a JSON array: forces the fallback path.
struct GarbageBackend : LlmBackend {
    CompletionResult complete(const CompletionRequest& r) override {
        return {"not json at all", approx_tokens(r.rendered), 1, tag(), false};
    }
    std::string tag() const override { return "garbage"; }
};

struct DownBackend : LlmBackend {
    int calls = 0;
    CompletionResult complete(const CompletionRequest&) override {
        ++calls;
        throw TransportError("backend down");
    }
    std::string tag() const override { return "down"; }
};

}  // namespace

TEST_CASE("expand_query falls back to the query on unusable replies") {
    GarbageBackend backend;
    auto ks = expand_query("x", backend, 5);
    CHECK(ks.keywords == std::vector<std::string>{"x"});
    CHECK(ks.fallback);
}

TEST_CASE("expand_query rejects empty query") {
    MockLlmBackend backend;
    CHECK_THROWS_AS(expand_query("", backend, 5), PreconditionError);
    CHECK_THROWS_AS(expand_query("x", backend, 0), PreconditionError);
}

TEST_CASE("fetch_papers loads and deduplicates the fixture") {
    FixtureSource source(kFixtureCorpus);
    KeywordSet ks{"rag", {"rag", "retrieval"}, false};
    auto corpus = fetch_papers(ks, source, 1500);
    CHECK(corpus.size() == 12);  // 12 files, duplicates across keywords merged
    for (const auto& [id, p] : corpus.papers) {
        CHECK_FALSE(p.title.empty());
        CHECK_FALSE(p.abstract.empty());
        CHECK(p.year >= 1900);
        CHECK(p.citation_count >= 0);
    }
}

TEST_CASE("fetch_papers cuts at limit in source-rank order") {
    FixtureSource source(kFixtureCorpus);
    KeywordSet ks{"rag", {"rag"}, false};
    auto corpus = fetch_papers(ks, source, 3);
    CHECK(corpus.size() == 3);
    // lexicographic filename order: p01, p02, p03
    CHECK(corpus.contains("p01"));
    CHECK(corpus.contains("p02"));
    CHECK(corpus.contains("p03"));
}

TEST_CASE("fetch_papers on an empty source yields an empty corpus") {
    fs::path dir = fs::temp_directory_path() / "surveyg_empty_source";
    fs::create_directories(dir);
    FixtureSource source(dir);
    KeywordSet ks{"rag", {"rag"}, false};
    auto corpus = fetch_papers(ks, source, 10);
    CHECK(corpus.size() == 0);
}

TEST_CASE("fetch is idempotent: same fixture twice gives the same corpus") {
    FixtureSource source(kFixtureCorpus);
    KeywordSet once{"rag", {"rag"}, false};
    KeywordSet twice{"rag", {"rag", "rag again"}, false};
    auto a = fetch_papers(once, source, 1500);
    auto b = fetch_papers(twice, source, 1500);
    REQUIRE(a.size() == b.size());
    for (const auto& [id, p] : a.papers) {
        CHECK(b.contains(id));
        CHECK(b.at(id).title == p.title);
        CHECK(b.at(id).citation_count == p.citation_count);
    }
}

TEST_CASE("duplicate merge keeps the record with more citations") {
    Corpus corpus;
    PaperRecord stale;
    stale.id = "a";
    stale.title = "t";
    stale.citation_count = 10;
    PaperRecord fresh = stale;
    fresh.citation_count = 25;
    corpus.insert(stale);
    corpus.insert(fresh);
    CHECK(corpus.at("a").citation_count == 25);
    corpus.insert(stale);  // lower count never downgrades
    CHECK(corpus.at("a").citation_count == 25);
}

TEST_CASE("classify_and_summarize assigns type and summary from one call") {
    FixtureSource source(kFixtureCorpus);
    KeywordSet ks{"rag", {"rag"}, false};
    auto corpus = fetch_papers(ks, source, 1500);
    MockLlmBackend backend(1);

    auto survey = classify_and_summarize(corpus.at("p01"), backend);
    CHECK(survey.paper_type == PaperType::survey);
    REQUIRE(survey.summary.has_value());
    CHECK_FALSE(survey.summary->empty());
    CHECK_FALSE(survey.degraded);
    CHECK(survey.id == corpus.at("p01").id);
    CHECK(survey.cited_ids == corpus.at("p01").cited_ids);

    auto benchmark = classify_and_summarize(corpus.at("p04"), backend);
    CHECK(benchmark.paper_type == PaperType::benchmark);
    auto theory = classify_and_summarize(corpus.at("p06"), backend);
    CHECK(theory.paper_type == PaperType::theory);
}

TEST_CASE("classify_and_summarize rejects empty abstract") {
    PaperRecord p;
    p.id = "x";
    MockLlmBackend backend;
    CHECK_THROWS_AS(classify_and_summarize(p, backend), PreconditionError);
}

TEST_CASE("classify_and_summarize degrades when the backend stays down") {
    PaperRecord p;
    p.id = "x";
    p.title = "Some method paper";
    p.abstract = "A method for things.";
    DownBackend backend;
    auto out = classify_and_summarize(p, backend, RetryPolicy{2});
    CHECK(backend.calls == 3);  // initial + 2 retries
    CHECK(out.paper_type == PaperType::other);
    CHECK(out.summary == p.abstract);
    CHECK(out.degraded);
}

TEST_CASE("summarization totality across a corpus") {
    FixtureSource source(kFixtureCorpus);
    KeywordSet ks{"rag", {"rag"}, false};
    auto corpus = fetch_papers(ks, source, 1500);
    MockLlmBackend backend(1);
    summarize_corpus(corpus, backend, 4);
    for (const auto& [id, p] : corpus.papers) {
        REQUIRE(p.summary.has_value());
        CHECK_FALSE(p.summary->empty());
    }
}

TEST_CASE("corpus persistence round-trip is byte-identical") {
    FixtureSource source(kFixtureCorpus);
    KeywordSet ks{"rag", {"rag"}, false};
    auto corpus = fetch_papers(ks, source, 1500);
    MockLlmBackend backend(1);
    summarize_corpus(corpus, backend, 4);
    MockEncoder encoder(64, 1);
    embed_corpus(corpus, encoder, 4);

    fs::path dir1 = fs::temp_directory_path() / "surveyg_corpus_rt1";
    fs::path dir2 = fs::temp_directory_path() / "surveyg_corpus_rt2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    save_corpus(corpus, dir1);
    auto loaded = load_corpus(dir1);
    save_corpus(loaded, dir2);

    for (const auto& entry : fs::directory_iterator(dir1)) {
        auto other = dir2 / entry.path().filename();
        REQUIRE(fs::exists(other));
        CHECK(read_file(entry.path()) == read_file(other));
    }
}

TEST_CASE("derived ids are stable across runs") {
    CHECK(derive_paper_id("The  Same   Title!", 2021) ==
          derive_paper_id("the same title", 2021));
    CHECK(derive_paper_id("a", 2021) != derive_paper_id("a", 2022));
}
