#include <doctest.h>

#include <cmath>

#include "surveyg/citeval.hpp"

using namespace surveyg;

namespace {

Corpus abcd_corpus() {
    Corpus corpus;
    for (const char* id : {"a", "b", "c", "d"}) {
        PaperRecord p;
        p.id = id;
        p.title = std::string("paper ") + id;
        p.abstract = std::string("abstract of paper ") + id;
        p.year = 2020;
        corpus.insert(p);
    }
    return corpus;
}

SurveyDocument doc_with_body(const std::string& body) {
    SurveyDocument doc;
    SectionText section;
    section.key = "1.1";
    section.title = "t";
    section.body = body;
    doc.sections.push_back(section);
    return doc;
}

}  // namespace

TEST_CASE("claims are exactly the cited sentences") {
    auto doc = doc_with_body(
        "First finding holds \\cite{a}. "
        "An uncited aside sits here. "
        "Second finding spans two sources \\cite{a, b}. "
        "Does the third hold \\cite{c}? "
        "No citation at the end!");
    auto claims = extract_claims(doc);
    REQUIRE(claims.size() == 3);
    CHECK(claims[0].cited_ids == std::vector<std::string>{"a"});
    CHECK(claims[1].cited_ids == std::vector<std::string>{"a", "b"});
    CHECK(claims[2].cited_ids == std::vector<std::string>{"c"});
    CHECK(claims[0].section_key == "1.1");
    // sentence indices count every sentence, cited or not
    CHECK(claims[0].sentence_index == 0);
    CHECK(claims[1].sentence_index == 2);
    CHECK(claims[2].sentence_index == 3);
}

TEST_CASE("punctuation inside cite braces does not split sentences") {
    auto doc = doc_with_body("A claim about versions \\cite{ver.2} stands. Next.");
    auto claims = extract_claims(doc);
    REQUIRE(claims.size() == 1);
    CHECK(claims[0].cited_ids == std::vector<std::string>{"ver.2"});
    CHECK(claims[0].sentence.back() == '.');
}

TEST_CASE("duplicate keys inside one sentence count once") {
    auto doc = doc_with_body("Both halves agree \\cite{a} and \\cite{a}.");
    auto claims = extract_claims(doc);
    REQUIRE(claims.size() == 1);
    CHECK(claims[0].cited_ids == std::vector<std::string>{"a"});
}

TEST_CASE("claim hashes are stable content hashes") {
    Claim c1{"Sentence one \\cite{a}.", {"a"}, "1.1", 0};
    Claim c2 = c1;
    c2.section_key = "2.2";  // position does not change the hash
    CHECK(c1.hash() == c2.hash());
    Claim c3{"Different sentence \\cite{a}.", {"a"}, "1.1", 0};
    CHECK(c1.hash() != c3.hash());
}

TEST_CASE("mock NLI: table lookup, default false, identity anchor") {
    MockNli nli;
    CHECK_FALSE(nli.entails("premise", "hypothesis", "h1", "a"));
    nli.set("h1", "a", true);
    CHECK(nli.entails("premise", "hypothesis", "h1", "a"));
    CHECK_FALSE(nli.entails("premise", "hypothesis", "h1", "b"));
    // identical premise and hypothesis always entails
    CHECK(nli.entails("same text", "same text", "unknown", "z"));
}

TEST_CASE("entails prefers the abstract and rejects empty papers") {
    PaperRecord p;
    p.id = "a";
    p.abstract = "the claim itself";
    Claim claim{"the claim itself", {"a"}, "1.1", 0};
    MockNli nli;
    CHECK(entails(claim, p, nli));  // identity anchor through the abstract

    PaperRecord empty;
    empty.id = "b";
    CHECK_THROWS_AS(entails(claim, empty, nli), PreconditionError);

    PaperRecord summary_only;
    summary_only.id = "c";
    summary_only.summary = "the claim itself";
    CHECK(entails(claim, summary_only, nli));
}

TEST_CASE("fixture scores: recall 75, precision 80, f1 2PR/(P+R)") {
    auto corpus = abcd_corpus();
    auto doc = doc_with_body(
        "Claim one \\cite{a}. "
        "Claim two \\cite{a, b}. "
        "Claim three \\cite{c}. "
        "Claim four \\cite{d}.");
    auto claims = extract_claims(doc);
    REQUIRE(claims.size() == 4);

    MockNli nli;
    nli.set(claims[0].hash(), "a", true);
    nli.set(claims[1].hash(), "a", true);
    nli.set(claims[1].hash(), "b", true);
    nli.set(claims[2].hash(), "c", true);
    // claim four: its only pair stays false

    auto report = score(claims, corpus, nli);
    CHECK(report.total_claims == 4);
    CHECK(report.supported_claims == 3);
    CHECK(report.total_pairs == 5);
    CHECK(report.entailing_pairs == 4);
    CHECK(report.recall == doctest::Approx(75.0).epsilon(1e-9));
    CHECK(report.precision == doctest::Approx(80.0).epsilon(1e-9));
    CHECK(std::fabs(report.f1 - 2.0 * 80.0 * 75.0 / 155.0) < 1e-6);
    CHECK(report.claim_verdicts ==
          std::vector<bool>{true, true, true, false});
}

TEST_CASE("harmonic identity holds on random verdict tables") {
    SplitMix64 rng(2718);
    auto corpus = abcd_corpus();
    for (int trial = 0; trial < 1000; ++trial) {
        auto doc = doc_with_body(
            "S one \\cite{a}. S two \\cite{b}. S three \\cite{c, d}. "
            "S four \\cite{a, c}.");
        auto claims = extract_claims(doc);
        MockNli nli;
        bool any = false;
        for (const auto& claim : claims)
            for (const auto& id : claim.cited_ids) {
                bool v = rng.next_below(2) == 0;
                any = any || v;
                nli.set(claim.hash(), id, v);
            }
        auto r = score(claims, corpus, nli);
        CHECK(100.0 * r.supported_claims == doctest::Approx(r.recall * r.total_claims));
        CHECK(100.0 * r.entailing_pairs ==
              doctest::Approx(r.precision * r.total_pairs));
        if (r.precision + r.recall > 0) {
            CHECK(std::fabs(r.f1 - 2.0 * r.precision * r.recall /
                                       (r.precision + r.recall)) < 1e-9);
        } else {
            CHECK(r.f1 == 0.0);
            CHECK_FALSE(any);
        }
        // harmonic mean sits between min and max of its arguments
        CHECK(r.f1 <= std::max(r.precision, r.recall) + 1e-9);
        CHECK(r.f1 + 1e-9 >= std::min(r.precision, r.recall));
    }
}

TEST_CASE("flipping one pair to entailing never lowers any metric") {
    SplitMix64 rng(31415);
    auto corpus = abcd_corpus();
    for (int trial = 0; trial < 200; ++trial) {
        auto doc = doc_with_body(
            "S one \\cite{a}. S two \\cite{b, c}. S three \\cite{d}.");
        auto claims = extract_claims(doc);

        std::vector<std::pair<std::string, std::string>> pairs;
        for (const auto& claim : claims)
            for (const auto& id : claim.cited_ids) pairs.push_back({claim.hash(), id});

        std::map<std::string, bool> table;
        size_t flip = rng.next_below(pairs.size());
        bool flipped_was_false = false;
        MockNli before, after;
        for (size_t i = 0; i < pairs.size(); ++i) {
            bool v = rng.next_below(2) == 0;
            before.set(pairs[i].first, pairs[i].second, v);
            bool v2 = (i == flip) ? true : v;
            flipped_was_false = flipped_was_false || (i == flip && !v);
            after.set(pairs[i].first, pairs[i].second, v2);
        }
        auto r0 = score(claims, corpus, before);
        auto r1 = score(claims, corpus, after);
        CHECK(r1.recall >= r0.recall - 1e-12);
        CHECK(r1.precision >= r0.precision - 1e-12);
        CHECK(r1.f1 >= r0.f1 - 1e-12);
    }
}

TEST_CASE("score refuses an empty claim list") {
    Corpus corpus = abcd_corpus();
    MockNli nli;
    std::vector<Claim> none;
    CHECK_THROWS_AS(score(none, corpus, nli), PreconditionError);
}

TEST_CASE("report serializes all counters and renders a table") {
    auto corpus = abcd_corpus();
    auto doc = doc_with_body("Only claim \\cite{a}.");
    auto claims = extract_claims(doc);
    MockNli nli;
    nli.set(claims[0].hash(), "a", true);
    auto report = score(claims, corpus, nli);

    auto j = report_to_json(report);
    CHECK(j["recall"] == 100.0);
    CHECK(j["precision"] == 100.0);
    CHECK(j["f1"] == 100.0);
    CHECK(j["total_claims"] == 1);
    CHECK(j["pair_verdicts"].size() == 1);

    auto table = report_to_table(report);
    CHECK(table.find("recall") != std::string::npos);
    CHECK(table.find("100.000") != std::string::npos);
    CHECK(table.find("1/1") != std::string::npos);
}
