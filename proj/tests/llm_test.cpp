#include <doctest.h>

#include "surveyg/llm.hpp"
#include "surveyg/prompts.hpp"

#include <json.hpp>

using namespace surveyg;

namespace {

std::map<std::string, std::string> full_bindings(TemplateName name) {
    std::map<std::string, std::string> b;
    for (const auto& ph : prompt_registry().get(name).required_placeholders)
        b[ph] = "value-for-" + ph;
    return b;
}

}  // namespace

TEST_CASE("all 13 templates render against their binding sets") {
    for (TemplateName name : kAllTemplates) {
        auto text = render(name, full_bindings(name));
        CHECK_FALSE(text.empty());
        // no unresolved placeholder survives a complete binding map
        for (const auto& ph : prompt_registry().get(name).required_placeholders)
            CHECK(text.find("{" + ph + "}") == std::string::npos);
    }
}

TEST_CASE("render substitutes and ignores extras") {
    auto bindings = full_bindings(TemplateName::horizontal_summary);
    bindings["QUERY"] = "RAG";
    bindings["papers"] = "- [key: a] A (2020, method): s";
    bindings["unused_extra"] = "ignored";
    auto text = render(TemplateName::horizontal_summary, bindings);
    CHECK(text.find("RAG") != std::string::npos);
    CHECK(text.find("[key: a]") != std::string::npos);
}

TEST_CASE("render errors name the missing placeholder") {
    auto bindings = full_bindings(TemplateName::outline_generate);
    bindings.erase("summary_path");
    try {
        render(TemplateName::outline_generate, bindings);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("summary_path") != std::string::npos);
    }
}

TEST_CASE("subsection prompt carries the length floor verbatim") {
    auto text = render(TemplateName::subsection_write,
                       full_bindings(TemplateName::subsection_write));
    CHECK(text.find("Minimum 400 words") != std::string::npos);
    CHECK(text.find("\\cite{citation_key}") != std::string::npos);
}

TEST_CASE("outline prompt pins the structural constraints") {
    auto text = render(TemplateName::outline_generate,
                       full_bindings(TemplateName::outline_generate));
    CHECK(text.find("TWO levels") != std::string::npos);
    CHECK(text.find("1-3") != std::string::npos);
    CHECK(text.find("Introduction") != std::string::npos);
}

TEST_CASE("mock completion is a pure function of its inputs") {
    CompletionRequest request;
    request.template_name = TemplateName::horizontal_summary;
    request.rendered = render(TemplateName::horizontal_summary,
                              {{"QUERY", "rag"},
                               {"papers", "- [key: a] A (2020, method): s\n"
                                          "- [key: b] B (2021, method): s"}});
    request.seed = 1;

    MockLlmBackend b1(1), b2(1);
    auto r1 = b1.complete(request);
    auto r2 = b2.complete(request);
    CHECK(r1.text == r2.text);
    CHECK(r1.input_tokens == approx_tokens(request.rendered));
    CHECK(r1.output_tokens > 0);

    MockLlmBackend b3(2);  // different seed, different tagline
    CHECK(b3.complete(request).text != r1.text);
}

namespace {

struct FlakyBackend : LlmBackend {
    int failures_left;
    int calls = 0;
    explicit FlakyBackend(int failures) : failures_left(failures) {}
    CompletionResult complete(const CompletionRequest& r) override {
        ++calls;
        if (failures_left-- > 0) throw TransportError("http status 500");
        return {"ok", approx_tokens(r.rendered), 1, tag(), false};
    }
    std::string tag() const override { return "flaky"; }
};

}  // namespace

TEST_CASE("retry contract: three failures with two retries -> attempts=3") {
    FlakyBackend backend(3);
    CompletionRequest request;
    request.template_name = TemplateName::query_expand;
    request.rendered = "r";
    try {
        complete_with_retry(backend, request, RetryPolicy{2});
        FAIL("expected TransportError");
    } catch (const TransportError& e) {
        CHECK(e.attempts == 3);
        CHECK(backend.calls == 3);
    }
}

TEST_CASE("retry succeeds once the backend recovers") {
    FlakyBackend backend(2);
    CompletionRequest request;
    request.template_name = TemplateName::query_expand;
    request.rendered = "r";
    auto result = complete_with_retry(backend, request, RetryPolicy{2});
    CHECK(result.text == "ok");
    CHECK(backend.calls == 3);
}

TEST_CASE("over-long output is truncated and flagged") {
    MockLlmBackend backend(1);
    CompletionRequest request;
    request.template_name = TemplateName::subsection_write;
    request.rendered = "Papers (chronological): [key: a]";
    request.max_output_chars = 64;
    auto result = complete_with_retry(backend, request);
    CHECK(result.text.size() == 64);
    CHECK(result.truncated);
}

TEST_CASE("mock outline reply parses as a JSON array of sections") {
    MockLlmBackend backend(1);
    CompletionRequest request;
    request.template_name = TemplateName::outline_generate;
    request.rendered =
        "Communities:\n- [proof_id: community_Development_0] text\n"
        "Directions:\n- [proof_id: seed_p01] text\n";
    auto result = backend.complete(request);
    auto parsed = nlohmann::json::parse(result.text);
    REQUIRE(parsed.is_array());
    for (const auto& section : parsed) {
        CHECK(section.contains("section_outline"));
        for (const auto& sub : section["subsections"]) {
            CHECK(sub.contains("subsection_focus"));
            auto ids = sub["proof_ids"].get<std::vector<std::string>>();
            CHECK(ids.size() >= 1);
            CHECK(ids.size() <= 3);
            for (const auto& id : ids) {
                bool known = id == "community_Development_0" || id == "seed_p01";
                CHECK(known);
            }
        }
    }
}

TEST_CASE("template body hashes are pinned and stable") {
    auto hashes = prompt_registry().body_hashes();
    CHECK(hashes.size() == 13);
    CHECK(hashes == prompt_registry().body_hashes());
}
