#include <doctest.h>

#include <atomic>
#include <thread>

#include "surveyg/http.hpp"

using namespace surveyg;

namespace {

// Loopback test server covering all four backend protocols.
struct TestServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> llm_failures_left{0};
    std::atomic<int> llm_calls{0};

    TestServer() {
        server.Get("/search", [](const httplib::Request& req, httplib::Response& res) {
            nlohmann::json papers = nlohmann::json::array();
            int limit = std::stoi(req.get_param_value("limit"));
            for (int i = 0; i < std::min(limit, 3); ++i) {
                papers.push_back({{"id", "srv" + std::to_string(i)},
                                  {"title", req.get_param_value("query") +
                                                " result " + std::to_string(i)},
                                  {"abstract", "server abstract"},
                                  {"year", 2020 + i},
                                  {"citation_count", 10 * (i + 1)}});
            }
            papers.push_back("not an object");  // malformed entry, must be skipped
            res.set_content(nlohmann::json{{"papers", papers}}.dump(),
                            "application/json");
        });
        server.Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
            auto body = nlohmann::json::parse(req.body);
            std::string text = body.at("text");
            std::vector<double> v(8, 0.0);
            for (size_t i = 0; i < text.size(); ++i)
                v[i % 8] += static_cast<double>(static_cast<unsigned char>(text[i]));
            res.set_content(nlohmann::json{{"embedding", v}}.dump(),
                            "application/json");
        });
        server.Post("/v1/chat/completions",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        ++llm_calls;
                        if (llm_failures_left.fetch_sub(1) > 0) {
                            res.status = 500;
                            return;
                        }
                        llm_failures_left = 0;
                        auto body = nlohmann::json::parse(req.body);
                        std::string content =
                            "echo: " +
                            body["messages"][0]["content"].get<std::string>().substr(0, 20);
                        nlohmann::json reply{
                            {"choices",
                             nlohmann::json::array(
                                 {{{"message", {{"content", content}}}}})},
                            {"usage",
                             {{"prompt_tokens", 7}, {"completion_tokens", 3}}}};
                        res.set_content(reply.dump(), "application/json");
                    });
        server.Post("/nli", [](const httplib::Request& req, httplib::Response& res) {
            auto body = nlohmann::json::parse(req.body);
            bool verdict = body.at("premise") == body.at("hypothesis");
            res.set_content(nlohmann::json{{"entails", verdict}}.dump(),
                            "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~TestServer() {
        server.stop();
        thread.join();
    }
};

}  // namespace

TEST_CASE("http source parses results and skips malformed entries") {
    TestServer srv;
    HttpSource source("127.0.0.1", srv.port);
    auto papers = source.search("graphs", 10);
    REQUIRE(papers.size() == 3);
    CHECK(papers[0].id == "srv0");
    CHECK(papers[0].title == "graphs result 0");
    CHECK(papers[2].citation_count == 30);
    CHECK(source.skipped_malformed == 1);
    CHECK(source.descriptor() == "http:127.0.0.1");
}

TEST_CASE("http source propagates transport failures") {
    HttpSource source("127.0.0.1", 1);  // nothing listens there
    CHECK_THROWS_AS(source.search("x", 5), TransportError);
}

TEST_CASE("http encoder returns normalized vectors of the configured dim") {
    TestServer srv;
    HttpEncoder encoder("127.0.0.1", srv.port, 8);
    auto v = encoder.encode("hello backend");
    CHECK(v.dim() == 8);
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-9));

    HttpEncoder wrong_dim("127.0.0.1", srv.port, 16);
    CHECK_THROWS_AS(wrong_dim.encode("hello"), ConfigError);
}

TEST_CASE("http llm speaks the chat protocol and reports usage") {
    TestServer srv;
    HttpLlmBackend backend("127.0.0.1", srv.port, "test-model");
    CompletionRequest request;
    request.template_name = TemplateName::query_expand;
    request.rendered = "Research query: graphs";
    auto result = backend.complete(request);
    CHECK(result.text.rfind("echo: ", 0) == 0);
    CHECK(result.input_tokens == 7);
    CHECK(result.output_tokens == 3);
    CHECK(backend.tag() == "http:127.0.0.1/test-model");
}

TEST_CASE("three 500s exhaust two retries with attempts=3") {
    TestServer srv;
    srv.llm_failures_left = 3;
    HttpLlmBackend backend("127.0.0.1", srv.port, "test-model");
    CompletionRequest request;
    request.template_name = TemplateName::query_expand;
    request.rendered = "r";
    try {
        complete_with_retry(backend, request, RetryPolicy{2});
        FAIL("expected TransportError");
    } catch (const TransportError& e) {
        CHECK(e.attempts == 3);
        CHECK(srv.llm_calls == 3);
        CHECK(std::string(e.what()).find("500") != std::string::npos);
    }
}

TEST_CASE("a transient 500 is retried into success") {
    TestServer srv;
    srv.llm_failures_left = 1;
    HttpLlmBackend backend("127.0.0.1", srv.port, "test-model");
    CompletionRequest request;
    request.template_name = TemplateName::query_expand;
    request.rendered = "r";
    auto result = complete_with_retry(backend, request, RetryPolicy{2});
    CHECK(result.text.rfind("echo: ", 0) == 0);
    CHECK(srv.llm_calls == 2);
}

TEST_CASE("http nli answers entailment queries") {
    TestServer srv;
    HttpNli nli("127.0.0.1", srv.port);
    CHECK(nli.entails("same", "same", "h", "p"));
    CHECK_FALSE(nli.entails("premise", "other", "h", "p"));
}
