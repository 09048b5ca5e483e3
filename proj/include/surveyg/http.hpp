#pragma once
// HTTP JSON clients for the pluggable backends: paper source, text encoder,
// chat completion, and NLI. API keys come from environment variables.

#include <cstdlib>
#include <string>

#include "surveyg/citeval.hpp"
#include "surveyg/encoder.hpp"
#include "surveyg/llm.hpp"
#include "surveyg/source.hpp"

#include <httplib.h>
#include <json.hpp>

namespace surveyg {

namespace http_detail {

inline std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v ? v : "";
}

inline httplib::Headers auth_headers(const std::string& key) {
    httplib::Headers h;
    if (!key.empty()) h.emplace("Authorization", "Bearer " + key);
    return h;
}

inline nlohmann::json post_json(httplib::Client& client, const std::string& path,
                                const httplib::Headers& headers,
                                const nlohmann::json& body) {
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res)
        throw TransportError("http request failed: " +
                             httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw TransportError("http status " + std::to_string(res->status));
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("malformed json response: ") + e.what());
    }
}

}  // namespace http_detail

// GET {prefix}?query=...&limit=N -> {"papers": [PaperRecord...]}
class HttpSource : public PaperSource {
public:
    HttpSource(const std::string& host, int port, std::string path_prefix = "/search")
        : client_(host, port),
          path_prefix_(std::move(path_prefix)),
          host_(host),
          api_key_(http_detail::env_or_empty("SURVEYG_SOURCE_KEY")) {}

    std::vector<PaperRecord> search(const std::string& keyword, int limit) override {
        httplib::Params params{{"query", keyword}, {"limit", std::to_string(limit)}};
        auto res = client_.Get(path_prefix_, params,
                               http_detail::auth_headers(api_key_));
        if (!res)
            throw TransportError("source unreachable: " +
                                 httplib::to_string(res.error()));
        if (res->status < 200 || res->status >= 300)
            throw TransportError("source http status " + std::to_string(res->status));
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw TransportError(std::string("source response not json: ") + e.what());
        }
        std::vector<PaperRecord> out;
        for (const auto& j : body.value("papers", nlohmann::json::array())) {
            if (static_cast<int>(out.size()) >= limit) break;
            try {
                PaperRecord rec = paper_from_json(j);
                if (rec.id.empty()) rec.id = derive_paper_id(rec.title, rec.year);
                out.push_back(std::move(rec));
            } catch (const std::exception&) {
                ++skipped_malformed;
            }
        }
        return out;
    }

    std::string descriptor() const override { return "http:" + host_; }

private:
    httplib::Client client_;
    std::string path_prefix_;
    std::string host_;
    std::string api_key_;
};

// POST /embed {"text": ...} -> {"embedding": [...]}
class HttpEncoder : public Encoder {
public:
    HttpEncoder(const std::string& host, int port, int dim,
                std::string path = "/embed")
        : client_(host, port),
          path_(std::move(path)),
          dim_(dim),
          api_key_(http_detail::env_or_empty("SURVEYG_LLM_KEY")) {}

    EmbeddingVector encode(const std::string& text) override {
        auto body = http_detail::post_json(client_, path_,
                                           http_detail::auth_headers(api_key_),
                                           {{"text", text}});
        EmbeddingVector v{body.at("embedding").get<std::vector<double>>()};
        if (v.dim() != dim_)
            throw ConfigError("encoder returned dim " + std::to_string(v.dim()) +
                                  ", expected " + std::to_string(dim_),
                              "embedding_dim");
        return v.normalize();
    }

    int dim() const override { return dim_; }

private:
    httplib::Client client_;
    std::string path_;
    int dim_;
    std::string api_key_;
};

// POST /v1/chat/completions, OpenAI-style single-message protocol.
class HttpLlmBackend : public LlmBackend {
public:
    HttpLlmBackend(const std::string& host, int port, std::string model,
                   std::string path = "/v1/chat/completions")
        : client_(host, port),
          path_(std::move(path)),
          model_(std::move(model)),
          host_(host),
          api_key_(http_detail::env_or_empty("SURVEYG_LLM_KEY")) {
        client_.set_read_timeout(120, 0);
    }

    CompletionResult complete(const CompletionRequest& request) override {
        nlohmann::json body{
            {"model", model_},
            {"temperature", request.temperature},
            {"seed", request.seed},
            {"messages",
             nlohmann::json::array(
                 {{{"role", "user"}, {"content", request.rendered}}})}};
        auto reply = http_detail::post_json(client_, path_,
                                            http_detail::auth_headers(api_key_), body);
        CompletionResult result;
        try {
            result.text =
                reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw TransportError(std::string("unexpected completion shape: ") +
                                 e.what());
        }
        auto usage = reply.value("usage", nlohmann::json::object());
        result.input_tokens = usage.value("prompt_tokens",
                                          approx_tokens(request.rendered));
        result.output_tokens =
            usage.value("completion_tokens", approx_tokens(result.text));
        result.backend_tag = tag();
        return result;
    }

    std::string tag() const override { return "http:" + host_ + "/" + model_; }

private:
    httplib::Client client_;
    std::string path_;
    std::string model_;
    std::string host_;
    std::string api_key_;
};

// POST /nli {"premise":..., "hypothesis":...} -> {"entails": bool}
class HttpNli : public NliBackend {
public:
    HttpNli(const std::string& host, int port, std::string path = "/nli")
        : client_(host, port),
          path_(std::move(path)),
          api_key_(http_detail::env_or_empty("SURVEYG_LLM_KEY")) {}

    bool entails(const std::string& premise, const std::string& hypothesis,
                 const std::string&, const std::string&) override {
        auto body = http_detail::post_json(
            client_, path_, http_detail::auth_headers(api_key_),
            {{"premise", premise}, {"hypothesis", hypothesis}});
        return body.at("entails").get<bool>();
    }

private:
    httplib::Client client_;
    std::string path_;
    std::string api_key_;
};

}  // namespace surveyg
