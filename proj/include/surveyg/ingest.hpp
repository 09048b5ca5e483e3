#pragma once
// Query expansion, paper fetching, and combined type classification +
// summarization (one LLM call per paper).

#include <string>
#include <vector>

#include "surveyg/common.hpp"
#include "surveyg/encoder.hpp"
#include "surveyg/llm.hpp"
#include "surveyg/paper.hpp"
#include "surveyg/prompts.hpp"
#include "surveyg/source.hpp"

#include <json.hpp>

namespace surveyg {

struct KeywordSet {
    std::string query;
    std::vector<std::string> keywords;  // query first, deduplicated
    bool fallback = false;              // true when the LLM reply was unusable
};

inline KeywordSet expand_query(const std::string& query, LlmBackend& backend,
                               int n_max, RetryPolicy retry = {}) {
    if (trim(query).empty()) throw PreconditionError("expand_query: empty query");
    if (n_max < 1) throw PreconditionError("expand_query: n_max must be >= 1");

    CompletionRequest request;
    request.template_name = TemplateName::query_expand;
    request.rendered = render(TemplateName::query_expand,
                              {{"query", query}, {"n_max", std::to_string(n_max)}});
    CompletionResult result = complete_with_retry(backend, request, retry);

    KeywordSet out;
    out.query = query;
    std::vector<std::string> candidates;
    try {
        auto parsed = nlohmann::json::parse(result.text);
        if (!parsed.is_array()) throw ValidationError("keyword reply not an array");
        for (const auto& item : parsed)
            if (item.is_string()) candidates.push_back(trim(item.get<std::string>()));
    } catch (const std::exception&) {
        out.fallback = true;
    }

    std::set<std::string> seen;
    auto push = [&](const std::string& kw) {
        if (kw.empty()) return;
        if (static_cast<int>(out.keywords.size()) >= n_max) return;
        if (!seen.insert(to_lower(kw)).second) return;
        out.keywords.push_back(kw);
    };
    push(query);
    for (const auto& kw : candidates) push(kw);
    if (out.keywords.empty()) {
        out.keywords.push_back(query);
        out.fallback = true;
    }
    return out;
}

// Merges per-keyword results by id in source-rank encounter order, cuts at
// `limit`, then builds the corpus.
inline Corpus fetch_papers(const KeywordSet& keywords, PaperSource& source,
                           int limit) {
    if (limit < 1) throw PreconditionError("fetch_papers: limit must be >= 1");
    std::vector<PaperRecord> ranked;
    std::map<std::string, size_t> position;
    for (const auto& kw : keywords.keywords) {
        for (auto& rec : source.search(kw, limit)) {
            auto it = position.find(rec.id);
            if (it == position.end()) {
                position[rec.id] = ranked.size();
                ranked.push_back(std::move(rec));
            } else if (rec.citation_count > ranked[it->second].citation_count) {
                ranked[it->second] = std::move(rec);
            }
        }
    }
    if (static_cast<int>(ranked.size()) > limit) ranked.resize(limit);

    Corpus corpus;
    for (auto& rec : ranked) corpus.insert(std::move(rec), source.descriptor());
    return corpus;
}

// Template pre-selection mirrors the type cues in the title/abstract; the
// backend's reply carries the authoritative label.
inline TemplateName summary_template_for(const PaperRecord& paper) {
    std::string text = to_lower(paper.title + " " + paper.abstract);
    if (contains_word(text, "survey") || contains_word(text, "review"))
        return TemplateName::paper_summary_survey;
    if (contains_word(text, "benchmark") || contains_word(text, "dataset"))
        return TemplateName::paper_summary_benchmark;
    if (contains_word(text, "theory") || contains_word(text, "theorem") ||
        contains_word(text, "proof"))
        return TemplateName::paper_summary_theory;
    if (contains_word(text, "method") || contains_word(text, "model") ||
        contains_word(text, "approach") || contains_word(text, "algorithm"))
        return TemplateName::paper_summary_method;
    return TemplateName::paper_summary_other;
}

inline PaperRecord classify_and_summarize(const PaperRecord& paper,
                                          LlmBackend& backend,
                                          RetryPolicy retry = {}) {
    if (paper.abstract.empty())
        throw PreconditionError("classify_and_summarize: empty abstract for " +
                                paper.id);
    PaperRecord out = paper;
    CompletionRequest request;
    request.template_name = summary_template_for(paper);
    request.rendered = render(request.template_name,
                              {{"title", paper.title},
                               {"year", std::to_string(paper.year)},
                               {"abstract", paper.abstract}});
    try {
        CompletionResult result = complete_with_retry(backend, request, retry);
        auto parsed = nlohmann::json::parse(result.text);
        std::string summary = parsed.at("summary").get<std::string>();
        if (summary.empty()) throw ValidationError("empty summary");
        out.paper_type =
            paper_type_from_string(parsed.at("paper_type").get<std::string>());
        out.summary = summary;
    } catch (const std::exception&) {
        out.paper_type = PaperType::other;
        out.summary = paper.abstract;
        out.degraded = true;
    }
    return out;
}

inline void summarize_corpus(Corpus& corpus, LlmBackend& backend,
                             size_t concurrency = 8, RetryPolicy retry = {}) {
    auto ids = corpus.ids();
    parallel_for(ids.size(), concurrency, [&](size_t i) {
        auto& rec = corpus.papers.at(ids[i]);
        rec = classify_and_summarize(rec, backend, retry);
    });
}

}  // namespace surveyg
