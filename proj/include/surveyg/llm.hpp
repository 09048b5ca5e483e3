#pragma once
// Chat-completion backend abstraction, retry policy, token accounting, and
// the deterministic mock backend that powers all offline tests.

#include <chrono>
#include <deque>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "surveyg/common.hpp"
#include "surveyg/prompts.hpp"

#include <json.hpp>

namespace surveyg {

struct CompletionRequest {
    TemplateName template_name;
    std::string rendered;
    size_t max_output_chars = 1 << 20;
    double temperature = 0.0;
    uint64_t seed = 0;
};

struct CompletionResult {
    std::string text;
    long long input_tokens = 0;
    long long output_tokens = 0;
    std::string backend_tag;
    bool truncated = false;
};

// 4-chars-per-token heuristic; exact and reproducible under the mock.
inline long long approx_tokens(const std::string& text) {
    return static_cast<long long>((text.size() + 3) / 4);
}

class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual CompletionResult complete(const CompletionRequest& request) = 0;
    virtual std::string tag() const = 0;
};

struct RetryPolicy {
    int max_retries = 2;
    std::chrono::milliseconds base_delay{0};
};

// Retries transport failures with exponential backoff; rethrows the last
// error with the total attempt count. Applies the output-length cap.
inline CompletionResult complete_with_retry(LlmBackend& backend,
                                            const CompletionRequest& request,
                                            RetryPolicy policy = {}) {
    int attempts = 0;
    std::string last_error;
    for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
        ++attempts;
        try {
            CompletionResult result = backend.complete(request);
            if (result.text.empty())
                throw TransportError("backend returned empty completion");
            if (result.text.size() > request.max_output_chars) {
                result.text.resize(request.max_output_chars);
                result.truncated = true;
            }
            return result;
        } catch (const TransportError& e) {
            last_error = e.what();
            if (attempt < policy.max_retries && policy.base_delay.count() > 0)
                std::this_thread::sleep_for(policy.base_delay * (1 << attempt));
        }
    }
    throw TransportError(last_error + " (after " + std::to_string(attempts) +
                             " attempts)",
                         attempts);
}

// ------------------------------------------------------------------ mock

// Deterministic offline backend. Output is a pure function of
// (template name, rendered text, seed); optional scripts let tests drive
// evaluator scores and retrieval queries call by call.
class MockLlmBackend : public LlmBackend {
public:
    explicit MockLlmBackend(uint64_t seed = 1) : seed_(seed) {}

    std::string tag() const override { return "mock"; }

    // Scripted evaluator scores, consumed in call order. Empty -> default 4.
    void script_scores(std::vector<int> scores) {
        std::lock_guard lock(mutex_);
        score_script_.assign(scores.begin(), scores.end());
    }

    // Scripted retrieval-query lists for section_evaluate calls.
    void script_queries(std::vector<std::vector<std::string>> queries) {
        std::lock_guard lock(mutex_);
        query_script_.assign(queries.begin(), queries.end());
    }

    long long calls(TemplateName name) const {
        std::lock_guard lock(mutex_);
        auto it = call_counts_.find(name);
        return it == call_counts_.end() ? 0 : it->second;
    }

    long long evaluator_calls() const {
        return calls(TemplateName::outline_evaluate) +
               calls(TemplateName::section_evaluate);
    }

    CompletionResult complete(const CompletionRequest& request) override {
        {
            std::lock_guard lock(mutex_);
            ++call_counts_[request.template_name];
        }
        CompletionResult result;
        result.backend_tag = tag();
        result.text = generate(request);
        result.input_tokens = approx_tokens(request.rendered);
        result.output_tokens = approx_tokens(result.text);
        return result;
    }

private:
    using json = nlohmann::json;

    std::string generate(const CompletionRequest& request) {
        switch (request.template_name) {
            case TemplateName::query_expand: return expand(request);
            case TemplateName::paper_summary_survey:
            case TemplateName::paper_summary_method:
            case TemplateName::paper_summary_benchmark:
            case TemplateName::paper_summary_theory:
            case TemplateName::paper_summary_other: return summarize_paper(request);
            case TemplateName::horizontal_summary: return horizontal(request);
            case TemplateName::vertical_stage1: return vertical1(request);
            case TemplateName::vertical_stage2: return vertical2(request);
            case TemplateName::outline_generate: return outline(request);
            case TemplateName::outline_evaluate: return evaluate_outline(request);
            case TemplateName::subsection_write: return subsection(request);
            case TemplateName::section_evaluate: return evaluate_section(request);
        }
        throw TransportError("mock: unknown template");
    }

    static std::string field_after(const std::string& text, const std::string& marker) {
        size_t pos = text.find(marker);
        if (pos == std::string::npos) return {};
        pos += marker.size();
        size_t end = text.find('\n', pos);
        return trim(text.substr(pos, end == std::string::npos ? end : end - pos));
    }

    // Paper blocks are rendered as "[key: <id>]"; artifact blocks as
    // "[proof_id: <id>]". The mock reads them back out of the prompt.
    static std::vector<std::string> scan_ids(const std::string& text,
                                             const std::string& marker) {
        std::vector<std::string> ids;
        size_t pos = 0;
        while ((pos = text.find(marker, pos)) != std::string::npos) {
            pos += marker.size();
            size_t end = text.find(']', pos);
            if (end == std::string::npos) break;
            std::string id = trim(text.substr(pos, end - pos));
            if (!id.empty()) ids.push_back(id);
            pos = end + 1;
        }
        return ids;
    }

    std::string expand(const CompletionRequest& request) const {
        std::string query = field_after(request.rendered, "Research query:");
        static const char* kFacets[] = {"methods",      "applications", "benchmarks",
                                        "theory",       "open problems", "datasets",
                                        "architectures", "evaluation"};
        json arr = json::array();
        arr.push_back(query);
        SplitMix64 rng(fnv1a64(query) ^ seed_);
        size_t start = rng.next_below(8);
        for (size_t i = 0; i < 7; ++i)
            arr.push_back(query + " " + kFacets[(start + i) % 8]);
        return arr.dump();
    }

    std::string summarize_paper(const CompletionRequest& request) const {
        std::string title = field_after(request.rendered, "Title:");
        std::string abstract = field_after(request.rendered, "Abstract:");
        std::string text = to_lower(title + " " + abstract);
        std::string type = "other";
        if (contains_word(text, "survey") || contains_word(text, "review"))
            type = "survey";
        else if (contains_word(text, "benchmark") || contains_word(text, "dataset"))
            type = "benchmark";
        else if (contains_word(text, "theory") || contains_word(text, "theorem") ||
                 contains_word(text, "proof"))
            type = "theory";
        else if (contains_word(text, "method") || contains_word(text, "model") ||
                 contains_word(text, "approach") || contains_word(text, "algorithm"))
            type = "method";
        std::ostringstream summary;
        summary << "[" << type << "] " << title << ": ";
        auto words = tokenize_words(abstract);
        for (size_t i = 0; i < std::min<size_t>(words.size(), 24); ++i) {
            if (i) summary << ' ';
            summary << words[i];
        }
        json out{{"paper_type", type}, {"summary", summary.str()}};
        return out.dump();
    }

    std::string horizontal(const CompletionRequest& request) const {
        auto ids = scan_ids(request.rendered, "[key:");
        std::ostringstream out;
        out << "[horizontal] synthesized summary of " << ids.size()
            << " papers in 2-3 subgroups (";
        for (size_t i = 0; i < ids.size(); ++i) out << (i ? ", " : "") << ids[i];
        out << "): shared methodology, thematic contributions, and a comparative "
               "critique; overall the subgroups jointly chart the area. tag="
            << hex64(fnv1a64(request.rendered) ^ seed_);
        return out.str();
    }

    std::string vertical1(const CompletionRequest& request) const {
        auto ids = scan_ids(request.rendered, "[key:");
        std::ostringstream out;
        out << "[stage1] development lineage over " << ids.size() << " papers (";
        for (size_t i = 0; i < ids.size(); ++i) out << (i ? ", " : "") << ids[i];
        out << "). tag=" << hex64(fnv1a64(request.rendered) ^ seed_);
        return out.str();
    }

    std::string vertical2(const CompletionRequest& request) const {
        std::string dev = field_after(request.rendered, "Development summary:");
        size_t pos = request.rendered.find("Development summary:\n");
        if (pos != std::string::npos) {
            size_t start = pos + std::string("Development summary:\n").size();
            size_t end = request.rendered.find("\nFrontier papers:", start);
            if (end != std::string::npos)
                dev = trim(request.rendered.substr(start, end - start));
        }
        auto frontier = scan_ids(request.rendered, "[key:");
        std::ostringstream out;
        out << "[stage2] lineage continued by " << frontier.size()
            << " frontier papers (";
        for (size_t i = 0; i < frontier.size(); ++i)
            out << (i ? ", " : "") << frontier[i];
        out << ") building on: " << dev;
        return out.str();
    }

    std::string outline(const CompletionRequest& request) const {
        auto proof_ids = scan_ids(request.rendered, "[proof_id:");
        if (proof_ids.empty()) proof_ids.push_back("community_Foundation_0");
        size_t cursor = 0;
        auto next_proofs = [&](size_t want) {
            json arr = json::array();
            for (size_t i = 0; i < std::min(want, proof_ids.size()); ++i)
                arr.push_back(proof_ids[(cursor++) % proof_ids.size()]);
            return arr;
        };
        auto section = [&](const std::string& title, const std::string& focus,
                           std::vector<std::pair<std::string, std::string>> subs) {
            json subsections = json::array();
            for (auto& [t, f] : subs)
                subsections.push_back({{"section_outline", t},
                                       {"subsection_focus", f},
                                       {"proof_ids", next_proofs(2)}});
            return json{{"section_outline", title},
                        {"subsection_focus", focus},
                        {"subsections", subsections}};
        };
        json out = json::array();
        out.push_back(section("Introduction", "Motivation and scope of the review.",
                              {{"Background and Motivation",
                                "Why the topic matters and what this review covers."}}));
        out.push_back(section(
            "Foundational Concepts", "Seminal works and core paradigms.",
            {{"Seminal Approaches", "The foundational methods anchoring the field."},
             {"Core Formulations", "Problem definitions and shared assumptions."}}));
        out.push_back(section(
            "Methodological Developments", "How foundational ideas matured.",
            {{"Refinements and Extensions", "Incremental advances over the foundations."},
             {"Comparative Perspectives", "Trade-offs among the main method families."}}));
        out.push_back(section(
            "Applications and Frontiers", "Where the field is heading.",
            {{"Emerging Directions", "Recent frontier work and open challenges."}}));
        out.push_back(section("Conclusion", "Synthesis and outlook.",
                              {{"Summary and Outlook",
                                "Key takeaways and promising research avenues."}}));
        return out.dump(2);
    }

    int next_score() {
        std::lock_guard lock(mutex_);
        if (score_script_.empty()) return 4;
        int s = score_script_.front();
        score_script_.pop_front();
        return s;
    }

    std::vector<std::string> next_queries() {
        std::lock_guard lock(mutex_);
        if (query_script_.empty()) return {};
        auto q = query_script_.front();
        query_script_.pop_front();
        return q;
    }

    std::string evaluate_outline(const CompletionRequest&) {
        int score = next_score();
        json out{{"strengths", "Clear progression from foundations to frontiers."},
                 {"weaknesses",
                  score >= 4 ? "" : "Sections read as a list rather than a narrative."},
                 {"suggestions",
                  score >= 4 ? "" : "Tie subsections to the development directions."},
                 {"score", score}};
        return out.dump();
    }

    std::string subsection(const CompletionRequest& request) const {
        auto keys = scan_ids(request.rendered, "[key:");
        std::ostringstream out;
        out << "% context:";
        for (size_t i = 0; i < keys.size(); ++i) out << (i ? "," : " ") << keys[i];
        out << "\n";
        SplitMix64 rng(fnv1a64(request.rendered) ^ seed_);
        static const char* kFiller[] = {
            "subsequent", "work",     "extends",   "the",      "formulation",
            "by",         "relaxing", "its",       "core",     "assumptions",
            "while",      "later",    "studies",   "quantify", "the",
            "resulting",  "gains",    "across",    "standard", "settings"};
        size_t word_count = 0;
        size_t key_index = 0;
        while (word_count < 430) {
            for (int w = 0; w < 18; ++w) {
                out << kFiller[rng.next_below(20)] << ' ';
                ++word_count;
            }
            if (!keys.empty()) {
                out << "\\cite{" << keys[key_index % keys.size()] << "} ";
                ++key_index;
                ++word_count;
            }
            out << "and the thread continues. ";
            word_count += 4;
        }
        out << "\nRemaining challenges include scaling and rigorous evaluation.";
        return out.str();
    }

    std::string evaluate_section(const CompletionRequest&) {
        int score = next_score();
        auto queries = next_queries();
        json aspect_scores = json::array();
        for (int i = 0; i < 8; ++i) aspect_scores.push_back(score);
        json out{{"aspects", aspect_scores},
                 {"strengths", "Dense citations tied to the subsection focus."},
                 {"weaknesses", score >= 4 ? "" : "Coverage gaps on recent work."},
                 {"overall", score},
                 {"suggestions", score >= 4 ? "" : "Broaden the retrieved evidence."},
                 {"queries", queries}};
        return out.dump();
    }

    uint64_t seed_;
    mutable std::mutex mutex_;
    std::map<TemplateName, long long> call_counts_;
    std::deque<int> score_script_;
    std::deque<std::vector<std::string>> query_script_;
};

}  // namespace surveyg
