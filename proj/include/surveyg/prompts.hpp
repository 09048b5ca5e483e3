#pragma once
// Prompt template registry. Bodies are versioned in this header; their
// content hashes are pinned in the run config so output audits can detect
// drift. Placeholders are {name}; "{{" escapes a literal brace.

#include <array>
#include <map>
#include <set>
#include <string>

#include "surveyg/common.hpp"

namespace surveyg {

enum class TemplateName {
    paper_summary_survey,
    paper_summary_method,
    paper_summary_benchmark,
    paper_summary_theory,
    paper_summary_other,
    horizontal_summary,
    vertical_stage1,
    vertical_stage2,
    outline_generate,
    outline_evaluate,
    subsection_write,
    section_evaluate,
    query_expand,
};

inline constexpr std::array<TemplateName, 13> kAllTemplates = {
    TemplateName::paper_summary_survey,  TemplateName::paper_summary_method,
    TemplateName::paper_summary_benchmark, TemplateName::paper_summary_theory,
    TemplateName::paper_summary_other,   TemplateName::horizontal_summary,
    TemplateName::vertical_stage1,       TemplateName::vertical_stage2,
    TemplateName::outline_generate,      TemplateName::outline_evaluate,
    TemplateName::subsection_write,      TemplateName::section_evaluate,
    TemplateName::query_expand,
};

inline std::string to_string(TemplateName t) {
    switch (t) {
        case TemplateName::paper_summary_survey: return "paper_summary_survey";
        case TemplateName::paper_summary_method: return "paper_summary_method";
        case TemplateName::paper_summary_benchmark: return "paper_summary_benchmark";
        case TemplateName::paper_summary_theory: return "paper_summary_theory";
        case TemplateName::paper_summary_other: return "paper_summary_other";
        case TemplateName::horizontal_summary: return "horizontal_summary";
        case TemplateName::vertical_stage1: return "vertical_stage1";
        case TemplateName::vertical_stage2: return "vertical_stage2";
        case TemplateName::outline_generate: return "outline_generate";
        case TemplateName::outline_evaluate: return "outline_evaluate";
        case TemplateName::subsection_write: return "subsection_write";
        case TemplateName::section_evaluate: return "section_evaluate";
        case TemplateName::query_expand: return "query_expand";
    }
    return "unknown";
}

struct PromptTemplate {
    TemplateName name;
    std::string body;
    std::set<std::string> required_placeholders;
};

namespace prompt_bodies {

// The five per-type summarization bodies are original to this project; the
// classification label is returned in the same call as the summary.
inline constexpr const char* kPaperSummaryCommon = R"(Title: {title}
Year: {year}
Abstract: {abstract}

Classify the paper as one of: survey, method, benchmark, theory, other.
Respond in JSON with keys "paper_type" and "summary".
)";

inline const std::string kPaperSummarySurvey =
    std::string("You are summarizing a SURVEY paper. Capture the taxonomy it proposes, "
                "the subareas it covers, and the open challenges it highlights.\n\n") +
    kPaperSummaryCommon;

inline const std::string kPaperSummaryMethod =
    std::string("You are summarizing a METHOD paper. Capture the technical contribution, "
                "the problem it addresses, and how it improves on prior approaches.\n\n") +
    kPaperSummaryCommon;

inline const std::string kPaperSummaryBenchmark =
    std::string("You are summarizing a BENCHMARK paper. Capture the task, the dataset "
                "construction, the evaluation protocol, and the headline findings.\n\n") +
    kPaperSummaryCommon;

inline const std::string kPaperSummaryTheory =
    std::string("You are summarizing a THEORY paper. Capture the formal setting, the main "
                "results, and their implications for practice.\n\n") +
    kPaperSummaryCommon;

inline const std::string kPaperSummaryOther =
    std::string("Summarize the key content and contribution of this paper.\n\n") +
    kPaperSummaryCommon;

inline constexpr const char* kHorizontalSummary =
    R"(You are a research analyst synthesizing papers on the topic "{QUERY}".
<think> Explain your reasoning for clustering papers into 2-3 subgroups based on methodology, contribution, or thematic focus. </think>

Plan: first identify the subgroups, then execute the plan subgroup by subgroup.
For each subgroup, summarize the shared methodological approaches, thematic contributions, and provide a concise critique comparing the works.
Finally, synthesize an overall perspective highlighting how these subgroups collectively operate in the field.

Papers:
{papers}
)";

inline constexpr const char* kVerticalStage1 =
    R"(Summarize the research lineage below. It starts from a seminal foundation paper and follows the development-stage works that refined and extended it. Emphasize how later works build on the foundation and the methodological thread connecting them.

Papers:
{papers}
)";

inline constexpr const char* kVerticalStage2 =
    R"(Below is a summary of a research lineage up to its development stage, followed by frontier papers that continue it. Integrate the frontier work into the lineage summary: what emerging directions do they open, and how do they depart from the established thread?

Development summary:
{dev_summary}

Frontier papers:
{papers}
)";

inline constexpr const char* kOutlineGenerate =
    R"(Goal: Generate a structured Literature Review Outline for: "{QUERY}"

INPUT SYNTHESIS DATA
- Communities: {summary_layer}
- Directions: {summary_path}

REQUIREMENTS & CONSTRAINTS

1. Structure:
- Progression: Follow Foundations -> Core -> Advanced -> Applications -> Future.
- Mandatory Sections: Must include Introduction, Foundational Concepts, and Conclusion.
- Hierarchy: Use exactly TWO levels (e.g., 2.1, 2.2). No deeper nesting.

2. Content & Quality:
- Create a coherent narrative (evolutionary story, not a list).
- Group material by methodological families and thematic depth.
- Include dedicated sections for Applications and Future Trends/Challenges.

3. Evidence & Output:
- Proof IDs: Each subsection MUST be grounded with 1-3 proof_ids (from layer, community_X, or seed IDs).
- Focus Synthesis: Provide section focus (broad theme) and subsection focus (specific details).
- Format: Return only a JSON ARRAY of main sections and their hierarchical subsections, with keys: ['section_outline', 'subsection_focus', 'proof_ids'].

Reviewer feedback on the previous draft (address it without changing the required structure):
{feedback}
)";

inline constexpr const char* kOutlineEvaluate =
    R"(Evaluate the quality and structure of the following literature review outline.
Assess whether the outline demonstrates meaningful organization of works rather than a simple concatenation of summaries. Your feedback should include:
- Strengths of the outline.
- Weaknesses or issues (if any).
- Specific suggestions for improvement (only if issues are found).
- Final score (1-5, with 5 being the maximum) evaluate overall organization, coherence, and coverage.

Respond in JSON with keys "strengths", "weaknesses", "suggestions", "score".

Outline to evaluate: {outline_text}
)";

inline constexpr const char* kSubsectionWrite =
    R"(Task: Write a comprehensive literature review subsection titled "{SUBSECTION_TITLE}" in LaTeX.

Inputs:
- Focus: {SUBSECTION_FOCUS}
- Community summaries: {COMMUNITY_SUMMARY}
- Development directions: {DEVELOPMENT_DIRECTION}
- Papers (chronological): {PAPER_INFO}

Guidelines:
- Use LaTeX format with citations (\cite{{citation_key}}).
- Minimum 400 words, no numbered subsection titles.
- Focus strictly on the subsection topic.
- Each paper: 2-3 sentences describing technical contributions.
- Connect papers by showing how later work addresses earlier limitations.
- Conclude with remaining challenges or future directions.

Avoid: sequential listing, vague critiques, unsupported claims, isolated descriptions, or ignoring contradictions.

Reviewer feedback on the previous draft (address it in this revision):
{FEEDBACK}
)";

inline constexpr const char* kSectionEvaluate =
    R"(Evaluate the quality of the following literature review section within the context of the overall survey outline.
Your evaluation should address the following aspects, each rated from 1-5 (5 = excellent):
(1) content coverage, (2) citation density, (3) academic rigor, (4) synthesis across works,
(5) critical analysis, (6) coherence, (7) depth of discussion, and (8) specificity of scope.

In addition to numeric ratings, provide:
- A brief natural language summary of the section's strengths and weaknesses,
- An overall score (1-5) with justification,
- Suggestions for improvement, focusing on areas that fall short,
- A list of search queries that could retrieve additional relevant literature to strengthen the section.

Respond in JSON with keys "aspects" (array of 8 integers), "strengths", "weaknesses", "overall", "suggestions", "queries".

Outline context: {outline_text}

Section to evaluate: {section_text}
)";

inline constexpr const char* kQueryExpand =
    R"(Expand the research query below into a set of diverse keywords for literature search. Cover subtopics, methods, and applications. Return a JSON array of at most {n_max} keyword strings, the original query first.

Research query: {query}
)";

}  // namespace prompt_bodies

class PromptRegistry {
public:
    PromptRegistry() {
        using TN = TemplateName;
        namespace pb = prompt_bodies;
        add(TN::paper_summary_survey, pb::kPaperSummarySurvey);
        add(TN::paper_summary_method, pb::kPaperSummaryMethod);
        add(TN::paper_summary_benchmark, pb::kPaperSummaryBenchmark);
        add(TN::paper_summary_theory, pb::kPaperSummaryTheory);
        add(TN::paper_summary_other, pb::kPaperSummaryOther);
        add(TN::horizontal_summary, pb::kHorizontalSummary);
        add(TN::vertical_stage1, pb::kVerticalStage1);
        add(TN::vertical_stage2, pb::kVerticalStage2);
        add(TN::outline_generate, pb::kOutlineGenerate);
        add(TN::outline_evaluate, pb::kOutlineEvaluate);
        add(TN::subsection_write, pb::kSubsectionWrite);
        add(TN::section_evaluate, pb::kSectionEvaluate);
        add(TN::query_expand, pb::kQueryExpand);
    }

    const PromptTemplate& get(TemplateName name) const {
        return templates_.at(name);
    }

    std::map<std::string, std::string> body_hashes() const {
        std::map<std::string, std::string> out;
        for (const auto& [name, t] : templates_)
            out[to_string(name)] = content_hash(t.body);
        return out;
    }

private:
    void add(TemplateName name, std::string body) {
        PromptTemplate t{name, std::move(body), {}};
        t.required_placeholders = scan_placeholders(t.body);
        templates_.emplace(name, std::move(t));
    }

    static std::set<std::string> scan_placeholders(const std::string& body) {
        std::set<std::string> out;
        for (size_t i = 0; i < body.size(); ++i) {
            if (body[i] != '{') continue;
            if (i + 1 < body.size() && body[i + 1] == '{') {
                ++i;
                continue;
            }
            size_t end = body.find('}', i);
            if (end == std::string::npos) break;
            std::string name = body.substr(i + 1, end - i - 1);
            bool ok = !name.empty();
            for (char c : name)
                ok = ok && (std::isalnum(static_cast<unsigned char>(c)) || c == '_');
            if (ok) out.insert(name);
            i = end;
        }
        return out;
    }

    std::map<TemplateName, PromptTemplate> templates_;
};

inline const PromptRegistry& prompt_registry() {
    static const PromptRegistry registry;
    return registry;
}

inline std::string render(const PromptTemplate& tmpl,
                          const std::map<std::string, std::string>& bindings) {
    for (const auto& ph : tmpl.required_placeholders)
        if (!bindings.count(ph))
            throw ValidationError("missing placeholder: " + ph, {ph});
    std::string out;
    out.reserve(tmpl.body.size());
    const std::string& body = tmpl.body;
    for (size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '{' && i + 1 < body.size() && body[i + 1] == '{') {
            out += '{';
            ++i;
            continue;
        }
        if (body[i] == '{') {
            size_t end = body.find('}', i);
            std::string name = body.substr(i + 1, end - i - 1);
            auto it = bindings.find(name);
            if (it == bindings.end())
                throw ValidationError("missing placeholder: " + name, {name});
            out += it->second;
            i = end;
            continue;
        }
        out += body[i];
    }
    return out;
}

inline std::string render(TemplateName name,
                          const std::map<std::string, std::string>& bindings) {
    return render(prompt_registry().get(name), bindings);
}

}  // namespace surveyg
