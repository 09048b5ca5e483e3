#pragma once
// Writing Agent / Evaluation Agent generation loop: outline drafting and
// critique, per-subsection drafting with retrieval, and survey assembly.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "surveyg/common.hpp"
#include "surveyg/encoder.hpp"
#include "surveyg/llm.hpp"
#include "surveyg/paper.hpp"
#include "surveyg/traversal.hpp"

#include <json.hpp>

namespace surveyg {

// ----------------------------------------------------------------- memory

struct AgentMemory {
    std::vector<SummaryArtifact> artifacts;
    std::map<std::string, const SummaryArtifact*> index;

    explicit AgentMemory(std::vector<SummaryArtifact> arts)
        : artifacts(std::move(arts)) {
        for (const auto& a : artifacts) {
            if (!index.emplace(a.artifact_id, &a).second)
                throw ValidationError("duplicate artifact id: " + a.artifact_id);
        }
    }

    bool resolves(const std::string& id) const { return index.count(id) > 0; }

    const SummaryArtifact& at(const std::string& id) const {
        auto it = index.find(id);
        if (it == index.end())
            throw PreconditionError("unknown artifact id: " + id);
        return *it->second;
    }
};

// ---------------------------------------------------------------- outline

struct OutlineSubsection {
    std::string title;
    std::string focus;
    std::vector<std::string> proof_ids;  // 1-3, resolve in AgentMemory
};

struct OutlineSection {
    std::string title;
    std::string focus;
    std::vector<OutlineSubsection> subsections;
};

struct OutlineDraft {
    std::vector<OutlineSection> sections;
    int revision = 0;
};

inline nlohmann::ordered_json outline_to_json(const OutlineDraft& draft) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& sec : draft.sections) {
        nlohmann::ordered_json subs = nlohmann::ordered_json::array();
        for (const auto& sub : sec.subsections)
            subs.push_back({{"section_outline", sub.title},
                            {"subsection_focus", sub.focus},
                            {"proof_ids", sub.proof_ids}});
        arr.push_back({{"section_outline", sec.title},
                       {"subsection_focus", sec.focus},
                       {"subsections", subs}});
    }
    return {{"revision", draft.revision}, {"sections", arr}};
}

// Accepts the agent interchange form: a JSON array of sections, each with
// section_outline / subsection_focus / proof_ids keys and one level of
// subsections.
inline OutlineDraft outline_from_sections_json(const nlohmann::json& arr,
                                               int revision = 0) {
    if (!arr.is_array()) throw ValidationError("outline is not a JSON array");
    OutlineDraft draft;
    draft.revision = revision;
    for (const auto& s : arr) {
        OutlineSection sec;
        sec.title = s.at("section_outline").get<std::string>();
        sec.focus = s.value("subsection_focus", "");
        for (const auto& sub : s.value("subsections", nlohmann::json::array())) {
            if (sub.contains("subsections") && !sub["subsections"].empty())
                throw ValidationError("outline deeper than two levels under: " +
                                      sec.title);
            OutlineSubsection out;
            out.title = sub.at("section_outline").get<std::string>();
            out.focus = sub.value("subsection_focus", "");
            out.proof_ids = sub.value("proof_ids", std::vector<std::string>{});
            sec.subsections.push_back(std::move(out));
        }
        draft.sections.push_back(std::move(sec));
    }
    return draft;
}

inline OutlineDraft outline_from_json(const nlohmann::json& j, int revision = 0) {
    if (j.is_array()) return outline_from_sections_json(j, revision);
    return outline_from_sections_json(j.at("sections"),
                                      j.value("revision", revision));
}

inline void validate_outline(const OutlineDraft& draft, const AgentMemory& memory) {
    std::vector<std::string> problems;
    if (draft.sections.empty()) problems.push_back("outline has no sections");
    std::set<std::string> titles;
    for (const auto& sec : draft.sections) {
        titles.insert(to_lower(trim(sec.title)));
        for (const auto& sub : sec.subsections) {
            if (sub.proof_ids.empty() || sub.proof_ids.size() > 3)
                problems.push_back("subsection '" + sub.title +
                                   "' needs 1-3 proof_ids, has " +
                                   std::to_string(sub.proof_ids.size()));
            for (const auto& pid : sub.proof_ids)
                if (!memory.resolves(pid))
                    problems.push_back("unresolvable proof_id: " + pid);
        }
    }
    for (const char* required :
         {"introduction", "foundational concepts", "conclusion"})
        if (!titles.count(required))
            problems.push_back(std::string("missing mandatory section: ") + required);
    if (!problems.empty())
        throw ValidationError("outline validation failed", problems);
}

// --------------------------------------------------------------- feedback

struct Feedback {
    std::string strengths;
    std::string weaknesses;
    std::string suggestions;
    int score = 1;  // 1-5
    std::vector<std::string> queries;
};

inline Feedback feedback_from_json(const nlohmann::json& j) {
    Feedback fb;
    fb.strengths = j.value("strengths", "");
    fb.weaknesses = j.value("weaknesses", "");
    fb.suggestions = j.value("suggestions", "");
    fb.score = j.contains("overall") ? j["overall"].get<int>()
                                     : j.value("score", 1);
    if (fb.score < 1 || fb.score > 5)
        throw ValidationError("feedback score out of 1-5 range");
    fb.queries = j.value("queries", std::vector<std::string>{});
    return fb;
}

inline std::string feedback_to_text(const Feedback& fb) {
    return "strengths: " + fb.strengths + "\nweaknesses: " + fb.weaknesses +
           "\nsuggestions: " + fb.suggestions +
           "\nscore: " + std::to_string(fb.score);
}

// ------------------------------------------------------------- generation

struct GenerationConfig {
    int t_max = 2;
    int outline_threshold = 4;   // EA score needed to stop revising
    int section_threshold = 4;
    int retrieve_top_k = 60;     // per-chapter retrieval budget
    bool multiagent = true;      // false: single WA pass, no EA loop
    bool use_vertical = true;
    bool use_horizontal = true;
    bool parallel_subsections = false;
    size_t concurrency = 8;
    RetryPolicy retry;
};

namespace agents_detail {

inline std::string artifact_block(const SummaryArtifact& a) {
    return "- [proof_id: " + a.artifact_id + "] " + a.text;
}

inline std::string memory_blocks(const AgentMemory& memory,
                                 SummaryArtifact::Kind kind) {
    std::string out;
    for (const auto& a : memory.artifacts) {
        if (a.kind != kind) continue;
        if (!out.empty()) out += '\n';
        out += artifact_block(a);
    }
    return out.empty() ? "(none)" : out;
}

}  // namespace agents_detail

inline OutlineDraft outline_phase(const AgentMemory& memory,
                                  const std::string& topic, LlmBackend& backend,
                                  const GenerationConfig& config) {
    if (memory.artifacts.empty())
        throw PreconditionError("outline_phase: empty memory");
    if (config.t_max < 1) throw PreconditionError("outline_phase: t_max must be >= 1");

    auto draft_once = [&](const std::string& feedback, int revision) {
        CompletionRequest request;
        request.template_name = TemplateName::outline_generate;
        request.rendered = render(
            TemplateName::outline_generate,
            {{"QUERY", topic},
             {"summary_layer",
              agents_detail::memory_blocks(memory, SummaryArtifact::Kind::horizontal)},
             {"summary_path",
              agents_detail::memory_blocks(memory, SummaryArtifact::Kind::vertical)},
             {"feedback", feedback}});
        CompletionResult result =
            complete_with_retry(backend, request, config.retry);
        try {
            return outline_from_sections_json(nlohmann::json::parse(result.text),
                                              revision);
        } catch (const nlohmann::json::exception&) {
            // one reprompt before giving up
            CompletionResult retry_result =
                complete_with_retry(backend, request, config.retry);
            try {
                return outline_from_sections_json(
                    nlohmann::json::parse(retry_result.text), revision);
            } catch (const nlohmann::json::exception& e) {
                throw ValidationError(std::string("unparseable outline JSON: ") +
                                      e.what());
            }
        }
    };

    OutlineDraft draft = draft_once("(none yet)", 0);
    if (config.multiagent) {
        for (int t = 1; t <= config.t_max; ++t) {
            CompletionRequest request;
            request.template_name = TemplateName::outline_evaluate;
            request.rendered =
                render(TemplateName::outline_evaluate,
                       {{"outline_text", outline_to_json(draft).dump(2)}});
            CompletionResult result =
                complete_with_retry(backend, request, config.retry);
            Feedback fb;
            try {
                fb = feedback_from_json(nlohmann::json::parse(result.text));
            } catch (const nlohmann::json::exception& e) {
                throw ValidationError(std::string("unparseable outline feedback: ") +
                                      e.what());
            }
            if (fb.score >= config.outline_threshold) break;
            draft = draft_once(feedback_to_text(fb), t);
        }
    }
    validate_outline(draft, memory);
    return draft;
}

// ---------------------------------------------------------------- retrieve

// Max-over-queries cosine ranking; ties broken by ascending id.
inline std::vector<std::string> retrieve(const std::vector<std::string>& queries,
                                         const Corpus& corpus, Encoder& encoder,
                                         int top_k) {
    if (top_k < 1) throw PreconditionError("retrieve: top_k must be >= 1");
    std::vector<EmbeddingVector> query_vecs;
    for (const auto& q : queries)
        if (!trim(q).empty()) query_vecs.push_back(encoder.encode(q));
    if (query_vecs.empty()) return {};

    struct Scored {
        std::string id;
        double score;
    };
    std::vector<Scored> scored;
    for (const auto& [id, p] : corpus.papers) {
        if (!p.embedding) continue;
        EmbeddingVector v{*p.embedding};
        double best = -2.0;
        for (const auto& qv : query_vecs) best = std::max(best, cosine(qv, v));
        scored.push_back({id, best});
    }
    if (scored.empty()) throw PreconditionError("retrieve: no embedded papers");
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (static_cast<int>(scored.size()) > top_k) scored.resize(top_k);
    std::vector<std::string> out;
    for (const auto& s : scored) out.push_back(s.id);
    return out;
}

// ----------------------------------------------------------- section text

struct SectionText {
    std::string key;    // "<section index>.<subsection index>", 1-based
    std::string title;
    std::string body;   // LaTeX prose with \cite{...} keys
    long long word_count = 0;
    int revision = 0;
    std::vector<std::string> retrieved_ids;
    bool short_flagged = false;  // under 400 words after the final revision
};

inline std::vector<std::string> extract_citation_keys(const std::string& body) {
    std::vector<std::string> keys;
    size_t pos = 0;
    while ((pos = body.find("\\cite{", pos)) != std::string::npos) {
        pos += 6;
        size_t end = body.find('}', pos);
        if (end == std::string::npos) break;
        std::string inner = body.substr(pos, end - pos);
        size_t start = 0;
        while (start <= inner.size()) {
            size_t comma = inner.find(',', start);
            std::string key = trim(inner.substr(
                start, comma == std::string::npos ? comma : comma - start));
            if (!key.empty()) keys.push_back(key);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        pos = end + 1;
    }
    return keys;
}

inline long long count_words(const std::string& text) {
    long long count = 0;
    bool in_word = false;
    for (char c : text) {
        bool space = std::isspace(static_cast<unsigned char>(c));
        if (!space && !in_word) ++count;
        in_word = !space;
    }
    return count;
}

namespace agents_detail {

inline std::string proof_blocks(const AgentMemory& memory,
                                const std::vector<std::string>& proof_ids,
                                SummaryArtifact::Kind kind) {
    std::string out;
    for (const auto& pid : proof_ids) {
        const auto& a = memory.at(pid);
        if (a.kind != kind) continue;
        if (!out.empty()) out += '\n';
        out += artifact_block(a);
    }
    return out.empty() ? "(none)" : out;
}

// chronological, ties by id
inline std::vector<std::string> chronological(const Corpus& corpus,
                                              std::vector<std::string> ids) {
    std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
        int ya = corpus.at(a).year, yb = corpus.at(b).year;
        if (ya != yb) return ya < yb;
        return a < b;
    });
    return ids;
}

}  // namespace agents_detail

inline SectionText write_subsection(const OutlineDraft& outline,
                                    const OutlineSubsection& sub,
                                    const std::string& key,
                                    const AgentMemory& memory, const Corpus& corpus,
                                    Encoder& encoder, LlmBackend& backend,
                                    const GenerationConfig& config) {
    SectionText section;
    section.key = key;
    section.title = sub.title;

    // Writing context: proof artifacts + retrieved papers (never the whole
    // memory). The initial retrieval query is the subsection focus.
    std::vector<std::string> retrieved =
        retrieve({sub.title + " " + sub.focus}, corpus, encoder,
                 config.retrieve_top_k);
    std::set<std::string> retrieved_set(retrieved.begin(), retrieved.end());

    auto draft_once = [&](const std::string& feedback, int revision) {
        CompletionRequest request;
        request.template_name = TemplateName::subsection_write;
        request.rendered = render(
            TemplateName::subsection_write,
            {{"SUBSECTION_TITLE", sub.title},
             {"SUBSECTION_FOCUS", sub.focus},
             {"COMMUNITY_SUMMARY",
              agents_detail::proof_blocks(memory, sub.proof_ids,
                                          SummaryArtifact::Kind::horizontal)},
             {"DEVELOPMENT_DIRECTION",
              agents_detail::proof_blocks(memory, sub.proof_ids,
                                          SummaryArtifact::Kind::vertical)},
             {"PAPER_INFO",
              format_paper_blocks(corpus,
                                  agents_detail::chronological(corpus, retrieved))},
             {"FEEDBACK", feedback}});
        section.body = complete_with_retry(backend, request, config.retry).text;
        section.revision = revision;
    };

    draft_once("(none yet)", 0);

    if (config.multiagent) {
        std::string outline_text = outline_to_json(outline).dump(2);
        for (int t = 1; t <= config.t_max; ++t) {
            CompletionRequest request;
            request.template_name = TemplateName::section_evaluate;
            request.rendered = render(TemplateName::section_evaluate,
                                      {{"outline_text", outline_text},
                                       {"section_text", section.body}});
            CompletionResult result =
                complete_with_retry(backend, request, config.retry);
            Feedback fb;
            try {
                fb = feedback_from_json(nlohmann::json::parse(result.text));
            } catch (const nlohmann::json::exception& e) {
                throw ValidationError(std::string("unparseable section feedback: ") +
                                      e.what());
            }
            if (fb.score >= config.section_threshold) break;
            if (!fb.queries.empty()) {
                for (const auto& id :
                     retrieve(fb.queries, corpus, encoder, config.retrieve_top_k)) {
                    if (retrieved_set.insert(id).second) retrieved.push_back(id);
                }
            }
            draft_once(feedback_to_text(fb), t);
        }
    }

    // Citation keys must resolve; one reprompt, then a hard failure.
    auto dangling = [&] {
        std::vector<std::string> bad;
        for (const auto& k : extract_citation_keys(section.body))
            if (!corpus.contains(k)) bad.push_back(k);
        return bad;
    };
    if (!dangling().empty()) {
        draft_once("remove citations to unknown keys", section.revision);
        auto bad = dangling();
        if (!bad.empty())
            throw ValidationError("unresolvable citation keys in '" + sub.title + "'",
                                  bad);
    }

    section.word_count = count_words(section.body);
    section.short_flagged = section.word_count < 400;
    section.retrieved_ids = retrieved;
    return section;
}

inline std::vector<SectionText> subsection_phase(const OutlineDraft& outline,
                                                 const AgentMemory& memory,
                                                 const Corpus& corpus,
                                                 Encoder& encoder,
                                                 LlmBackend& backend,
                                                 const GenerationConfig& config) {
    struct Job {
        const OutlineSubsection* sub;
        std::string key;
    };
    std::vector<Job> jobs;
    for (size_t i = 0; i < outline.sections.size(); ++i)
        for (size_t j = 0; j < outline.sections[i].subsections.size(); ++j)
            jobs.push_back({&outline.sections[i].subsections[j],
                            std::to_string(i + 1) + "." + std::to_string(j + 1)});

    std::vector<SectionText> sections(jobs.size());
    auto run = [&](size_t i) {
        sections[i] = write_subsection(outline, *jobs[i].sub, jobs[i].key, memory,
                                       corpus, encoder, backend, config);
    };
    if (config.parallel_subsections) {
        parallel_for(jobs.size(), config.concurrency, run);
    } else {
        for (size_t i = 0; i < jobs.size(); ++i) run(i);
    }
    return sections;
}

// ---------------------------------------------------------------- survey

struct SurveyDocument {
    std::string topic;
    OutlineDraft outline;
    std::vector<SectionText> sections;       // outline order
    std::vector<std::string> bibliography;   // cited paper ids, sorted
    std::map<std::string, std::string> metadata;
};

inline SurveyDocument assemble(const OutlineDraft& outline,
                               const std::vector<SectionText>& sections,
                               const Corpus& corpus, const std::string& topic,
                               std::map<std::string, std::string> metadata = {}) {
    std::map<std::string, const SectionText*> by_key;
    for (const auto& s : sections)
        if (!by_key.emplace(s.key, &s).second)
            throw ValidationError("duplicate section text for key " + s.key);

    SurveyDocument doc;
    doc.topic = topic;
    doc.outline = outline;
    doc.metadata = std::move(metadata);

    std::set<std::string> cited;
    for (size_t i = 0; i < outline.sections.size(); ++i) {
        for (size_t j = 0; j < outline.sections[i].subsections.size(); ++j) {
            std::string key = std::to_string(i + 1) + "." + std::to_string(j + 1);
            auto it = by_key.find(key);
            if (it == by_key.end())
                throw ValidationError("missing section text for subsection " + key +
                                      " (" + outline.sections[i].subsections[j].title +
                                      ")");
            doc.sections.push_back(*it->second);
            for (const auto& k : extract_citation_keys(it->second->body)) {
                if (!corpus.contains(k))
                    throw ValidationError("citation key not in corpus: " + k);
                cited.insert(k);
            }
        }
    }
    if (doc.sections.size() != sections.size())
        throw ValidationError("section texts do not match the outline");
    doc.bibliography.assign(cited.begin(), cited.end());
    return doc;
}

// ---------------------------------------------------------------- exports

inline std::string survey_to_latex(const SurveyDocument& doc, const Corpus& corpus) {
    std::string out;
    out += "\\documentclass{article}\n\\title{" + doc.topic + "}\n\\begin{document}\n";
    out += "\\maketitle\n";
    size_t cursor = 0;
    for (size_t i = 0; i < doc.outline.sections.size(); ++i) {
        const auto& sec = doc.outline.sections[i];
        out += "\\section{" + sec.title + "}\n";
        for (size_t j = 0; j < sec.subsections.size(); ++j) {
            out += "\\subsection{" + sec.subsections[j].title + "}\n";
            out += doc.sections[cursor++].body + "\n\n";
        }
    }
    out += "\\begin{thebibliography}{99}\n";
    for (const auto& id : doc.bibliography) {
        const auto& p = corpus.at(id);
        std::string authors;
        for (const auto& a : p.authors) {
            if (!authors.empty()) authors += ", ";
            authors += a;
        }
        out += "\\bibitem{" + id + "} " + (authors.empty() ? "Unknown" : authors) +
               ". " + p.title + ". " + std::to_string(p.year) + ".\n";
    }
    out += "\\end{thebibliography}\n\\end{document}\n";
    return out;
}

inline std::string survey_to_markdown(const SurveyDocument& doc,
                                      const Corpus& corpus) {
    std::string out = "# " + doc.topic + "\n\n";
    size_t cursor = 0;
    for (const auto& sec : doc.outline.sections) {
        out += "## " + sec.title + "\n\n";
        for (const auto& sub : sec.subsections) {
            out += "### " + sub.title + "\n\n";
            std::string body = doc.sections[cursor++].body;
            // \cite{key} -> [key]
            size_t pos = 0;
            while ((pos = body.find("\\cite{", pos)) != std::string::npos) {
                size_t end = body.find('}', pos);
                if (end == std::string::npos) break;
                std::string keys = body.substr(pos + 6, end - pos - 6);
                body.replace(pos, end - pos + 1, "[" + keys + "]");
                pos += keys.size() + 2;
            }
            out += body + "\n\n";
        }
    }
    out += "## References\n\n";
    for (const auto& id : doc.bibliography) {
        const auto& p = corpus.at(id);
        out += "- **" + id + "**: " + p.title + " (" + std::to_string(p.year) + ")\n";
    }
    return out;
}

inline std::string bibliography_to_bibtex(const SurveyDocument& doc,
                                          const Corpus& corpus) {
    std::string out;
    for (const auto& id : doc.bibliography) {
        const auto& p = corpus.at(id);
        std::string authors;
        for (const auto& a : p.authors) {
            if (!authors.empty()) authors += " and ";
            authors += a;
        }
        out += "@misc{" + id + ",\n";
        out += "  title = {" + p.title + "},\n";
        if (!authors.empty()) out += "  author = {" + authors + "},\n";
        out += "  year = {" + std::to_string(p.year) + "}\n";
        out += "}\n\n";
    }
    return out;
}

}  // namespace surveyg
