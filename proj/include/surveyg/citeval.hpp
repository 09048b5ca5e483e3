#pragma once
// Citation-quality evaluation: claim extraction, NLI entailment checks, and
// the recall / precision / F1 report.

#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "surveyg/agents.hpp"
#include "surveyg/common.hpp"
#include "surveyg/paper.hpp"

#include <json.hpp>

namespace surveyg {

struct Claim {
    std::string sentence;
    std::vector<std::string> cited_ids;
    std::string section_key;
    int sentence_index = 0;

    std::string hash() const { return content_hash(sentence); }
};

// Deterministic sentence split on . ? ! outside \cite{...} braces; every
// sentence carrying at least one citation key becomes a claim.
inline std::vector<Claim> extract_claims(const SurveyDocument& survey) {
    std::vector<Claim> claims;
    for (const auto& section : survey.sections) {
        int sentence_index = 0;
        std::string current;
        int brace_depth = 0;
        auto flush = [&] {
            std::string sentence = trim(current);
            current.clear();
            if (sentence.empty()) return;
            auto keys = extract_citation_keys(sentence);
            if (!keys.empty()) {
                Claim c;
                c.sentence = sentence;
                // dedup, keep first occurrence order
                for (const auto& k : keys)
                    if (std::find(c.cited_ids.begin(), c.cited_ids.end(), k) ==
                        c.cited_ids.end())
                        c.cited_ids.push_back(k);
                c.section_key = section.key;
                c.sentence_index = sentence_index;
                claims.push_back(std::move(c));
            }
            ++sentence_index;
        };
        for (char ch : section.body) {
            current += ch;
            if (ch == '{') ++brace_depth;
            if (ch == '}') brace_depth = std::max(0, brace_depth - 1);
            if (brace_depth == 0 && (ch == '.' || ch == '?' || ch == '!')) flush();
        }
        flush();
    }
    return claims;
}

class NliBackend {
public:
    virtual ~NliBackend() = default;
    // premise: paper text; hypothesis: the claim sentence
    virtual bool entails(const std::string& premise, const std::string& hypothesis,
                         const std::string& claim_hash,
                         const std::string& paper_id) = 0;
};

// Lookup table keyed "claimhash:paperid" -> bool, default false. A premise
// identical to the hypothesis always entails (sanity anchor).
class MockNli : public NliBackend {
public:
    MockNli() = default;
    explicit MockNli(std::map<std::string, bool> table) : table_(std::move(table)) {}

    static MockNli from_json(const nlohmann::json& j) {
        std::map<std::string, bool> table;
        for (auto& [key, value] : j.items()) table[key] = value.get<bool>();
        return MockNli(std::move(table));
    }

    void set(const std::string& claim_hash, const std::string& paper_id, bool verdict) {
        table_[claim_hash + ":" + paper_id] = verdict;
    }

    bool entails(const std::string& premise, const std::string& hypothesis,
                 const std::string& claim_hash, const std::string& paper_id) override {
        if (premise == hypothesis) return true;
        auto it = table_.find(claim_hash + ":" + paper_id);
        return it != table_.end() && it->second;
    }

private:
    std::map<std::string, bool> table_;
};

inline bool entails(const Claim& claim, const PaperRecord& paper, NliBackend& nli) {
    const std::string& premise =
        !paper.abstract.empty() ? paper.abstract
                                : (paper.summary ? *paper.summary : std::string{});
    if (premise.empty())
        throw PreconditionError("entails: paper " + paper.id +
                                " has no abstract or summary");
    return nli.entails(premise, claim.sentence, claim.hash(), paper.id);
}

struct CitationReport {
    double recall = 0;     // 100 * supported claims / total claims
    double precision = 0;  // 100 * entailing pairs / total pairs
    double f1 = 0;         // harmonic mean, 0 when P+R == 0
    long long total_claims = 0;
    long long supported_claims = 0;
    long long total_pairs = 0;
    long long entailing_pairs = 0;
    std::vector<bool> claim_verdicts;                       // per claim
    std::vector<std::pair<std::string, bool>> pair_verdicts;  // "hash:paper" -> verdict
};

inline CitationReport score(const std::vector<Claim>& claims, const Corpus& corpus,
                            NliBackend& nli) {
    if (claims.empty()) throw PreconditionError("nothing to evaluate");
    CitationReport report;
    report.total_claims = static_cast<long long>(claims.size());
    for (const auto& claim : claims) {
        bool supported = false;
        for (const auto& id : claim.cited_ids) {
            bool verdict = entails(claim, corpus.at(id), nli);
            report.pair_verdicts.push_back({claim.hash() + ":" + id, verdict});
            ++report.total_pairs;
            if (verdict) {
                ++report.entailing_pairs;
                supported = true;
            }
        }
        report.claim_verdicts.push_back(supported);
        if (supported) ++report.supported_claims;
    }
    report.recall = 100.0 * report.supported_claims / report.total_claims;
    report.precision =
        report.total_pairs == 0
            ? 0.0
            : 100.0 * report.entailing_pairs / report.total_pairs;
    report.f1 = (report.precision + report.recall) > 0
                    ? 2.0 * report.precision * report.recall /
                          (report.precision + report.recall)
                    : 0.0;
    return report;
}

inline nlohmann::ordered_json report_to_json(const CitationReport& r) {
    nlohmann::ordered_json j;
    j["recall"] = r.recall;
    j["precision"] = r.precision;
    j["f1"] = r.f1;
    j["total_claims"] = r.total_claims;
    j["supported_claims"] = r.supported_claims;
    j["total_pairs"] = r.total_pairs;
    j["entailing_pairs"] = r.entailing_pairs;
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (const auto& [key, verdict] : r.pair_verdicts)
        pairs.push_back({{"pair", key}, {"entails", verdict}});
    j["pair_verdicts"] = pairs;
    j["claim_verdicts"] = r.claim_verdicts;
    return j;
}

inline std::string report_to_table(const CitationReport& r) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3);
    out << "citation quality\n";
    out << "  recall    " << std::setw(8) << r.recall << "  (" << r.supported_claims
        << "/" << r.total_claims << " claims supported)\n";
    out << "  precision " << std::setw(8) << r.precision << "  (" << r.entailing_pairs
        << "/" << r.total_pairs << " pairs entail)\n";
    out << "  f1        " << std::setw(8) << r.f1 << "\n";
    return out.str();
}

}  // namespace surveyg
