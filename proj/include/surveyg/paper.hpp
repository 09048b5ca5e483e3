#pragma once
// Paper records and the in-memory corpus.

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "surveyg/common.hpp"

namespace surveyg {

enum class PaperType { survey, method, benchmark, theory, other };

inline std::string to_string(PaperType t) {
    switch (t) {
        case PaperType::survey: return "survey";
        case PaperType::method: return "method";
        case PaperType::benchmark: return "benchmark";
        case PaperType::theory: return "theory";
        default: return "other";
    }
}

inline PaperType paper_type_from_string(std::string_view s) {
    if (s == "survey") return PaperType::survey;
    if (s == "method") return PaperType::method;
    if (s == "benchmark") return PaperType::benchmark;
    if (s == "theory") return PaperType::theory;
    return PaperType::other;
}

struct PaperRecord {
    std::string id;
    std::string title;
    std::vector<std::string> authors;
    int year = 1900;
    std::string abstract;
    std::optional<std::string> body_ref;
    long long citation_count = 0;
    std::set<std::string> cited_ids;
    PaperType paper_type = PaperType::other;
    std::optional<std::string> summary;
    std::optional<std::vector<double>> embedding;
    bool degraded = false;
    bool year_missing = false;

    // summary if present, else abstract
    const std::string& best_text() const {
        return summary && !summary->empty() ? *summary : abstract;
    }
};

// Stable fallback id when the source provides none.
inline std::string derive_paper_id(const std::string& title, int year) {
    std::string norm;
    for (const auto& w : tokenize_words(title)) {
        if (!norm.empty()) norm += ' ';
        norm += w;
    }
    return "p" + hex64(fnv1a64(norm + "|" + std::to_string(year)));
}

struct Corpus {
    std::map<std::string, PaperRecord> papers;  // id -> record, sorted for determinism
    int embedding_dim = 0;
    std::map<std::string, std::string> provenance;  // id -> source descriptor

    bool contains(const std::string& id) const { return papers.count(id) > 0; }
    size_t size() const { return papers.size(); }

    const PaperRecord& at(const std::string& id) const {
        auto it = papers.find(id);
        if (it == papers.end()) throw PreconditionError("unknown paper id: " + id);
        return it->second;
    }

    // Merge keeps the record with the larger citation_count.
    void insert(PaperRecord rec, const std::string& source = {}) {
        auto it = papers.find(rec.id);
        if (it == papers.end() || rec.citation_count > it->second.citation_count) {
            if (!source.empty()) provenance[rec.id] = source;
            papers[rec.id] = std::move(rec);
        }
    }

    std::vector<std::string> ids() const {
        std::vector<std::string> out;
        out.reserve(papers.size());
        for (const auto& [id, _] : papers) out.push_back(id);
        return out;
    }
};

inline void validate_corpus(const Corpus& c) {
    for (const auto& [id, p] : c.papers) {
        if (id != p.id) throw PreconditionError("corpus key mismatch for " + id);
        if (p.year < 1900) throw PreconditionError("paper " + id + ": year < 1900");
        if (p.citation_count < 0)
            throw PreconditionError("paper " + id + ": negative citation_count");
        if (p.cited_ids.count(id))
            throw PreconditionError("paper " + id + ": cites itself");
        if (p.embedding) {
            if (static_cast<int>(p.embedding->size()) != c.embedding_dim)
                throw ConfigError("paper " + id + ": embedding dim mismatch",
                                  "embedding_dim");
            double norm2 = 0;
            for (double v : *p.embedding) {
                if (!std::isfinite(v))
                    throw PreconditionError("paper " + id + ": non-finite embedding");
                norm2 += v * v;
            }
            if (std::fabs(std::sqrt(norm2) - 1.0) > 1e-6)
                throw PreconditionError("paper " + id + ": embedding not unit norm");
        }
    }
}

}  // namespace surveyg
