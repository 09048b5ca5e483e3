#pragma once
// Text-embedding abstraction: cosine similarity, the deterministic mock
// encoder, and an HTTP encoder client.

#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "surveyg/common.hpp"
#include "surveyg/paper.hpp"

namespace surveyg {

struct EmbeddingVector {
    std::vector<double> values;

    int dim() const { return static_cast<int>(values.size()); }

    double norm() const {
        double s = 0;
        for (double v : values) s += v * v;
        return std::sqrt(s);
    }

    EmbeddingVector& normalize() {
        double n = norm();
        if (n == 0) throw PreconditionError("cannot normalize zero vector");
        for (double& v : values) v /= n;
        return *this;
    }
};

inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim())
        throw PreconditionError("cosine: dimension mismatch");
    if (a.dim() == 0) throw PreconditionError("cosine: empty vectors");
    double dot = 0, na = 0, nb = 0;
    for (int i = 0; i < a.dim(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0 || nb == 0) throw PreconditionError("cosine: zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Symmetric by construction: arguments are ordered canonically by the caller's
// ids before computing, so both directions take the same rounding path.
inline double cosine_by_id(const std::string& id_a, const EmbeddingVector& a,
                           const std::string& id_b, const EmbeddingVector& b) {
    return id_a <= id_b ? cosine(a, b) : cosine(b, a);
}

class Encoder {
public:
    virtual ~Encoder() = default;
    virtual EmbeddingVector encode(const std::string& text) = 0;
    virtual int dim() const = 0;
};

// Seeded hash of the token multiset mapped to a pseudo-random unit vector.
// Identical text (up to tokenization) always gives the identical vector,
// shared tokens pull vectors together, so similarity rankings are meaningful
// offline.
class MockEncoder : public Encoder {
public:
    explicit MockEncoder(int dim = 256, uint64_t seed = 1) : dim_(dim), seed_(seed) {
        if (dim <= 0) throw ConfigError("embedding_dim must be positive", "embedding_dim");
    }

    EmbeddingVector encode(const std::string& text) override {
        auto words = tokenize_words(text);
        if (words.empty()) throw PreconditionError("encode: empty text");
        std::vector<double> acc(dim_, 0.0);
        for (const auto& w : words) {
            SplitMix64 rng(fnv1a64(w) ^ seed_);
            for (int i = 0; i < dim_; ++i) acc[i] += rng.next_unit() * 2.0 - 1.0;
        }
        EmbeddingVector v{std::move(acc)};
        return v.normalize();
    }

    int dim() const override { return dim_; }

private:
    int dim_;
    uint64_t seed_;
};

inline EmbeddingVector embed_abstract(const PaperRecord& paper, Encoder& backend) {
    if (paper.abstract.empty())
        throw PreconditionError("embed_abstract: empty abstract for " + paper.id);
    return backend.encode(paper.abstract);
}

// Embeds every paper abstract in place; fan-out bounded by `concurrency`.
inline void embed_corpus(Corpus& corpus, Encoder& backend, size_t concurrency = 8) {
    corpus.embedding_dim = backend.dim();
    auto ids = corpus.ids();
    parallel_for(ids.size(), concurrency, [&](size_t i) {
        auto& rec = corpus.papers.at(ids[i]);
        rec.embedding = embed_abstract(rec, backend).values;
    });
}

}  // namespace surveyg
