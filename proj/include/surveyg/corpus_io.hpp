#pragma once
// On-disk corpus format: one JSON document per paper plus a manifest listing
// ids and the embedding dimension. Serialization is canonical (ordered keys,
// fixed layout) so saves are byte-stable.

#include <filesystem>
#include <fstream>
#include <string>

#include "surveyg/common.hpp"
#include "surveyg/paper.hpp"

#include <json.hpp>

namespace surveyg {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

inline ordered_json paper_to_json(const PaperRecord& p) {
    ordered_json j;
    j["id"] = p.id;
    j["title"] = p.title;
    j["authors"] = p.authors;
    j["year"] = p.year;
    j["abstract"] = p.abstract;
    if (p.body_ref) j["body_ref"] = *p.body_ref;
    j["citation_count"] = p.citation_count;
    j["cited_ids"] = p.cited_ids;
    j["paper_type"] = to_string(p.paper_type);
    if (p.summary) j["summary"] = *p.summary;
    if (p.embedding) j["embedding"] = *p.embedding;
    if (p.degraded) j["degraded"] = true;
    if (p.year_missing) j["year_missing"] = true;
    return j;
}

inline PaperRecord paper_from_json(const nlohmann::json& j) {
    PaperRecord p;
    p.id = j.at("id").get<std::string>();
    p.title = j.value("title", "");
    p.authors = j.value("authors", std::vector<std::string>{});
    p.year = j.value("year", 1900);
    p.abstract = j.value("abstract", "");
    if (j.contains("body_ref")) p.body_ref = j["body_ref"].get<std::string>();
    p.citation_count = j.value("citation_count", 0LL);
    if (j.contains("cited_ids"))
        for (const auto& c : j["cited_ids"]) p.cited_ids.insert(c.get<std::string>());
    p.cited_ids.erase(p.id);  // never self-cite
    p.paper_type = paper_type_from_string(j.value("paper_type", "other"));
    if (j.contains("summary")) p.summary = j["summary"].get<std::string>();
    if (j.contains("embedding")) p.embedding = j["embedding"].get<std::vector<double>>();
    p.degraded = j.value("degraded", false);
    p.year_missing = j.value("year_missing", false);
    return p;
}

inline void save_corpus(const Corpus& corpus, const fs::path& dir) {
    fs::create_directories(dir);
    ordered_json manifest;
    manifest["embedding_dim"] = corpus.embedding_dim;
    manifest["ids"] = corpus.ids();
    ordered_json prov;
    for (const auto& [id, src] : corpus.provenance) prov[id] = src;
    manifest["provenance"] = prov;
    {
        std::ofstream out(dir / "manifest.json");
        out << manifest.dump(2) << '\n';
    }
    for (const auto& [id, rec] : corpus.papers) {
        std::ofstream out(dir / (id + ".json"));
        out << paper_to_json(rec).dump(2) << '\n';
    }
}

inline Corpus load_corpus(const fs::path& dir) {
    fs::path manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path)) throw MissingInputError(manifest_path.string());
    std::ifstream in(manifest_path);
    nlohmann::json manifest = nlohmann::json::parse(in);
    Corpus corpus;
    corpus.embedding_dim = manifest.value("embedding_dim", 0);
    if (manifest.contains("provenance"))
        for (auto& [id, src] : manifest["provenance"].items())
            corpus.provenance[id] = src.get<std::string>();
    for (const auto& id : manifest.at("ids")) {
        fs::path p = dir / (id.get<std::string>() + ".json");
        if (!fs::exists(p))
            throw PreconditionError("corpus file listed in manifest missing: " +
                                    p.string());
        std::ifstream f(p);
        PaperRecord rec = paper_from_json(nlohmann::json::parse(f));
        corpus.papers[rec.id] = std::move(rec);
    }
    validate_corpus(corpus);
    return corpus;
}

}  // namespace surveyg
