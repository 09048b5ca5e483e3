#pragma once
// Pluggable paper sources: an on-disk fixture directory (used by all tests)
// and an HTTP JSON API client.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "surveyg/common.hpp"
#include "surveyg/corpus_io.hpp"
#include "surveyg/paper.hpp"

namespace surveyg {

class PaperSource {
public:
    virtual ~PaperSource() = default;
    // Records in source-rank order, at most `limit`.
    virtual std::vector<PaperRecord> search(const std::string& keyword, int limit) = 0;
    virtual std::string descriptor() const = 0;
    long long skipped_malformed = 0;
};

// Directory of per-paper JSON files; rank order = lexicographic filename.
class FixtureSource : public PaperSource {
public:
    explicit FixtureSource(fs::path dir) : dir_(std::move(dir)) {
        if (!fs::exists(dir_))
            throw TransportError("fixture source directory missing: " + dir_.string());
        for (const auto& entry : fs::directory_iterator(dir_)) {
            if (entry.path().extension() == ".json" &&
                entry.path().filename() != "manifest.json")
                files_.push_back(entry.path());
        }
        std::sort(files_.begin(), files_.end());
    }

    std::vector<PaperRecord> search(const std::string&, int limit) override {
        std::vector<PaperRecord> out;
        for (const auto& path : files_) {
            if (static_cast<int>(out.size()) >= limit) break;
            try {
                std::ifstream in(path);
                PaperRecord rec = paper_from_json(nlohmann::json::parse(in));
                if (rec.id.empty()) rec.id = derive_paper_id(rec.title, rec.year);
                out.push_back(std::move(rec));
            } catch (const std::exception&) {
                ++skipped_malformed;
            }
        }
        return out;
    }

    std::string descriptor() const override { return "fixture:" + dir_.string(); }

private:
    fs::path dir_;
    std::vector<fs::path> files_;
};

}  // namespace surveyg
