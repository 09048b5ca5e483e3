#pragma once
// Shared plumbing: error types, deterministic hashing, RNG, string helpers,
// and a bounded-concurrency map used by the fan-out stages.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace surveyg {

// ---------------------------------------------------------------- errors

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller violated a documented precondition.
struct PreconditionError : Error {
    using Error::Error;
};

// A remote backend failed after retries; carries the attempt count.
struct TransportError : Error {
    int attempts = 1;
    TransportError(const std::string& msg, int attempts_ = 1)
        : Error(msg), attempts(attempts_) {}
};

// A required input file from an earlier stage is absent.
struct MissingInputError : Error {
    std::string path;
    explicit MissingInputError(std::string path_)
        : Error("missing prerequisite: " + path_), path(std::move(path_)) {}
};

// Bad configuration (dimension mismatch, out-of-range field, ...).
struct ConfigError : Error {
    std::string field;
    ConfigError(const std::string& msg, std::string field_ = {})
        : Error(msg), field(std::move(field_)) {}
};

// Structured output failed validation (outline schema, dangling ids, ...).
struct ValidationError : Error {
    std::vector<std::string> details;
    explicit ValidationError(const std::string& msg,
                             std::vector<std::string> details_ = {})
        : Error(msg), details(std::move(details_)) {}
};

// ---------------------------------------------------------------- hashing

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string content_hash(std::string_view s) { return hex64(fnv1a64(s)); }

// splitmix64: tiny, seedable, stable across platforms.
struct SplitMix64 {
    uint64_t state;
    explicit SplitMix64(uint64_t seed) : state(seed) {}
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [0, 1)
    double next_unit() { return (next() >> 11) * 0x1.0p-53; }
    // uniform in [0, n)
    uint64_t next_below(uint64_t n) { return n == 0 ? 0 : next() % n; }
};

// ---------------------------------------------------------------- strings

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

inline std::string trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> tokenize_words(std::string_view text) {
    std::vector<std::string> words;
    std::string cur;
    for (char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        } else if (!cur.empty()) {
            words.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(cur);
    return words;
}

inline bool contains_word(std::string_view haystack, std::string_view needle) {
    auto words = tokenize_words(haystack);
    return std::find(words.begin(), words.end(), std::string(needle)) != words.end();
}

// ------------------------------------------------------------ concurrency

// Runs fn(i) for i in [0, n) with at most `bound` worker threads.
// Each index owns its output slot, so results are deterministic regardless
// of scheduling.
template <typename Fn>
void parallel_for(size_t n, size_t bound, Fn&& fn) {
    if (n == 0) return;
    size_t workers = std::min(std::max<size_t>(bound, 1), n);
    if (workers == 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    std::atomic<size_t> next{0};
    threads.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace surveyg
