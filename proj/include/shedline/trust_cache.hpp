#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "shedline/clock.hpp"
#include "shedline/types.hpp"
#include "shedline/url.hpp"

namespace shedline {

struct TrustCacheEntry {
    Url url;
    TrustScore score;
    Instant evaluated_at;

    bool operator==(const TrustCacheEntry&) const = default;
};

/// Persistent URL -> trust score store, consulted before evaluation and
/// updated after it. At most one entry per normalized URL; inserts are
/// last-writer-wins. Lookups may run concurrently; writes are serialized.
///
/// On disk: UTF-8 JSON lines, one object per entry with exactly the keys
/// {"url", "trust", "evaluated_at"}. Unknown keys are rejected so format
/// drift fails loudly.
class TrustCache {
public:
    TrustCache() = default;

    TrustCache(const TrustCache& other) {
        std::shared_lock lk(other.mutex_);
        entries_ = other.entries_;
    }
    TrustCache(TrustCache&& other) noexcept {
        std::unique_lock lk(other.mutex_);
        entries_ = std::move(other.entries_);
    }
    TrustCache& operator=(const TrustCache& other) {
        if (this != &other) {
            std::shared_lock lo(other.mutex_);
            std::unordered_map<std::string, Stored> copy = other.entries_;
            lo.unlock();
            std::unique_lock lk(mutex_);
            entries_ = std::move(copy);
        }
        return *this;
    }

    std::optional<TrustScore> lookup(const Url& url) const {
        std::shared_lock lk(mutex_);
        const auto it = entries_.find(url.str());
        if (it == entries_.end()) return std::nullopt;
        return TrustScore(it->second.trust);
    }

    void insert(const Url& url, TrustScore score, Instant evaluated_at) {
        std::unique_lock lk(mutex_);
        entries_[url.str()] = Stored{score.value(), evaluated_at.microseconds};
    }

    std::size_t size() const {
        std::shared_lock lk(mutex_);
        return entries_.size();
    }

    bool empty() const { return size() == 0; }

    /// Entries sorted by URL.
    std::vector<TrustCacheEntry> snapshot() const {
        std::vector<std::pair<std::string, Stored>> flat;
        {
            std::shared_lock lk(mutex_);
            flat.assign(entries_.begin(), entries_.end());
        }
        std::sort(flat.begin(), flat.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<TrustCacheEntry> out;
        out.reserve(flat.size());
        for (const auto& [url, stored] : flat) {
            out.push_back({Url(url), TrustScore(stored.trust), Instant{stored.evaluated_at_us}});
        }
        return out;
    }

    /// Writes one JSON object per entry, sorted by URL so identical caches
    /// serialize byte-identically. Returns the number of records written.
    std::size_t save(const std::filesystem::path& path) const {
        const auto entries = snapshot();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("TrustCache::save: cannot open " + path.string());
        }
        for (const auto& e : entries) {
            nlohmann::json j;
            j["url"] = e.url.str();
            j["trust"] = e.score.value();
            j["evaluated_at"] = e.evaluated_at.microseconds;
            out << j.dump() << '\n';
        }
        out.flush();
        if (!out) {
            throw std::runtime_error("TrustCache::save: write failed for " + path.string());
        }
        return entries.size();
    }

    /// Reads a JSON-lines file produced by save(). A missing file yields an
    /// empty cache when create_if_missing is set, an error otherwise.
    /// Malformed lines and out-of-range scores report the 1-based line number.
    static TrustCache load(const std::filesystem::path& path, bool create_if_missing = false) {
        TrustCache cache;
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            if (create_if_missing && !std::filesystem::exists(path)) return cache;
            throw std::runtime_error("TrustCache::load: cannot open " + path.string());
        }
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            cache.insert_parsed(parse_line(path, line_no, line));
        }
        return cache;
    }

private:
    struct Stored {
        double trust = 0.0;
        std::int64_t evaluated_at_us = 0;
    };

    static TrustCacheEntry parse_line(const std::filesystem::path& path, std::size_t line_no,
                                      const std::string& line) {
        const auto fail = [&](const std::string& what) -> std::runtime_error {
            return std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + what);
        };
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw fail(std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object()) throw fail("expected a JSON object");
        for (const auto& [key, _] : j.items()) {
            if (key != "url" && key != "trust" && key != "evaluated_at") {
                throw fail("unknown key \"" + key + "\"");
            }
        }
        if (!j.contains("url") || !j["url"].is_string()) throw fail("missing string key \"url\"");
        if (!j.contains("trust") || !j["trust"].is_number()) {
            throw fail("missing numeric key \"trust\"");
        }
        if (!j.contains("evaluated_at") || !j["evaluated_at"].is_number_integer()) {
            throw fail("missing integer key \"evaluated_at\"");
        }
        const double trust = j["trust"].get<double>();
        if (!(trust >= TrustScore::kMin && trust <= TrustScore::kMax)) {
            throw fail("trust " + std::to_string(trust) + " outside [0, 5]");
        }
        const std::int64_t at = j["evaluated_at"].get<std::int64_t>();
        if (at < 0) throw fail("evaluated_at must be >= 0");
        try {
            return TrustCacheEntry{Url(j["url"].get<std::string>()), TrustScore(trust), Instant{at}};
        } catch (const std::invalid_argument& e) {
            throw fail(e.what());
        }
    }

    void insert_parsed(const TrustCacheEntry& e) { insert(e.url, e.score, e.evaluated_at); }

    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, Stored> entries_;
};

}  // namespace shedline
