#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "shedline/clock.hpp"
#include "shedline/url.hpp"

namespace shedline {

/// Trust scores live on a fixed [0, 5] scale. The bounds are defined here and
/// nowhere else; construction rejects anything outside the scale (and NaN).
class TrustScore {
public:
    static constexpr double kMin = 0.0;
    static constexpr double kMax = 5.0;

    explicit TrustScore(double value) : value_(value) {
        if (!(value >= kMin && value <= kMax)) {
            throw std::out_of_range("TrustScore: " + std::to_string(value) + " outside [" +
                                    std::to_string(kMin) + ", " + std::to_string(kMax) + "]");
        }
    }

    static TrustScore clamped(double value) {
        return TrustScore(std::clamp(value, kMin, kMax));
    }

    double value() const { return value_; }

    bool operator==(const TrustScore&) const = default;
    auto operator<=>(const TrustScore&) const = default;

private:
    double value_;
};

enum class LoadClass { Normal, Heavy, VeryHeavy };

inline std::string_view load_class_name(LoadClass c) {
    switch (c) {
        case LoadClass::Normal: return "Normal";
        case LoadClass::Heavy: return "Heavy";
        case LoadClass::VeryHeavy: return "VeryHeavy";
    }
    return "?";
}

/// Tunables of the shedding engine.
///
/// u_capacity: items fully evaluable within deadline_normal.
/// u_threshold: items beyond u_capacity tolerable within deadline_overload
///              before the very-heavy regime kicks in.
/// extension_weight / max_extension_factor: control how far the overload
///              deadline stretches under very heavy load (see extend_deadline).
/// default_trust: fallback score when averaging over an empty set.
struct LoadParameters {
    std::int64_t u_capacity = 1;
    std::int64_t u_threshold = 0;
    Duration deadline_normal{0};
    Duration deadline_overload{0};
    double extension_weight = 0.0;
    double max_extension_factor = 1.0;
    TrustScore default_trust{2.5};

    void validate() const {
        if (u_capacity < 1) throw std::invalid_argument("u_capacity must be >= 1");
        if (u_threshold < 0) throw std::invalid_argument("u_threshold must be >= 0");
        if (deadline_normal < Duration::zero()) {
            throw std::invalid_argument("deadline_normal must be >= 0");
        }
        if (deadline_overload < deadline_normal) {
            throw std::invalid_argument("deadline_overload must be >= deadline_normal");
        }
        if (!(extension_weight >= 0.0)) {
            throw std::invalid_argument("extension_weight must be >= 0");
        }
        if (!(max_extension_factor >= 1.0)) {
            throw std::invalid_argument("max_extension_factor must be >= 1");
        }
    }
};

/// One URL entering the system; arrival_index is its position in the batch.
struct WorkItem {
    Url url;
    std::int64_t arrival_index = 0;

    bool operator==(const WorkItem&) const = default;
};

/// How an item got its score. Dropped is produced only by the random-shed
/// baseline, never by the proposed engine.
enum class Provenance { Evaluated, CacheHit, Averaged, Dropped };

inline std::string_view provenance_name(Provenance p) {
    switch (p) {
        case Provenance::Evaluated: return "Evaluated";
        case Provenance::CacheHit: return "CacheHit";
        case Provenance::Averaged: return "Averaged";
        case Provenance::Dropped: return "Dropped";
    }
    return "?";
}

struct ScoredItem {
    Url url;
    std::int64_t arrival_index;
    TrustScore score;
    Provenance provenance;
    Instant scored_at;

    bool operator==(const ScoredItem&) const = default;
};

struct ProvenanceCounts {
    std::int64_t evaluated = 0;
    std::int64_t cache_hits = 0;
    std::int64_t averaged = 0;
    std::int64_t dropped = 0;

    std::int64_t total() const { return evaluated + cache_hits + averaged + dropped; }

    std::int64_t of(Provenance p) const {
        switch (p) {
            case Provenance::Evaluated: return evaluated;
            case Provenance::CacheHit: return cache_hits;
            case Provenance::Averaged: return averaged;
            case Provenance::Dropped: return dropped;
        }
        return 0;
    }

    std::int64_t& slot(Provenance p) {
        switch (p) {
            case Provenance::Evaluated: return evaluated;
            case Provenance::CacheHit: return cache_hits;
            case Provenance::Averaged: return averaged;
            case Provenance::Dropped: return dropped;
        }
        return evaluated;
    }

    bool operator==(const ProvenanceCounts&) const = default;
};

/// Complete outcome of one batch. items is ordered by arrival_index and
/// covers every input URL exactly once; elapsed is the clock time consumed
/// between batch start and the last score assigned.
struct BatchReport {
    std::vector<ScoredItem> items;
    std::int64_t uload = 0;
    LoadClass load_class = LoadClass::Normal;
    Duration effective_deadline{0};
    Duration elapsed{0};
    ProvenanceCounts counts;

    bool operator==(const BatchReport&) const = default;
};

}  // namespace shedline
