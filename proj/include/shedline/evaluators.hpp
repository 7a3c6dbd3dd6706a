#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "shedline/clock.hpp"
#include "shedline/types.hpp"
#include "shedline/url.hpp"

namespace shedline {

/// FNV-1a, 64-bit. Chosen as the score hash because it is trivially
/// re-implementable anywhere, which makes cross-checking scores easy.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 14695981039346656037ull;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

/// Maps a 64-bit hash onto the [0, 5] score scale.
inline TrustScore hash_score(std::uint64_t h) {
    return TrustScore(TrustScore::kMax * std::ldexp(static_cast<double>(h), -64));
}

/// Computes a trust score for one URL. evaluate() charges the evaluation cost
/// to the clock; peek()/cost_of() are side-effect free and back the oracle.
class Evaluator {
public:
    virtual ~Evaluator() = default;

    TrustScore evaluate(const Url& url, Clock& clock) const {
        const Duration cost = cost_of(url);
        const TrustScore score = peek(url);
        clock.charge(cost);
        return score;
    }

    /// Score for the URL with no clock side effects.
    virtual TrustScore peek(const Url& url) const = 0;

    /// Cost that evaluate() would charge for the URL.
    virtual Duration cost_of(const Url& url) const = 0;

    /// Largest cost any single evaluation can charge.
    virtual Duration max_cost() const = 0;
};

/// Score is a pure function of the normalized URL text, identical across runs
/// and platforms; every evaluation charges the same configured cost.
class DeterministicHashEvaluator final : public Evaluator {
public:
    explicit DeterministicHashEvaluator(Duration per_item_cost) : cost_(per_item_cost) {
        if (cost_ < Duration::zero()) {
            throw std::invalid_argument("per_item_cost must be >= 0");
        }
    }

    TrustScore peek(const Url& url) const override { return hash_score(fnv1a64(url.str())); }
    Duration cost_of(const Url&) const override { return cost_; }
    Duration max_cost() const override { return cost_; }

private:
    Duration cost_;
};

/// Constant score, constant cost. Useful when only the cost model matters.
class FixedCostEvaluator final : public Evaluator {
public:
    FixedCostEvaluator(Duration per_item_cost, TrustScore score)
        : cost_(per_item_cost), score_(score) {
        if (cost_ < Duration::zero()) {
            throw std::invalid_argument("per_item_cost must be >= 0");
        }
    }

    TrustScore peek(const Url&) const override { return score_; }
    Duration cost_of(const Url&) const override { return cost_; }
    Duration max_cost() const override { return cost_; }

private:
    Duration cost_;
    TrustScore score_;
};

struct ScriptEntry {
    Url url;
    TrustScore score;
    Duration cost{0};
};

/// Plays back a fixed script of (url -> score, cost) pairs. Asking about a
/// URL outside the script is a misconfiguration and throws.
class ScriptedEvaluator final : public Evaluator {
public:
    explicit ScriptedEvaluator(const std::vector<ScriptEntry>& script) {
        Duration max{0};
        for (const auto& e : script) {
            if (e.cost < Duration::zero()) {
                throw std::invalid_argument("script cost must be >= 0");
            }
            entries_[e.url] = {e.score.value(), e.cost};
            max = std::max(max, e.cost);
        }
        max_cost_ = max;
    }

    TrustScore peek(const Url& url) const override { return TrustScore(find(url).score); }
    Duration cost_of(const Url& url) const override { return find(url).cost; }
    Duration max_cost() const override { return max_cost_; }

private:
    struct Entry {
        double score;
        Duration cost;
    };

    const Entry& find(const Url& url) const {
        const auto it = entries_.find(url);
        if (it == entries_.end()) {
            throw std::out_of_range("ScriptedEvaluator: no script entry for " + url.str());
        }
        return it->second;
    }

    std::unordered_map<Url, Entry> entries_;
    Duration max_cost_{0};
};

enum class EvaluatorKind { DeterministicHash, FixedCost, Scripted };

struct EvaluatorSpec {
    EvaluatorKind kind = EvaluatorKind::DeterministicHash;
    Duration per_item_cost{0};
    TrustScore fixed_score{2.5};
    std::vector<ScriptEntry> script;
};

inline std::unique_ptr<Evaluator> make_evaluator(const EvaluatorSpec& spec) {
    switch (spec.kind) {
        case EvaluatorKind::DeterministicHash:
            return std::make_unique<DeterministicHashEvaluator>(spec.per_item_cost);
        case EvaluatorKind::FixedCost:
            return std::make_unique<FixedCostEvaluator>(spec.per_item_cost, spec.fixed_score);
        case EvaluatorKind::Scripted:
            return std::make_unique<ScriptedEvaluator>(spec.script);
    }
    throw std::logic_error("make_evaluator: unknown kind");
}

/// Ground-truth scores for a set of items: every item evaluated with no
/// deadline and no clock side effects. The reference for accuracy metrics.
inline std::unordered_map<Url, TrustScore> oracle_scores(const Evaluator& evaluator,
                                                         const std::vector<WorkItem>& items) {
    std::unordered_map<Url, TrustScore> out;
    out.reserve(items.size());
    for (const auto& item : items) {
        out.insert_or_assign(item.url, evaluator.peek(item.url));
    }
    return out;
}

}  // namespace shedline
