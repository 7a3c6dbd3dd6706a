#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "shedline/clock.hpp"
#include "shedline/evaluators.hpp"
#include "shedline/load_monitor.hpp"
#include "shedline/trust_cache.hpp"
#include "shedline/types.hpp"

namespace shedline {

/// Arrival-ordered split of a batch at the u_capacity boundary.
struct QueuePair {
    std::vector<WorkItem> normal_queue;
    std::vector<WorkItem> drop_queue;
};

inline std::vector<WorkItem> make_work_items(const std::vector<Url>& urls) {
    std::vector<WorkItem> items;
    items.reserve(urls.size());
    std::int64_t index = 0;
    for (const auto& url : urls) {
        items.push_back(WorkItem{url, index++});
    }
    return items;
}

/// First min(n, u_capacity) items go to the normal queue, the rest to the
/// drop queue. No reordering, no loss, no duplication.
inline QueuePair partition(const std::vector<WorkItem>& items, std::int64_t u_capacity) {
    const std::size_t cut =
        std::min(items.size(), static_cast<std::size_t>(std::max<std::int64_t>(u_capacity, 0)));
    QueuePair q;
    q.normal_queue.assign(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(cut));
    q.drop_queue.assign(items.begin() + static_cast<std::ptrdiff_t>(cut), items.end());
    return q;
}

/// Arithmetic mean of the assigned scores, or default_trust when none exist.
/// The clamp is a safety net; a mean of in-range scores is already in range.
inline TrustScore average_trust(const std::vector<TrustScore>& assigned, TrustScore default_trust) {
    if (assigned.empty()) return default_trust;
    double sum = 0.0;
    for (const auto& s : assigned) sum += s.value();
    return TrustScore::clamped(sum / static_cast<double>(assigned.size()));
}

/// Scores every queued item: cache hits are assigned at zero cost, misses are
/// evaluated (cost charged to the clock) and written back to the cache.
inline std::vector<ScoredItem> run_normal(const std::vector<WorkItem>& queue, TrustCache& cache,
                                          const Evaluator& evaluator, Clock& clock) {
    std::vector<ScoredItem> out;
    out.reserve(queue.size());
    for (const auto& item : queue) {
        if (const auto cached = cache.lookup(item.url)) {
            out.push_back({item.url, item.arrival_index, *cached, Provenance::CacheHit, clock.now()});
        } else {
            const TrustScore score = evaluator.evaluate(item.url, clock);
            const Instant at = clock.now();
            cache.insert(item.url, score, at);
            out.push_back({item.url, item.arrival_index, score, Provenance::Evaluated, at});
        }
    }
    return out;
}

namespace detail {

inline std::vector<ScoredItem> collect_slots(std::vector<std::optional<ScoredItem>>&& slots) {
    std::vector<ScoredItem> items;
    items.reserve(slots.size());
    for (auto& slot : slots) {
        assert(slot.has_value());
        items.push_back(std::move(*slot));
    }
    return items;
}

inline BatchReport assemble_report(std::vector<ScoredItem> items, LoadClass load_class,
                                   Duration effective_deadline, Duration elapsed) {
    BatchReport report;
    report.uload = static_cast<std::int64_t>(items.size());
    report.load_class = load_class;
    report.effective_deadline = effective_deadline;
    report.elapsed = elapsed;
    for (const auto& item : items) {
        ++report.counts.slot(item.provenance);
    }
    report.items = std::move(items);
    return report;
}

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Deadline-bounded processing of a partitioned batch. The deadline is
/// measured from the clock's time on entry.
///
/// Order of work:
///   1. The normal queue runs unconditionally (no deadline checks).
///   2. Drop-queue cache pass: every cached URL is assigned at zero cost.
///   3. Drop-queue evaluation: items are admitted one at a time while the
///      elapsed time is still under the deadline; the check happens before
///      each evaluation starts, so one admitted evaluation may finish past it.
///   4. Whatever remains gets the mean of all scores assigned so far in this
///      batch (fallback: default_trust), at zero cost, and is written back to
///      the cache so an identical re-run is pure cache hits.
///
/// Results come back in arrival order.
inline std::vector<ScoredItem> run_heavy(const QueuePair& queues, const LoadParameters& params,
                                         TrustCache& cache, const Evaluator& evaluator, Clock& clock,
                                         Duration effective_deadline) {
    const Instant start = clock.now();
    const std::size_t total = queues.normal_queue.size() + queues.drop_queue.size();
    std::vector<std::optional<ScoredItem>> slots(total);
    std::vector<TrustScore> assigned;
    assigned.reserve(total);

    for (auto& item : run_normal(queues.normal_queue, cache, evaluator, clock)) {
        assigned.push_back(item.score);
        const auto idx = static_cast<std::size_t>(item.arrival_index);
        slots[idx] = std::move(item);
    }

    std::vector<WorkItem> remaining;
    remaining.reserve(queues.drop_queue.size());
    for (const auto& item : queues.drop_queue) {
        if (const auto cached = cache.lookup(item.url)) {
            assigned.push_back(*cached);
            slots[static_cast<std::size_t>(item.arrival_index)] =
                ScoredItem{item.url, item.arrival_index, *cached, Provenance::CacheHit, clock.now()};
        } else {
            remaining.push_back(item);
        }
    }

    std::size_t next = 0;
    while (next < remaining.size() && clock.now() - start < effective_deadline) {
        const WorkItem& item = remaining[next++];
        const TrustScore score = evaluator.evaluate(item.url, clock);
        const Instant at = clock.now();
        cache.insert(item.url, score, at);
        assigned.push_back(score);
        slots[static_cast<std::size_t>(item.arrival_index)] =
            ScoredItem{item.url, item.arrival_index, score, Provenance::Evaluated, at};
    }

    if (next < remaining.size()) {
        const TrustScore fallback = average_trust(assigned, params.default_trust);
        const Instant at = clock.now();
        for (; next < remaining.size(); ++next) {
            const WorkItem& item = remaining[next];
            cache.insert(item.url, fallback, at);
            slots[static_cast<std::size_t>(item.arrival_index)] =
                ScoredItem{item.url, item.arrival_index, fallback, Provenance::Averaged, at};
        }
    }

    return detail::collect_slots(std::move(slots));
}

struct DeadlineRun {
    std::vector<ScoredItem> items;
    Duration effective_deadline{0};
};

/// Very-heavy handling: stretch the deadline, then proceed exactly as the
/// heavy regime with the stretched value.
inline DeadlineRun run_very_heavy(const std::vector<WorkItem>& items, const LoadParameters& params,
                                  TrustCache& cache, const Evaluator& evaluator, Clock& clock) {
    const Duration effective = extend_deadline(static_cast<std::int64_t>(items.size()), params);
    auto scored =
        run_heavy(partition(items, params.u_capacity), params, cache, evaluator, clock, effective);
    return {std::move(scored), effective};
}

/// The proposed engine: classify the batch, dispatch to the matching regime,
/// and report. Every input URL is scored; nothing is dropped.
inline BatchReport process_batch(const std::vector<Url>& urls, const LoadParameters& params,
                                 TrustCache& cache, const Evaluator& evaluator, Clock& clock) {
    params.validate();
    const auto items = make_work_items(urls);
    const auto uload = static_cast<std::int64_t>(items.size());
    const LoadClass load_class = classify_load(uload, params);
    const Instant start = clock.now();

    std::vector<ScoredItem> scored;
    Duration effective{0};
    switch (load_class) {
        case LoadClass::Normal:
            effective = params.deadline_normal;
            scored = run_normal(items, cache, evaluator, clock);
            break;
        case LoadClass::Heavy:
            effective = params.deadline_overload;
            scored = run_heavy(partition(items, params.u_capacity), params, cache, evaluator, clock,
                               effective);
            break;
        case LoadClass::VeryHeavy: {
            auto run = run_very_heavy(items, params, cache, evaluator, clock);
            scored = std::move(run.items);
            effective = run.effective_deadline;
            break;
        }
    }
    return detail::assemble_report(std::move(scored), load_class, effective, clock.now() - start);
}

/// No-shedding baseline: every item is evaluated (cache still consulted),
/// all deadlines ignored. Response time grows linearly with the batch.
inline BatchReport process_batch_full(const std::vector<Url>& urls, const LoadParameters& params,
                                      TrustCache& cache, const Evaluator& evaluator, Clock& clock) {
    params.validate();
    const auto items = make_work_items(urls);
    const auto uload = static_cast<std::int64_t>(items.size());
    const Instant start = clock.now();
    auto scored = run_normal(items, cache, evaluator, clock);
    return detail::assemble_report(std::move(scored), classify_load(uload, params),
                                   effective_deadline_for(uload, params), clock.now() - start);
}

/// Random-shed baseline: the first u_capacity + u_threshold items are
/// processed normally; of the overflow, a seed-selected fraction
/// (shed_fraction, default all of it) is tagged Dropped with default_trust at
/// zero cost and never evaluated. Deterministic for a given seed.
inline BatchReport process_batch_random_shed(const std::vector<Url>& urls,
                                             const LoadParameters& params, TrustCache& cache,
                                             const Evaluator& evaluator, Clock& clock,
                                             std::uint64_t rng_seed, double shed_fraction = 1.0) {
    params.validate();
    if (!(shed_fraction >= 0.0 && shed_fraction <= 1.0)) {
        throw std::invalid_argument("shed_fraction must be in [0, 1]");
    }
    const auto items = make_work_items(urls);
    const auto uload = static_cast<std::int64_t>(items.size());
    const LoadClass load_class = classify_load(uload, params);
    const Instant start = clock.now();

    const std::size_t head =
        std::min(items.size(), static_cast<std::size_t>(params.u_capacity + params.u_threshold));
    const std::size_t overflow = items.size() - head;
    std::size_t to_shed = static_cast<std::size_t>(
        std::llround(shed_fraction * static_cast<double>(overflow)));
    to_shed = std::min(to_shed, overflow);

    // Selection sampling over the overflow: each item is shed with
    // probability (still needed) / (still remaining).
    std::vector<bool> shed(items.size(), false);
    std::mt19937_64 rng(rng_seed);
    std::size_t needed = to_shed;
    for (std::size_t i = 0; i < overflow && needed > 0; ++i) {
        const std::size_t left = overflow - i;
        if (detail::uniform01(rng) * static_cast<double>(left) < static_cast<double>(needed)) {
            shed[head + i] = true;
            --needed;
        }
    }

    std::vector<WorkItem> to_process;
    to_process.reserve(items.size() - to_shed);
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!shed[i]) to_process.push_back(items[i]);
    }

    std::vector<std::optional<ScoredItem>> slots(items.size());
    for (auto& item : run_normal(to_process, cache, evaluator, clock)) {
        const auto idx = static_cast<std::size_t>(item.arrival_index);
        slots[idx] = std::move(item);
    }
    const Instant at = clock.now();
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (shed[i]) {
            slots[i] = ScoredItem{items[i].url, items[i].arrival_index, params.default_trust,
                                  Provenance::Dropped, at};
        }
    }

    return detail::assemble_report(detail::collect_slots(std::move(slots)), load_class,
                                   effective_deadline_for(uload, params), clock.now() - start);
}

}  // namespace shedline
