#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "shedline/clock.hpp"
#include "shedline/evaluators.hpp"
#include "shedline/shedding_engine.hpp"
#include "shedline/trust_cache.hpp"
#include "shedline/types.hpp"
#include "shedline/workload.hpp"

namespace shedline {

/// Per-batch comparison measurements. Coverage fractions are counts / uload
/// and sum to 1 on non-empty batches; on an empty batch everything is 0 and
/// the deadline counts as met. trust_mae is the mean absolute error of the
/// assigned scores against the oracle.
struct Metrics {
    Duration response_time{0};
    bool deadline_met = true;
    double coverage_evaluated = 0.0;
    double coverage_cached = 0.0;
    double coverage_averaged = 0.0;
    double coverage_dropped = 0.0;
    double trust_mae = 0.0;
    double trust_mean = 0.0;

    bool operator==(const Metrics&) const = default;
};

/// max_eval_cost is the slack for the deadline verdict: an evaluation
/// admitted just under the deadline may finish past it, so a batch counts as
/// on time while elapsed <= effective_deadline + max_eval_cost.
inline Metrics compute_metrics(const BatchReport& report,
                               const std::unordered_map<Url, TrustScore>& oracle,
                               Duration effective_deadline, Duration max_eval_cost) {
    Metrics m;
    m.response_time = report.elapsed;
    m.deadline_met = report.elapsed <= effective_deadline + max_eval_cost;
    const auto n = static_cast<double>(report.items.size());
    if (report.items.empty()) return m;

    m.coverage_evaluated = static_cast<double>(report.counts.evaluated) / n;
    m.coverage_cached = static_cast<double>(report.counts.cache_hits) / n;
    m.coverage_averaged = static_cast<double>(report.counts.averaged) / n;
    m.coverage_dropped = static_cast<double>(report.counts.dropped) / n;

    double abs_err = 0.0;
    double sum = 0.0;
    for (const auto& item : report.items) {
        const auto it = oracle.find(item.url);
        if (it == oracle.end()) {
            throw std::out_of_range("compute_metrics: url missing from oracle: " + item.url.str());
        }
        abs_err += std::abs(item.score.value() - it->second.value());
        sum += item.score.value();
    }
    m.trust_mae = abs_err / n;
    m.trust_mean = sum / n;
    return m;
}

enum class EngineKind { Proposed, Full, RandomShed };

inline std::string_view engine_name(EngineKind e) {
    switch (e) {
        case EngineKind::Proposed: return "proposed";
        case EngineKind::Full: return "full";
        case EngineKind::RandomShed: return "random_shed";
    }
    return "?";
}

struct ComparisonRow {
    std::string batch_id;  // "0".."n-1", or "ALL" for the per-engine aggregate
    EngineKind engine = EngineKind::Proposed;
    std::int64_t uload = 0;
    std::string load_class;  // "-" on aggregate rows
    std::int64_t effective_deadline_us = 0;
    std::int64_t elapsed_us = 0;
    bool deadline_met = true;
    std::int64_t n_evaluated = 0;
    std::int64_t n_cached = 0;
    std::int64_t n_averaged = 0;
    std::int64_t n_dropped = 0;
    double trust_mae = 0.0;
    double trust_mean = 0.0;
    std::optional<double> speedup;
};

namespace detail {

inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace detail

/// Rows are grouped per engine in the order requested: one row per batch,
/// then one "ALL" aggregate row (sums for uload and counts, means for the
/// time and trust columns, deadline_met = all batches met). When both the
/// proposed and full engines ran, a speedup column is appended and populated
/// on the proposed rows as elapsed(full) / elapsed(proposed), with the
/// aggregate taken over mean elapsed times.
struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    bool has_speedup = false;

    void write_csv(std::ostream& out) const {
        out << "batch_id,engine,uload,load_class,effective_deadline_us,elapsed_us,deadline_met,"
               "n_evaluated,n_cached,n_averaged,n_dropped,trust_mae,trust_mean";
        if (has_speedup) out << ",speedup";
        out << '\n';
        for (const auto& r : rows) {
            out << r.batch_id << ',' << engine_name(r.engine) << ',' << r.uload << ','
                << r.load_class << ',' << r.effective_deadline_us << ',' << r.elapsed_us << ','
                << (r.deadline_met ? "true" : "false") << ',' << r.n_evaluated << ',' << r.n_cached
                << ',' << r.n_averaged << ',' << r.n_dropped << ',' << detail::fixed6(r.trust_mae)
                << ',' << detail::fixed6(r.trust_mean);
            if (has_speedup) {
                out << ',';
                if (r.speedup) out << detail::fixed6(*r.speedup);
            }
            out << '\n';
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json j;
            j["batch_id"] = r.batch_id;
            j["engine"] = std::string(engine_name(r.engine));
            j["uload"] = r.uload;
            j["load_class"] = r.load_class;
            j["effective_deadline_us"] = r.effective_deadline_us;
            j["elapsed_us"] = r.elapsed_us;
            j["deadline_met"] = r.deadline_met;
            j["n_evaluated"] = r.n_evaluated;
            j["n_cached"] = r.n_cached;
            j["n_averaged"] = r.n_averaged;
            j["n_dropped"] = r.n_dropped;
            j["trust_mae"] = r.trust_mae;
            j["trust_mean"] = r.trust_mean;
            if (r.speedup) j["speedup"] = *r.speedup;
            arr.push_back(std::move(j));
        }
        return arr;
    }
};

struct CompareOptions {
    std::uint64_t seed = 0;          // drives the random-shed engine
    double shed_fraction = 1.0;      // random-shed: fraction of overflow shed
    bool shared_cache = false;       // one cache across engines (cache studies)
    bool wall_clock = false;         // live timing instead of the virtual clock
};

namespace detail {

struct EngineRun {
    std::vector<BatchReport> reports;
    std::vector<Metrics> metrics;
};

inline EngineRun run_engine(EngineKind engine, const std::vector<std::vector<Url>>& workload,
                            const LoadParameters& params, const Evaluator& evaluator,
                            TrustCache& cache, const std::unordered_map<Url, TrustScore>& oracle,
                            const CompareOptions& options) {
    EngineRun run;
    std::unique_ptr<Clock> clock;
    if (options.wall_clock) {
        clock = std::make_unique<WallClock>();
    } else {
        clock = std::make_unique<VirtualClock>();
    }
    std::uint64_t batch_index = 0;
    for (const auto& batch : workload) {
        BatchReport report;
        switch (engine) {
            case EngineKind::Proposed:
                report = process_batch(batch, params, cache, evaluator, *clock);
                break;
            case EngineKind::Full:
                report = process_batch_full(batch, params, cache, evaluator, *clock);
                break;
            case EngineKind::RandomShed:
                report = process_batch_random_shed(batch, params, cache, evaluator, *clock,
                                                   splitmix64(options.seed ^ batch_index),
                                                   options.shed_fraction);
                break;
        }
        run.metrics.push_back(
            compute_metrics(report, oracle, report.effective_deadline, evaluator.max_cost()));
        run.reports.push_back(std::move(report));
        ++batch_index;
    }
    return run;
}

inline ComparisonRow batch_row(std::size_t batch, EngineKind engine, const BatchReport& report,
                               const Metrics& metrics) {
    ComparisonRow r;
    r.batch_id = std::to_string(batch);
    r.engine = engine;
    r.uload = report.uload;
    r.load_class = std::string(load_class_name(report.load_class));
    r.effective_deadline_us = report.effective_deadline.count();
    r.elapsed_us = report.elapsed.count();
    r.deadline_met = metrics.deadline_met;
    r.n_evaluated = report.counts.evaluated;
    r.n_cached = report.counts.cache_hits;
    r.n_averaged = report.counts.averaged;
    r.n_dropped = report.counts.dropped;
    r.trust_mae = metrics.trust_mae;
    r.trust_mean = metrics.trust_mean;
    return r;
}

inline ComparisonRow aggregate_row(EngineKind engine, const EngineRun& run) {
    ComparisonRow r;
    r.batch_id = "ALL";
    r.engine = engine;
    r.load_class = "-";
    const auto n = run.reports.size();
    if (n == 0) return r;
    double deadline_sum = 0.0;
    double elapsed_sum = 0.0;
    double mae_sum = 0.0;
    double mean_sum = 0.0;
    r.deadline_met = true;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& report = run.reports[i];
        const auto& metrics = run.metrics[i];
        r.uload += report.uload;
        r.n_evaluated += report.counts.evaluated;
        r.n_cached += report.counts.cache_hits;
        r.n_averaged += report.counts.averaged;
        r.n_dropped += report.counts.dropped;
        deadline_sum += static_cast<double>(report.effective_deadline.count());
        elapsed_sum += static_cast<double>(report.elapsed.count());
        mae_sum += metrics.trust_mae;
        mean_sum += metrics.trust_mean;
        r.deadline_met = r.deadline_met && metrics.deadline_met;
    }
    const auto dn = static_cast<double>(n);
    r.effective_deadline_us = std::llround(deadline_sum / dn);
    r.elapsed_us = std::llround(elapsed_sum / dn);
    r.trust_mae = mae_sum / dn;
    r.trust_mean = mean_sum / dn;
    return r;
}

inline double mean_elapsed(const EngineRun& run) {
    if (run.reports.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& report : run.reports) {
        sum += static_cast<double>(report.elapsed.count());
    }
    return sum / static_cast<double>(run.reports.size());
}

}  // namespace detail

/// Runs each requested engine over the same workload. Caches and clocks are
/// fresh per engine (unless shared_cache is set, in which case engines run in
/// order against one cache), so comparisons are not contaminated by another
/// engine's warm state.
inline ComparisonTable compare_engines(const std::vector<std::vector<Url>>& workload,
                                       const LoadParameters& params, const Evaluator& evaluator,
                                       const std::vector<EngineKind>& engines,
                                       const CompareOptions& options = {}) {
    params.validate();
    if (engines.empty()) throw std::invalid_argument("compare_engines: empty engine list");

    std::vector<WorkItem> all_items;
    for (const auto& batch : workload) {
        for (const auto& url : batch) {
            all_items.push_back(WorkItem{url, 0});
        }
    }
    const auto oracle = oracle_scores(evaluator, all_items);

    TrustCache shared;
    std::unordered_map<EngineKind, detail::EngineRun> runs;
    for (const auto engine : engines) {
        if (runs.contains(engine)) {
            throw std::invalid_argument("compare_engines: duplicate engine in list");
        }
        TrustCache isolated;
        TrustCache& cache = options.shared_cache ? shared : isolated;
        runs.emplace(engine,
                     detail::run_engine(engine, workload, params, evaluator, cache, oracle, options));
    }

    ComparisonTable table;
    const bool both = runs.contains(EngineKind::Proposed) && runs.contains(EngineKind::Full);
    table.has_speedup = both;
    for (const auto engine : engines) {
        const auto& run = runs.at(engine);
        for (std::size_t b = 0; b < run.reports.size(); ++b) {
            auto row = detail::batch_row(b, engine, run.reports[b], run.metrics[b]);
            if (both && engine == EngineKind::Proposed) {
                const auto& full = runs.at(EngineKind::Full);
                const double mine = static_cast<double>(run.reports[b].elapsed.count());
                const double theirs = static_cast<double>(full.reports[b].elapsed.count());
                if (mine > 0.0) row.speedup = theirs / mine;
            }
            table.rows.push_back(std::move(row));
        }
        auto agg = detail::aggregate_row(engine, run);
        if (both && engine == EngineKind::Proposed) {
            const double mine = detail::mean_elapsed(run);
            const double theirs = detail::mean_elapsed(runs.at(EngineKind::Full));
            if (mine > 0.0) agg.speedup = theirs / mine;
        }
        table.rows.push_back(std::move(agg));
    }
    return table;
}

}  // namespace shedline
