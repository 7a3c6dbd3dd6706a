#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "shedline/evaluators.hpp"
#include "shedline/metrics.hpp"
#include "shedline/types.hpp"
#include "shedline/workload.hpp"

namespace shedline {

/// Invalid or inconsistent configuration; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Filesystem trouble (missing/unreadable/unwritable files); exit code 3.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class OutputFormat { Csv, Json };

/// One JSON document wires the whole harness: engine parameters, evaluator,
/// workload, engine list, and output. Keys are strict; anything unknown is an
/// error so typos cannot silently change an experiment.
struct HarnessConfig {
    LoadParameters params;
    EvaluatorSpec evaluator;
    WorkloadSpec workload;
    std::vector<EngineKind> engines;
    std::optional<std::filesystem::path> cache_path;  // used by the score command
    std::filesystem::path output_path;
    OutputFormat output_format = OutputFormat::Csv;
    double shed_fraction = 1.0;
    bool shared_cache = false;
    double calibration_safety_factor = 1.0;

    static HarnessConfig load(const std::filesystem::path& path);
    static HarnessConfig parse(const std::string& text);

    /// Non-fatal configuration smells, printed as warnings.
    std::vector<std::string> warnings() const {
        std::vector<std::string> out;
        Duration cost = evaluator.per_item_cost;
        if (evaluator.kind == EvaluatorKind::Scripted) {
            for (const auto& e : evaluator.script) cost = std::max(cost, e.cost);
        }
        const auto budget_floor = params.u_capacity * cost.count();
        if (params.deadline_overload.count() < budget_floor) {
            std::ostringstream msg;
            msg << "deadline_overload (" << params.deadline_overload.count()
                << " us) is below u_capacity x per_item_cost (" << budget_floor
                << " us); the drop queue gets no evaluation budget";
            out.push_back(msg.str());
        }
        return out;
    }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, const std::string& ctx, const std::set<std::string>& known) {
    for (const auto& [key, _] : obj.items()) {
        if (!known.contains(key)) {
            throw ConfigError("config: unknown key \"" + key + "\" in " + ctx);
        }
    }
}

inline const json& require(const json& obj, const std::string& ctx, const std::string& key) {
    if (!obj.contains(key)) {
        throw ConfigError("config: missing key \"" + key + "\" in " + ctx);
    }
    return obj.at(key);
}

inline std::int64_t get_int(const json& obj, const std::string& ctx, const std::string& key) {
    const auto& v = require(obj, ctx, key);
    if (!v.is_number_integer()) {
        throw ConfigError("config: " + ctx + "." + key + " must be an integer");
    }
    return v.get<std::int64_t>();
}

inline double get_num(const json& obj, const std::string& ctx, const std::string& key) {
    const auto& v = require(obj, ctx, key);
    if (!v.is_number()) throw ConfigError("config: " + ctx + "." + key + " must be a number");
    return v.get<double>();
}

inline std::string get_str(const json& obj, const std::string& ctx, const std::string& key) {
    const auto& v = require(obj, ctx, key);
    if (!v.is_string()) throw ConfigError("config: " + ctx + "." + key + " must be a string");
    return v.get<std::string>();
}

inline LoadParameters parse_params(const json& j) {
    if (!j.is_object()) throw ConfigError("config: params must be an object");
    check_keys(j, "params",
               {"u_capacity", "u_threshold", "deadline_normal_us", "deadline_overload_us",
                "extension_weight", "max_extension_factor", "default_trust"});
    LoadParameters p;
    p.u_capacity = get_int(j, "params", "u_capacity");
    p.u_threshold = get_int(j, "params", "u_threshold");
    p.deadline_normal = Duration{get_int(j, "params", "deadline_normal_us")};
    p.deadline_overload = Duration{get_int(j, "params", "deadline_overload_us")};
    p.extension_weight = get_num(j, "params", "extension_weight");
    p.max_extension_factor = get_num(j, "params", "max_extension_factor");
    const double trust = get_num(j, "params", "default_trust");
    if (!(trust >= TrustScore::kMin && trust <= TrustScore::kMax)) {
        throw ConfigError("config: params.default_trust must be in [0, 5]");
    }
    p.default_trust = TrustScore(trust);
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: params.") + e.what());
    }
    return p;
}

inline EvaluatorSpec parse_evaluator(const json& j) {
    if (!j.is_object()) throw ConfigError("config: evaluator must be an object");
    check_keys(j, "evaluator", {"kind", "per_item_cost_us", "fixed_score", "script"});
    EvaluatorSpec spec;
    const std::string kind = get_str(j, "evaluator", "kind");
    if (kind == "deterministic_hash") {
        spec.kind = EvaluatorKind::DeterministicHash;
    } else if (kind == "fixed_cost") {
        spec.kind = EvaluatorKind::FixedCost;
    } else if (kind == "scripted") {
        spec.kind = EvaluatorKind::Scripted;
    } else {
        throw ConfigError("config: evaluator.kind must be one of deterministic_hash, fixed_cost, "
                          "scripted (got \"" + kind + "\")");
    }
    if (spec.kind == EvaluatorKind::Scripted) {
        if (j.contains("per_item_cost_us") || j.contains("fixed_score")) {
            throw ConfigError("config: evaluator.per_item_cost_us/fixed_score do not apply to "
                              "the scripted kind");
        }
        const auto& script = require(j, "evaluator", "script");
        if (!script.is_array()) throw ConfigError("config: evaluator.script must be an array");
        for (const auto& entry : script) {
            if (!entry.is_object()) {
                throw ConfigError("config: evaluator.script entries must be objects");
            }
            check_keys(entry, "evaluator.script[]", {"url", "score", "cost_us"});
            const double score = get_num(entry, "evaluator.script[]", "score");
            if (!(score >= TrustScore::kMin && score <= TrustScore::kMax)) {
                throw ConfigError("config: evaluator.script[].score must be in [0, 5]");
            }
            spec.script.push_back(ScriptEntry{
                Url(get_str(entry, "evaluator.script[]", "url")), TrustScore(score),
                Duration{get_int(entry, "evaluator.script[]", "cost_us")}});
        }
        return spec;
    }
    if (j.contains("script")) {
        throw ConfigError("config: evaluator.script only applies to the scripted kind");
    }
    const std::int64_t cost = get_int(j, "evaluator", "per_item_cost_us");
    if (cost < 0) throw ConfigError("config: evaluator.per_item_cost_us must be >= 0");
    spec.per_item_cost = Duration{cost};
    if (spec.kind == EvaluatorKind::FixedCost) {
        if (j.contains("fixed_score")) {
            const double score = get_num(j, "evaluator", "fixed_score");
            if (!(score >= TrustScore::kMin && score <= TrustScore::kMax)) {
                throw ConfigError("config: evaluator.fixed_score must be in [0, 5]");
            }
            spec.fixed_score = TrustScore(score);
        }
    } else if (j.contains("fixed_score")) {
        throw ConfigError("config: evaluator.fixed_score only applies to the fixed_cost kind");
    }
    return spec;
}

inline WorkloadSpec parse_workload(const json& j) {
    if (!j.is_object()) throw ConfigError("config: workload must be an object");
    check_keys(j, "workload",
               {"n_batches", "batch_size_choices", "url_universe", "zipf_exponent", "seed"});
    WorkloadSpec spec;
    spec.n_batches = get_int(j, "workload", "n_batches");
    const auto& sizes = require(j, "workload", "batch_size_choices");
    if (!sizes.is_array()) {
        throw ConfigError("config: workload.batch_size_choices must be an array");
    }
    for (const auto& s : sizes) {
        if (!s.is_number_integer()) {
            throw ConfigError("config: workload.batch_size_choices entries must be integers");
        }
        spec.batch_size_choices.push_back(s.get<std::int64_t>());
    }
    spec.url_universe = get_int(j, "workload", "url_universe");
    spec.zipf_exponent = get_num(j, "workload", "zipf_exponent");
    const std::int64_t seed = get_int(j, "workload", "seed");
    spec.seed = static_cast<std::uint64_t>(seed);
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: workload.") + e.what());
    }
    return spec;
}

inline std::vector<EngineKind> parse_engines(const json& j) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError("config: engines must be a non-empty array");
    }
    std::vector<EngineKind> engines;
    for (const auto& e : j) {
        if (!e.is_string()) throw ConfigError("config: engines entries must be strings");
        const auto name = e.get<std::string>();
        EngineKind kind;
        if (name == "proposed") {
            kind = EngineKind::Proposed;
        } else if (name == "full") {
            kind = EngineKind::Full;
        } else if (name == "random_shed") {
            kind = EngineKind::RandomShed;
        } else {
            throw ConfigError("config: engines: unknown engine \"" + name + "\"");
        }
        for (const auto existing : engines) {
            if (existing == kind) {
                throw ConfigError("config: engines: duplicate engine \"" + name + "\"");
            }
        }
        engines.push_back(kind);
    }
    return engines;
}

}  // namespace detail

inline HarnessConfig HarnessConfig::parse(const std::string& text) {
    namespace d = detail;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    d::check_keys(j, "top level",
                  {"params", "evaluator", "workload", "engines", "cache_path", "output_path",
                   "output_format", "shed_fraction", "shared_cache", "calibration_safety_factor"});

    HarnessConfig cfg;
    cfg.params = d::parse_params(d::require(j, "top level", "params"));
    cfg.evaluator = d::parse_evaluator(d::require(j, "top level", "evaluator"));
    cfg.workload = d::parse_workload(d::require(j, "top level", "workload"));
    cfg.engines = d::parse_engines(d::require(j, "top level", "engines"));
    if (j.contains("cache_path")) {
        cfg.cache_path = std::filesystem::path(d::get_str(j, "top level", "cache_path"));
    }
    cfg.output_path = std::filesystem::path(d::get_str(j, "top level", "output_path"));
    const std::string format = d::get_str(j, "top level", "output_format");
    if (format == "csv") {
        cfg.output_format = OutputFormat::Csv;
    } else if (format == "json") {
        cfg.output_format = OutputFormat::Json;
    } else {
        throw ConfigError("config: output_format must be \"csv\" or \"json\"");
    }
    if (j.contains("shed_fraction")) {
        cfg.shed_fraction = d::get_num(j, "top level", "shed_fraction");
        if (!(cfg.shed_fraction >= 0.0 && cfg.shed_fraction <= 1.0)) {
            throw ConfigError("config: shed_fraction must be in [0, 1]");
        }
    }
    if (j.contains("shared_cache")) {
        const auto& v = j.at("shared_cache");
        if (!v.is_boolean()) throw ConfigError("config: shared_cache must be a boolean");
        cfg.shared_cache = v.get<bool>();
    }
    if (j.contains("calibration_safety_factor")) {
        cfg.calibration_safety_factor = d::get_num(j, "top level", "calibration_safety_factor");
        if (!(cfg.calibration_safety_factor > 0.0 && cfg.calibration_safety_factor <= 1.0)) {
            throw ConfigError("config: calibration_safety_factor must be in (0, 1]");
        }
    }
    return cfg;
}

inline HarnessConfig HarnessConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

}  // namespace shedline
