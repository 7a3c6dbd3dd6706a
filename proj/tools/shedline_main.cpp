// Command-line harness: runs engine comparisons over synthetic workloads,
// calibrates capacity from measured evaluator cost, and scores URL lists
// against a persistent trust cache.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>

#include "shedline/shedline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct CommonFlags {
    std::string config_path;
    std::optional<std::string> output;
    std::optional<std::string> format;
    bool wall_clock = false;
};

std::unique_ptr<shedline::Clock> make_clock(bool wall_clock) {
    if (wall_clock) return std::make_unique<shedline::WallClock>();
    return std::make_unique<shedline::VirtualClock>();
}

void print_warnings(const shedline::HarnessConfig& cfg) {
    for (const auto& w : cfg.warnings()) {
        std::cerr << "warning: " << w << '\n';
    }
}

std::uint64_t apply_seed_override(std::uint64_t seed) {
    const char* env = std::getenv("SHEDLINE_SEED");
    if (env == nullptr || *env == '\0') return seed;
    char* end = nullptr;
    const unsigned long long parsed = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
        throw shedline::ConfigError(std::string("SHEDLINE_SEED: not a valid integer: \"") + env +
                                    "\"");
    }
    return static_cast<std::uint64_t>(parsed);
}

shedline::OutputFormat resolve_format(const shedline::HarnessConfig& cfg,
                                      const std::optional<std::string>& flag) {
    if (!flag) return cfg.output_format;
    if (*flag == "csv") return shedline::OutputFormat::Csv;
    if (*flag == "json") return shedline::OutputFormat::Json;
    throw shedline::ConfigError("--format must be \"csv\" or \"json\"");
}

int cmd_run(const CommonFlags& flags) {
    auto cfg = shedline::HarnessConfig::load(flags.config_path);
    print_warnings(cfg);
    cfg.workload.seed = apply_seed_override(cfg.workload.seed);

    const auto workload = shedline::generate_workload(cfg.workload);
    const auto evaluator = shedline::make_evaluator(cfg.evaluator);

    shedline::CompareOptions options;
    options.seed = cfg.workload.seed;
    options.shed_fraction = cfg.shed_fraction;
    options.shared_cache = cfg.shared_cache;
    options.wall_clock = flags.wall_clock;
    const auto table =
        shedline::compare_engines(workload, cfg.params, *evaluator, cfg.engines, options);

    const std::filesystem::path out_path =
        flags.output ? std::filesystem::path(*flags.output) : cfg.output_path;
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw shedline::IoError("cannot open output file: " + out_path.string());
    if (resolve_format(cfg, flags.format) == shedline::OutputFormat::Csv) {
        table.write_csv(out);
    } else {
        out << table.to_json().dump(2) << '\n';
    }
    out.flush();
    if (!out) throw shedline::IoError("write failed for output file: " + out_path.string());
    return kExitOk;
}

int cmd_calibrate(const CommonFlags& flags, std::int64_t samples) {
    auto cfg = shedline::HarnessConfig::load(flags.config_path);
    print_warnings(cfg);
    if (samples < 1) {
        throw shedline::ConfigError("--samples must be >= 1");
    }
    if (cfg.params.deadline_normal <= shedline::Duration::zero()) {
        throw shedline::ConfigError("config: params.deadline_normal_us must be > 0 to calibrate");
    }
    const auto evaluator = shedline::make_evaluator(cfg.evaluator);
    const auto clock = make_clock(flags.wall_clock);

    const shedline::Instant start = clock->now();
    for (std::int64_t i = 0; i < samples; ++i) {
        evaluator->evaluate(shedline::Url("http://calibration" + std::to_string(i) + ".example"),
                            *clock);
    }
    const shedline::Duration total = clock->now() - start;
    const shedline::Duration mean{total.count() / samples};
    if (mean <= shedline::Duration::zero()) {
        std::cerr << "warning: measured per-item cost is 0 us; capacity is effectively unbounded\n";
        std::cout << shedline::kMaxCapacitySentinel << '\n';
        return kExitOk;
    }
    const shedline::CalibrationSample sample{mean, samples};
    std::cout << shedline::calibrate_capacity(sample, cfg.params.deadline_normal,
                                              cfg.calibration_safety_factor)
              << '\n';
    return kExitOk;
}

int cmd_score(const CommonFlags& flags, const std::string& urls_path) {
    auto cfg = shedline::HarnessConfig::load(flags.config_path);
    print_warnings(cfg);

    std::ifstream in(urls_path, std::ios::binary);
    if (!in) throw shedline::IoError("cannot open urls file: " + urls_path);
    std::vector<shedline::Url> urls;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string normalized = shedline::Url::normalize(line);
        if (normalized.empty()) {
            if (line.find_first_not_of(" \t\r\n\f\v") == std::string::npos) continue;
            throw shedline::IoError(urls_path + ":" + std::to_string(line_no) +
                                    ": url is empty after normalization");
        }
        if (seen.insert(normalized).second) {
            urls.emplace_back(normalized);
        }
    }

    shedline::TrustCache cache;
    if (cfg.cache_path) {
        cache = shedline::TrustCache::load(*cfg.cache_path, /*create_if_missing=*/true);
    }
    const auto evaluator = shedline::make_evaluator(cfg.evaluator);
    const auto clock = make_clock(flags.wall_clock);
    const auto report = shedline::process_batch(urls, cfg.params, cache, *evaluator, *clock);

    std::ostringstream body;
    for (const auto& item : report.items) {
        body << item.url.str() << '\t' << shedline::detail::fixed6(item.score.value()) << '\t'
             << shedline::provenance_name(item.provenance) << '\n';
    }
    if (flags.output) {
        std::ofstream out(*flags.output, std::ios::binary | std::ios::trunc);
        if (!out) throw shedline::IoError("cannot open output file: " + *flags.output);
        out << body.str();
        out.flush();
        if (!out) throw shedline::IoError("write failed for output file: " + *flags.output);
    } else {
        std::cout << body.str();
    }

    if (cfg.cache_path) {
        cache.save(*cfg.cache_path);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deadline-aware load shedding harness for trust-scored URL batches"};
    app.require_subcommand(1);

    CommonFlags flags;

    auto* run = app.add_subcommand("run", "Run the configured engine comparison");
    run->add_option("config", flags.config_path, "Path to the JSON config")->required();
    run->add_option("--output,-o", flags.output, "Override the configured output path");
    run->add_option("--format", flags.format, "Override the configured output format (csv|json)");
    run->add_flag("--wall-clock", flags.wall_clock, "Use the OS monotone clock");

    std::int64_t samples = 100;
    auto* calibrate =
        app.add_subcommand("calibrate", "Measure evaluator cost and recommend u_capacity");
    calibrate->add_option("config", flags.config_path, "Path to the JSON config")->required();
    calibrate->add_option("--samples", samples, "Number of synthetic URLs to time");
    calibrate->add_flag("--wall-clock", flags.wall_clock, "Use the OS monotone clock");

    std::string urls_path;
    auto* score = app.add_subcommand("score", "Score a file of URLs (one per line)");
    score->add_option("config", flags.config_path, "Path to the JSON config")->required();
    score->add_option("urls_file", urls_path, "File with one URL per line")->required();
    score->add_option("--output,-o", flags.output, "Write results here instead of stdout");
    score->add_flag("--wall-clock", flags.wall_clock, "Use the OS monotone clock");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(flags);
        if (calibrate->parsed()) return cmd_calibrate(flags, samples);
        if (score->parsed()) return cmd_score(flags, urls_path);
    } catch (const shedline::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const shedline::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitConfig;
}
