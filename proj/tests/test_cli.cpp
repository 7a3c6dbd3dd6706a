#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "shedline/config.hpp"
#include "test_util.hpp"

using test_util::TempDir;
using test_util::run_command;

namespace {

const std::string kCli = SHEDLINE_CLI_BIN;

std::string minimal_config(const std::string& output_path, const std::string& extra_top = "") {
    return R"({
  "params": {
    "u_capacity": 4, "u_threshold": 2,
    "deadline_normal_us": 40000, "deadline_overload_us": 60000,
    "extension_weight": 0.5, "max_extension_factor": 2.0, "default_trust": 2.5
  },
  "evaluator": {"kind": "deterministic_hash", "per_item_cost_us": 10000},
  "workload": {"n_batches": 4, "batch_size_choices": [3, 5, 8], "url_universe": 60,
               "zipf_exponent": 0.5, "seed": 11},
  "engines": ["proposed"],
  "output_path": ")" + output_path + R"(",
  "output_format": "csv")" + extra_top + R"(
})";
}

std::size_t count_lines(const std::string& text) {
    std::size_t lines = 0;
    for (const char c : text) {
        if (c == '\n') ++lines;
    }
    return lines;
}

}  // namespace

TEST_CASE("config parsing validates strictly") {
    using shedline::ConfigError;
    using shedline::HarnessConfig;

    CHECK_THROWS_AS(HarnessConfig::parse("not json"), ConfigError);
    CHECK_THROWS_WITH(HarnessConfig::parse(R"({"bogus": 1})"),
                      Catch::Matchers::ContainsSubstring("bogus"));

    TempDir dir;
    const auto good = minimal_config(dir.file("out.csv").string());
    CHECK(HarnessConfig::parse(good).engines.size() == 1);

    auto bad_capacity = good;
    const auto pos = bad_capacity.find("\"u_capacity\": 4");
    bad_capacity.replace(pos, 15, "\"u_capacity\": 0");
    CHECK_THROWS_WITH(HarnessConfig::parse(bad_capacity),
                      Catch::Matchers::ContainsSubstring("u_capacity"));
}

TEST_CASE("the shipped example config is valid") {
    const auto cfg = shedline::HarnessConfig::load(SHEDLINE_EXAMPLE_CONFIG);
    CHECK(cfg.engines.size() == 3);
    CHECK(cfg.warnings().empty());
    CHECK(cfg.output_format == shedline::OutputFormat::Csv);
}

TEST_CASE("config warns when the overload deadline cannot cover the normal queue") {
    TempDir dir;
    auto text = minimal_config(dir.file("out.csv").string());
    // u_capacity x per_item_cost = 40000, so an overload deadline of 30000
    // leaves the drop queue without budget
    const auto pos = text.find("\"deadline_overload_us\": 60000");
    text.replace(pos, 29, "\"deadline_overload_us\": 30000");
    const auto pos2 = text.find("\"deadline_normal_us\": 40000");
    text.replace(pos2, 27, "\"deadline_normal_us\": 20000");
    const auto cfg = shedline::HarnessConfig::parse(text);
    REQUIRE(cfg.warnings().size() == 1);
    CHECK(cfg.warnings()[0].find("deadline_overload") != std::string::npos);
}

TEST_CASE("run command writes header, batch rows, and an aggregate row") {
    TempDir dir;
    const auto out = dir.file("report.csv");
    test_util::write_file(dir.file("cfg.json"), minimal_config(out.string()));
    const auto result = run_command(kCli + " run " + dir.file("cfg.json").string(), dir);
    CHECK(result.exit_code == 0);
    const auto csv = test_util::read_file(out);
    CHECK(count_lines(csv) == 1 + 4 + 1);  // header + n_batches + aggregate
    CHECK(csv.rfind("batch_id,engine,uload,load_class,", 0) == 0);
    CHECK(csv.find("ALL,proposed") != std::string::npos);
}

TEST_CASE("run command rejects invalid configs naming the field") {
    TempDir dir;
    auto text = minimal_config(dir.file("out.csv").string());
    const auto pos = text.find("\"u_capacity\": 4");
    text.replace(pos, 15, "\"u_capacity\": 0");
    test_util::write_file(dir.file("cfg.json"), text);
    const auto result = run_command(kCli + " run " + dir.file("cfg.json").string(), dir);
    CHECK(result.exit_code == 2);
    CHECK(result.err.find("u_capacity") != std::string::npos);
}

TEST_CASE("run command reports missing config files as io errors") {
    TempDir dir;
    const auto result = run_command(kCli + " run " + dir.file("nope.json").string(), dir);
    CHECK(result.exit_code == 3);
}

TEST_CASE("run command output is byte-identical across runs") {
    TempDir dir;
    test_util::write_file(dir.file("cfg.json"), minimal_config(dir.file("unused.csv").string()));
    const auto a = dir.file("a.csv");
    const auto b = dir.file("b.csv");
    CHECK(run_command(kCli + " run " + dir.file("cfg.json").string() + " --output " + a.string(),
                      dir)
              .exit_code == 0);
    CHECK(run_command(kCli + " run " + dir.file("cfg.json").string() + " --output " + b.string(),
                      dir)
              .exit_code == 0);
    const auto text_a = test_util::read_file(a);
    CHECK_FALSE(text_a.empty());
    CHECK(text_a == test_util::read_file(b));
}

TEST_CASE("seed env var overrides the configured seed deterministically") {
    TempDir dir;
    test_util::write_file(dir.file("cfg.json"), minimal_config(dir.file("unused.csv").string()));
    const auto base = dir.file("base.csv");
    const auto s1 = dir.file("s1.csv");
    const auto s2 = dir.file("s2.csv");
    const auto cfg = dir.file("cfg.json").string();
    run_command(kCli + " run " + cfg + " --output " + base.string(), dir);
    run_command("SHEDLINE_SEED=99 " + kCli + " run " + cfg + " --output " + s1.string(), dir);
    run_command("SHEDLINE_SEED=99 " + kCli + " run " + cfg + " --output " + s2.string(), dir);
    CHECK(test_util::read_file(s1) == test_util::read_file(s2));
    CHECK(test_util::read_file(s1) != test_util::read_file(base));

    const auto bad = run_command("SHEDLINE_SEED=notanumber " + kCli + " run " + cfg, dir);
    CHECK(bad.exit_code == 2);
    CHECK(bad.err.find("SHEDLINE_SEED") != std::string::npos);
}

TEST_CASE("run command supports json output") {
    TempDir dir;
    const auto out = dir.file("report.json");
    test_util::write_file(dir.file("cfg.json"), minimal_config(dir.file("unused.csv").string()));
    const auto result = run_command(kCli + " run " + dir.file("cfg.json").string() + " --output " +
                                        out.string() + " --format json",
                                    dir);
    CHECK(result.exit_code == 0);
    const auto text = test_util::read_file(out);
    CHECK(text.find("\"engine\": \"proposed\"") != std::string::npos);
    CHECK(text.find("\"batch_id\": \"ALL\"") != std::string::npos);
}

TEST_CASE("calibrate prints the fitted capacity") {
    TempDir dir;
    auto text = minimal_config(dir.file("out.csv").string());
    auto pos = text.find("\"deadline_normal_us\": 40000");
    text.replace(pos, 27, "\"deadline_normal_us\": 1000000");
    pos = text.find("\"deadline_overload_us\": 60000");
    text.replace(pos, 29, "\"deadline_overload_us\": 1100000");
    pos = text.find("\"kind\": \"deterministic_hash\"");
    text.replace(pos, 28, "\"kind\": \"fixed_cost\"");
    test_util::write_file(dir.file("cfg.json"), text);
    const auto result =
        run_command(kCli + " calibrate " + dir.file("cfg.json").string() + " --samples 50", dir);
    CHECK(result.exit_code == 0);
    CHECK(result.out == "100\n");
}

TEST_CASE("calibrate rejects a non-positive sample count") {
    TempDir dir;
    test_util::write_file(dir.file("cfg.json"), minimal_config(dir.file("out.csv").string()));
    const auto result =
        run_command(kCli + " calibrate " + dir.file("cfg.json").string() + " --samples 0", dir);
    CHECK(result.exit_code == 2);
    CHECK(result.err.find("samples") != std::string::npos);
}

TEST_CASE("calibrate prints the sentinel when cost rounds to zero") {
    TempDir dir;
    auto text = minimal_config(dir.file("out.csv").string());
    const auto pos = text.find("\"per_item_cost_us\": 10000");
    text.replace(pos, 25, "\"per_item_cost_us\": 0");
    test_util::write_file(dir.file("cfg.json"), text);
    const auto result =
        run_command(kCli + " calibrate " + dir.file("cfg.json").string() + " --samples 10", dir);
    CHECK(result.exit_code == 0);
    CHECK(result.out == std::to_string(shedline::kMaxCapacitySentinel) + "\n");
    CHECK(result.err.find("warning") != std::string::npos);
}

TEST_CASE("score command evaluates a url file and persists the cache") {
    TempDir dir;
    const auto cache = dir.file("cache.jsonl");
    auto text = minimal_config(dir.file("out.csv").string(),
                               ",\n  \"cache_path\": \"" + cache.string() + "\"");
    test_util::write_file(dir.file("cfg.json"), text);
    test_util::write_file(dir.file("urls.txt"),
                          "http://one.example\nHTTP://Two.example/\nhttp://three.example\n");

    const auto cfg = dir.file("cfg.json").string();
    const auto first =
        run_command(kCli + " score " + cfg + " " + dir.file("urls.txt").string(), dir);
    CHECK(first.exit_code == 0);
    CHECK(count_lines(first.out) == 3);
    CHECK(first.out.find("http://one.example\t") == 0);
    CHECK(first.out.find("http://two.example\t") != std::string::npos);
    CHECK(first.out.find("Evaluated") != std::string::npos);
    CHECK(first.out.find("CacheHit") == std::string::npos);

    const auto second =
        run_command(kCli + " score " + cfg + " " + dir.file("urls.txt").string(), dir);
    CHECK(second.exit_code == 0);
    CHECK(count_lines(second.out) == 3);
    CHECK(second.out.find("Evaluated") == std::string::npos);
    CHECK(second.out.find("Averaged") == std::string::npos);
}

TEST_CASE("score command tags overflow beyond the deadline as averaged, dropping nothing") {
    TempDir dir;
    test_util::write_file(dir.file("cfg.json"), minimal_config(dir.file("out.csv").string()));
    std::string urls;
    for (int i = 0; i < 12; ++i) {
        urls += "http://bulk" + std::to_string(i) + ".example\n";
    }
    urls += "http://bulk3.example\n";  // duplicate, removed by normalization
    test_util::write_file(dir.file("urls.txt"), urls);
    const auto result = run_command(
        kCli + " score " + dir.file("cfg.json").string() + " " + dir.file("urls.txt").string(),
        dir);
    CHECK(result.exit_code == 0);
    CHECK(count_lines(result.out) == 12);
    CHECK(result.out.find("Averaged") != std::string::npos);
    CHECK(result.out.find("Dropped") == std::string::npos);
    for (int i = 0; i < 12; ++i) {
        CHECK(result.out.find("http://bulk" + std::to_string(i) + ".example\t") !=
              std::string::npos);
    }
}

TEST_CASE("score command accepts an empty url file") {
    TempDir dir;
    test_util::write_file(dir.file("cfg.json"), minimal_config(dir.file("out.csv").string()));
    test_util::write_file(dir.file("urls.txt"), "");
    const auto result = run_command(
        kCli + " score " + dir.file("cfg.json").string() + " " + dir.file("urls.txt").string(),
        dir);
    CHECK(result.exit_code == 0);
    CHECK(result.out.empty());
}

TEST_CASE("score command reports an unreadable url file as an io error") {
    TempDir dir;
    test_util::write_file(dir.file("cfg.json"), minimal_config(dir.file("out.csv").string()));
    const auto result = run_command(
        kCli + " score " + dir.file("cfg.json").string() + " " + dir.file("missing.txt").string(),
        dir);
    CHECK(result.exit_code == 3);
}
