#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "shedline/evaluators.hpp"

using namespace shedline;

namespace {

// Independent FNV-1a 64 used as the cross-implementation oracle.
std::uint64_t reference_fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < s.size(); ++i) {
        h = (h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(s[i]))) *
            0x100000001b3ull;
    }
    return h;
}

double reference_score(const std::string& s) {
    return 5.0 * std::ldexp(static_cast<double>(reference_fnv1a(s)), -64);
}

std::string random_url(std::mt19937_64& rng) {
    std::string u = "http://h" + std::to_string(rng() % 100000) + ".example/p" +
                    std::to_string(rng() % 1000);
    return u;
}

}  // namespace

TEST_CASE("hash evaluator matches an independent fnv1a implementation") {
    DeterministicHashEvaluator eval(Duration{0});
    CHECK(fnv1a64("http://a.com") == 0x16aad805928c6b4dull);
    for (const std::string url : {"http://a.com", "http://example.org/path", "http://u0.example"}) {
        CHECK(eval.peek(Url(url)).value() == reference_score(url));
    }
    std::mt19937_64 rng(37);
    for (int i = 0; i < 500; ++i) {
        const auto url = random_url(rng);
        CHECK(eval.peek(Url(url)).value() == reference_score(Url::normalize(url)));
    }
}

TEST_CASE("hash evaluator is deterministic") {
    DeterministicHashEvaluator eval(Duration{100});
    VirtualClock c1, c2;
    std::mt19937_64 rng(41);
    for (int i = 0; i < 1000; ++i) {
        const Url url(random_url(rng));
        CHECK(eval.evaluate(url, c1) == eval.evaluate(url, c2));
    }
}

TEST_CASE("all produced scores lie on the trust scale") {
    DeterministicHashEvaluator eval(Duration{0});
    std::mt19937_64 rng(43);
    for (int i = 0; i < 1000; ++i) {
        const double v = eval.peek(Url(random_url(rng))).value();
        CHECK(v >= 0.0);
        CHECK(v <= 5.0);
    }
}

TEST_CASE("fixed cost evaluator charges exactly its cost") {
    FixedCostEvaluator eval(Duration{10000}, TrustScore(2.5));
    VirtualClock clock;
    eval.evaluate(Url("http://a.com"), clock);
    CHECK(clock.now() == Instant{10000});

    for (int i = 0; i < 9; ++i) {
        eval.evaluate(Url("http://b" + std::to_string(i) + ".com"), clock);
    }
    CHECK(clock.now() == Instant{100000});
}

TEST_CASE("scripted evaluator plays back its script") {
    const std::vector<ScriptEntry> script = {
        {Url("http://a.com"), TrustScore(1.5), Duration{100}},
        {Url("http://b.com"), TrustScore(4.0), Duration{250}},
    };
    ScriptedEvaluator eval(script);
    VirtualClock clock;
    CHECK(eval.evaluate(Url("http://a.com"), clock).value() == 1.5);
    CHECK(clock.now() == Instant{100});
    CHECK(eval.evaluate(Url("http://b.com"), clock).value() == 4.0);
    CHECK(clock.now() == Instant{350});
    CHECK(eval.max_cost() == Duration{250});
}

TEST_CASE("scripted evaluator rejects unknown urls") {
    ScriptedEvaluator eval({{Url("http://a.com"), TrustScore(1.0), Duration{1}}});
    VirtualClock clock;
    CHECK_THROWS_AS(eval.evaluate(Url("http://unknown.com"), clock), std::out_of_range);
}

TEST_CASE("make_evaluator builds the requested kind") {
    EvaluatorSpec hash;
    hash.kind = EvaluatorKind::DeterministicHash;
    hash.per_item_cost = Duration{5};
    CHECK(make_evaluator(hash)->max_cost() == Duration{5});

    EvaluatorSpec fixed;
    fixed.kind = EvaluatorKind::FixedCost;
    fixed.per_item_cost = Duration{7};
    fixed.fixed_score = TrustScore(1.25);
    CHECK(make_evaluator(fixed)->peek(Url("http://x.com")).value() == 1.25);

    EvaluatorSpec scripted;
    scripted.kind = EvaluatorKind::Scripted;
    scripted.script = {{Url("http://a.com"), TrustScore(3.0), Duration{9}}};
    CHECK(make_evaluator(scripted)->cost_of(Url("http://a.com")) == Duration{9});
}

TEST_CASE("oracle of an empty list is empty") {
    DeterministicHashEvaluator eval(Duration{10});
    CHECK(oracle_scores(eval, {}).empty());
}

TEST_CASE("oracle covers every distinct url with the evaluator's score") {
    DeterministicHashEvaluator eval(Duration{10});
    std::vector<WorkItem> items;
    for (int i = 0; i < 40; ++i) {
        items.push_back({Url("http://u" + std::to_string(i) + ".example"), i});
    }
    const auto oracle = oracle_scores(eval, items);
    CHECK(oracle.size() == 40);
    VirtualClock clock;
    for (const auto& item : items) {
        CHECK(oracle.at(item.url) == eval.evaluate(item.url, clock));
    }
    // peeking charged nothing; evaluate charged 40 x 10
    CHECK(clock.now() == Instant{400});
}
