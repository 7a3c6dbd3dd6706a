#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>

#include "shedline/clock.hpp"
#include "shedline/types.hpp"
#include "shedline/url.hpp"

using namespace shedline;

TEST_CASE("virtual clock starts at origin") {
    VirtualClock clock;
    CHECK(clock.now() == Instant{0});
}

TEST_CASE("virtual clock advance moves logical time exactly") {
    VirtualClock clock;
    CHECK(clock.advance(Duration{10000}) == Instant{10000});
    CHECK(clock.now() == Instant{10000});
}

TEST_CASE("virtual clock zero advance is a no-op") {
    VirtualClock clock;
    clock.advance(Duration{5000});
    CHECK(clock.advance(Duration{0}) == Instant{5000});
}

TEST_CASE("virtual clock advances are additive with no drift") {
    VirtualClock clock;
    clock.advance(Duration{1000});
    clock.advance(Duration{1000});
    clock.advance(Duration{1000});
    CHECK(clock.now() == Instant{3000});

    // time equals the exact sum of all advances
    VirtualClock c2;
    std::mt19937_64 rng(7);
    std::int64_t sum = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto d = static_cast<std::int64_t>(rng() % 100000);
        sum += d;
        c2.advance(Duration{d});
    }
    CHECK(c2.now() == Instant{sum});
}

TEST_CASE("virtual clock rejects negative advance") {
    VirtualClock clock;
    CHECK_THROWS_AS(clock.advance(Duration{-1}), std::invalid_argument);
}

TEST_CASE("clocks are monotone across successive reads") {
    VirtualClock vc;
    for (int i = 0; i < 100; ++i) {
        const auto t1 = vc.now();
        vc.advance(Duration{i % 3});
        const auto t2 = vc.now();
        CHECK(t1 <= t2);
    }
    WallClock wc;
    Instant prev = wc.now();
    for (int i = 0; i < 1000; ++i) {
        const Instant t = wc.now();
        CHECK(prev <= t);
        prev = t;
    }
}

TEST_CASE("wall clock charge consumes real time") {
    WallClock clock;
    const auto before = clock.now();
    clock.charge(Duration{2000});
    CHECK(clock.now() - before >= Duration{2000});
}

TEST_CASE("trust score accepts the closed [0, 5] range") {
    CHECK(TrustScore(0.0).value() == 0.0);
    CHECK(TrustScore(5.0).value() == 5.0);
    CHECK(TrustScore(4.2).value() == 4.2);
}

TEST_CASE("trust score rejects values outside the scale") {
    CHECK_THROWS_AS(TrustScore(-0.001), std::out_of_range);
    CHECK_THROWS_AS(TrustScore(5.001), std::out_of_range);
    CHECK_THROWS_AS(TrustScore(std::numeric_limits<double>::quiet_NaN()), std::out_of_range);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> wide(-100.0, 100.0);
    for (int i = 0; i < 2000; ++i) {
        const double v = wide(rng);
        if (v >= 0.0 && v <= 5.0) {
            CHECK(TrustScore(v).value() == v);
        } else {
            CHECK_THROWS_AS(TrustScore(v), std::out_of_range);
        }
    }
}

TEST_CASE("trust score clamped saturates at the bounds") {
    CHECK(TrustScore::clamped(-3.0).value() == 0.0);
    CHECK(TrustScore::clamped(9.0).value() == 5.0);
    CHECK(TrustScore::clamped(2.5).value() == 2.5);
}

TEST_CASE("url normalization lowercases scheme and host only") {
    CHECK(Url("HTTP://A.com/").str() == "http://a.com");
    CHECK(Url("http://a.com").str() == "http://a.com");
    CHECK(Url("HTTPS://Example.COM/Path/To?Q=X").str() == "https://example.com/Path/To?Q=X");
    CHECK(Url("http://A.com:8080/Up").str() == "http://a.com:8080/Up");
    CHECK(Url("Example.com/Foo").str() == "example.com/Foo");
}

TEST_CASE("url normalization strips whitespace and trailing slashes") {
    CHECK(Url("  http://a.com/  ").str() == "http://a.com");
    CHECK(Url("http://a.com///").str() == "http://a.com");
    CHECK(Url("http://a.com/Path/").str() == "http://a.com/Path");
}

TEST_CASE("url rejects input that normalizes to empty") {
    CHECK_THROWS_AS(Url(""), std::invalid_argument);
    CHECK_THROWS_AS(Url("   "), std::invalid_argument);
    CHECK_THROWS_AS(Url("///"), std::invalid_argument);
}

TEST_CASE("urls compare equal iff normalized texts are byte-equal") {
    CHECK(Url("HTTP://A.com/") == Url("http://a.com"));
    CHECK(Url("http://a.com/X") != Url("http://a.com/x"));
}

TEST_CASE("url normalization is idempotent") {
    std::mt19937_64 rng(13);
    const std::string alphabet = "abcXYZ019:/?#._-~ ";
    for (int i = 0; i < 2000; ++i) {
        std::string raw = "http://";
        const auto len = 1 + rng() % 24;
        for (std::size_t k = 0; k < len; ++k) {
            raw += alphabet[rng() % alphabet.size()];
        }
        const std::string once = Url::normalize(raw);
        CHECK(Url::normalize(once) == once);
    }
}
