#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <thread>

namespace shedline {

/// All time in this library is integer microseconds. Durations are spans,
/// Instants are points on a single clock's timeline (since that clock's origin).
using Duration = std::chrono::microseconds;

struct Instant {
    std::int64_t microseconds = 0;

    auto operator<=>(const Instant&) const = default;

    friend constexpr Duration operator-(Instant a, Instant b) {
        return Duration{a.microseconds - b.microseconds};
    }
    friend constexpr Instant operator+(Instant t, Duration d) {
        return Instant{t.microseconds + d.count()};
    }
};

/// Source of time against which deadlines are checked. Evaluation work is
/// charged to the clock via charge(); on a virtual clock this advances
/// logical time, on a wall clock it occupies real time.
class Clock {
public:
    virtual ~Clock() = default;

    /// Monotone: successive reads never decrease.
    virtual Instant now() = 0;

    /// Consume `cost` of processing time.
    virtual void charge(Duration cost) = 0;
};

/// Deterministic logical clock. Starts at 0 and moves only via advance().
/// Single-owner: one engine run per instance.
class VirtualClock final : public Clock {
public:
    Instant now() override { return Instant{now_us_}; }

    Instant advance(Duration d) {
        if (d < Duration::zero()) {
            throw std::invalid_argument("VirtualClock::advance: negative duration");
        }
        now_us_ += d.count();
        return Instant{now_us_};
    }

    void charge(Duration cost) override { advance(cost); }

private:
    std::int64_t now_us_ = 0;
};

/// OS monotone clock, origin at construction. charge() sleeps, so a costed
/// evaluation occupies real time in live runs.
class WallClock final : public Clock {
public:
    Instant now() override {
        const auto elapsed = std::chrono::steady_clock::now() - origin_;
        return Instant{std::chrono::duration_cast<Duration>(elapsed).count()};
    }

    void charge(Duration cost) override {
        if (cost > Duration::zero()) {
            std::this_thread::sleep_for(cost);
        }
    }

private:
    std::chrono::steady_clock::time_point origin_ = std::chrono::steady_clock::now();
};

}  // namespace shedline
