#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "shedline/clock.hpp"
#include "shedline/types.hpp"

namespace shedline {

/// Measured mean evaluation cost, used to derive u_capacity.
struct CalibrationSample {
    Duration per_item_cost{0};
    std::int64_t sample_count = 0;

    void validate() const {
        if (per_item_cost <= Duration::zero()) {
            throw std::invalid_argument("per_item_cost must be > 0");
        }
        if (sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
    }
};

/// Printed by the calibration command when the measured cost rounds to zero
/// and capacity is effectively unbounded.
inline constexpr std::int64_t kMaxCapacitySentinel = std::numeric_limits<std::int64_t>::max();

/// Three-way regime classification:
///   uload <= u_capacity                ->  Normal
///   uload <= u_capacity + u_threshold  ->  Heavy
///   otherwise                          ->  VeryHeavy
/// Both boundaries are inclusive on the left regime.
inline LoadClass classify_load(std::int64_t uload, const LoadParameters& params) {
    if (uload <= params.u_capacity) return LoadClass::Normal;
    if (uload <= params.u_capacity + params.u_threshold) return LoadClass::Heavy;
    return LoadClass::VeryHeavy;
}

/// Largest item count whose total cost fits in safety_factor * deadline_normal,
/// floored, never less than 1.
inline std::int64_t calibrate_capacity(const CalibrationSample& sample, Duration deadline_normal,
                                       double safety_factor) {
    sample.validate();
    if (deadline_normal <= Duration::zero()) {
        throw std::invalid_argument("deadline_normal must be > 0");
    }
    if (!(safety_factor > 0.0 && safety_factor <= 1.0)) {
        throw std::invalid_argument("safety_factor must be in (0, 1]");
    }
    const double c = std::floor(safety_factor * static_cast<double>(deadline_normal.count()) /
                                static_cast<double>(sample.per_item_cost.count()));
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(c));
}

/// Stretched deadline for the very-heavy regime: the overload deadline grows
/// linearly with how far the batch exceeds u_capacity + u_threshold, capped at
/// max_extension_factor times the overload deadline. Floored to whole
/// microseconds. Only meaningful (and only callable) when the load is
/// classified VeryHeavy.
inline Duration extend_deadline(std::int64_t uload, const LoadParameters& params) {
    if (classify_load(uload, params) != LoadClass::VeryHeavy) {
        throw std::logic_error("extend_deadline: load is not VeryHeavy");
    }
    const double base = static_cast<double>(params.u_capacity + params.u_threshold);
    const double excess_ratio = (static_cast<double>(uload) - base) / base;
    const double factor =
        std::min(1.0 + params.extension_weight * excess_ratio, params.max_extension_factor);
    const double extended =
        std::floor(static_cast<double>(params.deadline_overload.count()) * factor);
    return Duration{static_cast<std::int64_t>(extended)};
}

/// The deadline actually enforced for a batch of the given size.
inline Duration effective_deadline_for(std::int64_t uload, const LoadParameters& params) {
    switch (classify_load(uload, params)) {
        case LoadClass::Normal: return params.deadline_normal;
        case LoadClass::Heavy: return params.deadline_overload;
        case LoadClass::VeryHeavy: return extend_deadline(uload, params);
    }
    return params.deadline_normal;
}

}  // namespace shedline
