#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "shedline/url.hpp"

namespace shedline {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Synthetic query stream: n_batches batches whose sizes cycle through
/// batch_size_choices, each drawing URLs from a universe of url_universe
/// distinct URLs with popularity ~ 1/(rank+1)^zipf_exponent (0 = uniform).
/// Within a batch duplicates are removed, first occurrence wins, so a batch
/// is a list of distinct URLs like a search-result page.
struct WorkloadSpec {
    std::int64_t n_batches = 1;
    std::vector<std::int64_t> batch_size_choices;
    std::int64_t url_universe = 1;
    double zipf_exponent = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_batches < 1) throw std::invalid_argument("n_batches must be >= 1");
        if (batch_size_choices.empty()) {
            throw std::invalid_argument("batch_size_choices must be non-empty");
        }
        for (const auto s : batch_size_choices) {
            if (s < 0) throw std::invalid_argument("batch_size_choices entries must be >= 0");
        }
        if (url_universe < 1) throw std::invalid_argument("url_universe must be >= 1");
        if (!(zipf_exponent >= 0.0)) throw std::invalid_argument("zipf_exponent must be >= 0");
    }
};

inline Url workload_url(std::int64_t index) {
    return Url("http://u" + std::to_string(index) + ".example");
}

namespace detail {

inline double uniform01_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

class ZipfSampler {
public:
    ZipfSampler(std::int64_t universe, double exponent) {
        cumulative_.reserve(static_cast<std::size_t>(universe));
        double total = 0.0;
        for (std::int64_t i = 0; i < universe; ++i) {
            total += std::pow(1.0 / static_cast<double>(i + 1), exponent);
            cumulative_.push_back(total);
        }
    }

    std::int64_t sample(std::mt19937_64& rng) const {
        const double u = uniform01_draw(rng) * cumulative_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        const auto idx = static_cast<std::int64_t>(it - cumulative_.begin());
        return std::min<std::int64_t>(idx, static_cast<std::int64_t>(cumulative_.size()) - 1);
    }

private:
    std::vector<double> cumulative_;
};

}  // namespace detail

inline std::vector<std::vector<Url>> generate_workload(const WorkloadSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    const detail::ZipfSampler sampler(spec.url_universe, spec.zipf_exponent);

    std::vector<std::vector<Url>> batches;
    batches.reserve(static_cast<std::size_t>(spec.n_batches));
    for (std::int64_t b = 0; b < spec.n_batches; ++b) {
        const std::int64_t size =
            spec.batch_size_choices[static_cast<std::size_t>(b) % spec.batch_size_choices.size()];
        std::vector<Url> batch;
        std::unordered_set<std::int64_t> seen;
        batch.reserve(static_cast<std::size_t>(size));
        for (std::int64_t k = 0; k < size; ++k) {
            const std::int64_t idx = sampler.sample(rng);
            if (seen.insert(idx).second) {
                batch.push_back(workload_url(idx));
            }
        }
        batches.push_back(std::move(batch));
    }
    return batches;
}

}  // namespace shedline
