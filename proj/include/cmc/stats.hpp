#ifndef CMC_STATS_HPP
#define CMC_STATS_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cmc/error.hpp"
#include "cmc/rules.hpp"

namespace cmc {

inline constexpr std::size_t kHistogramBins = 100;

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 1.0;
    bool operator==(const ConfidenceInterval&) const = default;
};

// z such that the standard normal CDF at z equals prob. Table-free:
// bisection against erfc. Requires 0 < prob < 1.
double normal_quantile(double prob);

// Wilson score interval for a binomial proportion. Requires n >= 1,
// successes <= n, 0 < confidence < 1. The interval is clamped to [0, 1]
// and always contains the point estimate; at successes = 0 the lower edge
// is exactly 0, at successes = n the upper edge is exactly 1.
ConfidenceInterval wilson_interval(std::uint64_t successes, std::uint64_t n,
                                   double confidence);

// Kolmogorov-Smirnov distance between an ascending sample and a reference
// CDF: max over samples of the two one-sided gaps against the empirical
// step function. Requires at least one sample.
template <typename Cdf>
double ks_distance(std::span<const double> sorted_samples, Cdf&& cdf) {
    if (sorted_samples.empty())
        throw SimError(Errc::InvalidParameter, "ks_distance needs at least one sample");
    const double n = static_cast<double>(sorted_samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted_samples.size(); ++i) {
        const double f = cdf(sorted_samples[i]);
        d = std::max({d, f - static_cast<double>(i) / n,
                      static_cast<double>(i + 1) / n - f});
    }
    return d;
}

// Outcome tallies of an ensemble plus a fixed-width histogram of objective
// capture times over the interaction window. Count aggregation is integer
// arithmetic, so merging is exact and order-independent.
struct EnsembleStats {
    std::uint64_t n = 0;
    std::uint64_t capture_count = 0;
    std::uint64_t no_capture_count = 0;
    double window_start = 0.0;
    double window_end = 1.0;
    std::vector<std::uint64_t> capture_time_histogram;
    ConfidenceInterval capture_ci;
    ConfidenceInterval no_capture_ci;

    static EnsembleStats for_window(double window_start, double window_end);

    // Tally one finished trajectory. The outcome must be terminal
    // (InvalidParameter for SuperpositionIntact); capture_time, when
    // present, is binned with edge values going to the lower bin.
    // Intervals are left stale; call refresh_intervals when done.
    void add(Outcome outcome, std::optional<double> capture_time);

    // Fold another ensemble over the same window into this one and refresh
    // the intervals. InvalidParameter on window mismatch.
    void merge(const EnsembleStats& other);

    // Recompute the 95% Wilson intervals from the current counts. Leaves
    // the no-information default [0, 1] while n = 0.
    void refresh_intervals();

    double frequency(Outcome outcome) const;
    std::uint64_t count(Outcome outcome) const;

    bool operator==(const EnsembleStats&) const = default;
};

} // namespace cmc

#endif
