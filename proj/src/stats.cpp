#include "cmc/stats.hpp"

#include <cmath>
#include <numbers>

namespace cmc {
namespace {

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

} // namespace

double normal_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0))
        throw SimError(Errc::InvalidParameter, "quantile probability outside (0, 1)", prob);
    double lo = -40.0;
    double hi = 40.0;
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < prob ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

ConfidenceInterval wilson_interval(std::uint64_t successes, std::uint64_t n,
                                   double confidence) {
    if (n < 1)
        throw SimError(Errc::InvalidParameter, "interval needs at least one trial");
    if (successes > n)
        throw SimError(Errc::InvalidParameter, "more successes than trials");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw SimError(Errc::InvalidParameter, "confidence outside (0, 1)", confidence);

    const double z = normal_quantile(0.5 + 0.5 * confidence);
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

EnsembleStats EnsembleStats::for_window(double window_start, double window_end) {
    EnsembleStats s;
    s.window_start = window_start;
    s.window_end = window_end;
    s.capture_time_histogram.assign(kHistogramBins, 0);
    return s;
}

void EnsembleStats::add(Outcome outcome, std::optional<double> capture_time) {
    switch (outcome) {
    case Outcome::CaptureObserved:
        ++capture_count;
        break;
    case Outcome::NoCaptureObserved:
        ++no_capture_count;
        break;
    case Outcome::SuperpositionIntact:
        throw SimError(Errc::InvalidParameter,
                       "trajectory finished without resolving the superposition");
    }
    ++n;
    if (capture_time) {
        // ceil - 1 sends times sitting exactly on a bin edge to the lower bin
        const double width = (window_end - window_start) / kHistogramBins;
        const double offset = (*capture_time - window_start) / width;
        const auto raw = static_cast<std::int64_t>(std::ceil(offset)) - 1;
        const auto bin = static_cast<std::size_t>(
            std::clamp<std::int64_t>(raw, 0, kHistogramBins - 1));
        ++capture_time_histogram[bin];
    }
}

void EnsembleStats::merge(const EnsembleStats& other) {
    if (window_start != other.window_start || window_end != other.window_end ||
        capture_time_histogram.size() != other.capture_time_histogram.size())
        throw SimError(Errc::InvalidParameter, "merging stats over different windows");
    n += other.n;
    capture_count += other.capture_count;
    no_capture_count += other.no_capture_count;
    for (std::size_t i = 0; i < capture_time_histogram.size(); ++i)
        capture_time_histogram[i] += other.capture_time_histogram[i];
    refresh_intervals();
}

void EnsembleStats::refresh_intervals() {
    if (n == 0)
        return;
    capture_ci = wilson_interval(capture_count, n, 0.95);
    no_capture_ci = wilson_interval(no_capture_count, n, 0.95);
}

double EnsembleStats::frequency(Outcome outcome) const {
    if (n == 0)
        return 0.0;
    return static_cast<double>(count(outcome)) / static_cast<double>(n);
}

std::uint64_t EnsembleStats::count(Outcome outcome) const {
    switch (outcome) {
    case Outcome::CaptureObserved:
        return capture_count;
    case Outcome::NoCaptureObserved:
        return no_capture_count;
    default:
        return 0;
    }
}

} // namespace cmc
