#ifndef CMC_PROFILE_HPP
#define CMC_PROFILE_HPP

#include <variant>
#include <vector>

#include "cmc/error.hpp"

namespace cmc {

// Probability-current profiles J(t) over an interaction window
// [t_start, t_end]. J vanishes outside the window and is nonnegative
// inside it; the running integral P(t) is the cumulative capture
// probability and must satisfy P(t_end) <= 1.

struct ConstantCurrent {
    double rate = 0.0;
    bool operator==(const ConstantCurrent&) const = default;
};

// Interpolates linearly from rate_start at window onset to rate_end at
// window completion.
struct LinearRampCurrent {
    double rate_start = 0.0;
    double rate_end = 0.0;
    bool operator==(const LinearRampCurrent&) const = default;
};

// Gaussian bump truncated to the window and renormalized so the window
// integral equals `area` exactly.
struct GaussianPulseCurrent {
    double center = 0.0;
    double width = 1.0;
    double area = 0.0;
    bool operator==(const GaussianPulseCurrent&) const = default;
};

// Piecewise-linear current through (time, rate) nodes; the node grid spans
// the window exactly.
struct TabulatedCurrent {
    std::vector<double> times;
    std::vector<double> rates;
    bool operator==(const TabulatedCurrent&) const = default;
};

using ProfileShape =
    std::variant<ConstantCurrent, LinearRampCurrent, GaussianPulseCurrent, TabulatedCurrent>;

struct CurrentProfile {
    ProfileShape shape;
    double t_start = 0.0;
    double t_end = 1.0;
    bool operator==(const CurrentProfile&) const = default;
};

CurrentProfile make_constant(double rate, double t_start, double t_end);
CurrentProfile make_linear_ramp(double rate_start, double rate_end, double t_start, double t_end);
CurrentProfile make_gaussian_pulse(double center, double width, double area,
                                   double t_start, double t_end);
// Window is taken from the first and last grid times.
CurrentProfile make_tabulated(std::vector<double> times, std::vector<double> rates);

// Throws on the first violated invariant: WindowInverted, NegativeCurrent
// (detail() = offending time), TotalProbabilityExceedsOne (detail() = total),
// InvalidParameter for non-finite or structurally bad parameters. All other
// operations assume a validated profile.
void validate(const CurrentProfile& profile);

// J(t); zero outside [t_start, t_end].
double current(const CurrentProfile& profile, double t);

// P(t) = integral of J from t_start to t, clamped to the window.
double capture_probability(const CurrentProfile& profile, double t);

// P(t_end), in closed form per shape.
double total_capture_probability(const CurrentProfile& profile);

// Smallest t with P(t) = target. Requires 0 <= target <= P(t_end); the
// result always lies in [t_start, t_end]. Closed form for constant, ramp
// and tabulated shapes; bracketed bisection for the Gaussian pulse.
double invert_capture_probability(const CurrentProfile& profile, double target);

enum class CollapseStatus {
    Superposed,
    CollapsedCapture,
    CollapsedNoCapture,
};

// Diagonal weights of the two-component state at time t. While superposed,
// p_capture tracks P(t) and p_no_capture = 1 - P(t); a collapse sends one
// weight to 1 and the other to 0.
struct TwoComponentState {
    double p_no_capture = 1.0;
    double p_capture = 0.0;
    CollapseStatus status = CollapseStatus::Superposed;
    double t = 0.0;
    bool operator==(const TwoComponentState&) const = default;
};

// Superposed state evolved to time t. Rejects t < t_start
// (InvalidParameter); t past the window end is clamped, the state stops
// evolving once the current has shut off.
TwoComponentState state_at(const CurrentProfile& profile, double t);

TwoComponentState collapsed_capture(double t);
TwoComponentState collapsed_no_capture(double t);

} // namespace cmc

#endif
