#include "cmc/rules.hpp"

#include <cmath>

namespace cmc {
namespace {

void require_unit_draw(double draw) {
    if (!(draw >= 0.0 && draw < 1.0))
        throw SimError(Errc::InvalidDraw, "random draw outside [0, 1)", draw);
}

} // namespace

std::optional<double> sample_rule_a_time(const CurrentProfile& profile,
                                         RuleAInterpretation interpretation, double draw) {
    require_unit_draw(draw);
    const double total = total_capture_probability(profile);
    double target;
    if (interpretation == RuleAInterpretation::UnconditionalDensity) {
        if (!(draw < total))
            return std::nullopt;
        target = draw;
    } else {
        // -log(1 - draw) without cancellation near draw = 0
        target = -std::log1p(-draw);
        if (!(target < total))
            return std::nullopt;
    }
    const double t = invert_capture_probability(profile, target);
    if (t >= profile.t_end)
        return std::nullopt;
    return t;
}

TwoComponentState apply_rule_b(const TwoComponentState& state, double t_end) {
    if (state.status != CollapseStatus::Superposed)
        throw SimError(Errc::AlreadyCollapsed,
                       "terminal rule applied to an already collapsed state");
    if (state.t < t_end)
        throw SimError(Errc::RuleBBeforeEnd,
                       "terminal rule applied before the interaction ended", state.t);
    return collapsed_no_capture(t_end);
}

MeasurementResult observer_measure(const TwoComponentState& state, double draw) {
    require_unit_draw(draw);
    switch (state.status) {
    case CollapseStatus::CollapsedCapture:
        return {Outcome::CaptureObserved, state};
    case CollapseStatus::CollapsedNoCapture:
        return {Outcome::NoCaptureObserved, state};
    case CollapseStatus::Superposed:
        break;
    }
    if (draw < state.p_capture)
        return {Outcome::CaptureObserved, collapsed_capture(state.t)};
    return {Outcome::NoCaptureObserved, collapsed_no_capture(state.t)};
}

std::optional<double> sample_spontaneous_time(double rate, double t_start, double t_end,
                                              double draw) {
    require_unit_draw(draw);
    if (rate < 0.0)
        throw SimError(Errc::NegativeRate, "spontaneous collapse rate is negative", rate);
    if (!(t_start < t_end))
        throw SimError(Errc::WindowInverted,
                       "interaction window is inverted: t_start >= t_end");
    if (rate == 0.0)
        return std::nullopt;
    const double t = t_start - std::log1p(-draw) / rate;
    if (t >= t_end)
        return std::nullopt;
    return t;
}

} // namespace cmc
