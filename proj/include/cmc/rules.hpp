#ifndef CMC_RULES_HPP
#define CMC_RULES_HPP

#include <optional>

#include "cmc/profile.hpp"

namespace cmc {

// How the probability current J converts into a collapse-time law.
//
// UnconditionalDensity reads J(t) directly as the collapse-time density:
// the total collapse probability is the plain integral of J, and the
// sampled time has CDF P(t). HazardRate reads J(t) as a hazard, so the
// total collapse probability is 1 - exp(-P(t_end)).
enum class RuleAInterpretation {
    UnconditionalDensity,
    HazardRate,
};

enum class Outcome {
    SuperpositionIntact,
    CaptureObserved,
    NoCaptureObserved,
};

// Inverse-CDF sample of the capture-collapse time from one uniform draw in
// [0, 1). Returns nullopt when the trajectory never collapses inside the
// window; a time landing exactly on t_end also counts as no collapse
// (terminal rules own the boundary). Throws InvalidDraw for draws outside
// [0, 1).
std::optional<double> sample_rule_a_time(const CurrentProfile& profile,
                                         RuleAInterpretation interpretation, double draw);

// Terminal no-capture collapse at the end of the interaction. Requires a
// still-superposed state (AlreadyCollapsed otherwise) evolved to t_end or
// later (RuleBBeforeEnd otherwise).
TwoComponentState apply_rule_b(const TwoComponentState& state, double t_end);

struct MeasurementResult {
    Outcome outcome = Outcome::SuperpositionIntact;
    TwoComponentState state;
};

// Born measurement of whatever state the observer finds: a superposition
// collapses with probability p_capture toward capture, an already
// collapsed state reports its branch deterministically. The draw is
// validated in every case.
MeasurementResult observer_measure(const TwoComponentState& state, double draw);

// Waiting time of a constant-hazard collapse inside [t_start, t_end], or
// nullopt when it falls at or past t_end (rate 0 never fires). Throws
// NegativeRate for rate < 0 and InvalidDraw for draws outside [0, 1).
std::optional<double> sample_spontaneous_time(double rate, double t_start, double t_end,
                                              double draw);

} // namespace cmc

#endif
