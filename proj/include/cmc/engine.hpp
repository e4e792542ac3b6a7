#ifndef CMC_ENGINE_HPP
#define CMC_ENGINE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "cmc/profile.hpp"
#include "cmc/rules.hpp"
#include "cmc/stats.hpp"

namespace cmc {

// What resolves the superposition along a trajectory.
//
// Naive      combines the current-driven capture collapse, the terminal
//            no-capture collapse, and a mid-interaction observer that
//            Born-samples the raw superposition weights without
//            conditioning on the capture collapse not having fired.
//            Capture mass is deliberately counted twice; the regime is
//            intentionally inconsistent and exists so the simulator can
//            quantify the inconsistency against the regimes below.
// ObserverOnly   no objective collapse at all: one Born measurement at the
//            observation time (t_end when no observer_time is given).
// QuantumJump    the conditioned reading: a trajectory that reaches the
//            observer without a capture jump is purely no-capture, so the
//            observer reports no-capture deterministically.
// SpontaneousRate   a fixed-hazard comparator: the superposition collapses
//            spontaneously at constant rate, Born-sampling its weights at
//            the collapse instant.
enum class RegimeKind {
    Naive,
    ObserverOnly,
    QuantumJump,
    SpontaneousRate,
};

struct Regime {
    RegimeKind kind = RegimeKind::Naive;
    double spontaneous_rate = 0.0; // SpontaneousRate only
    bool operator==(const Regime&) const = default;
};

struct Scenario {
    CurrentProfile profile;
    Regime regime;
    std::optional<double> observer_time; // in (t_start, t_end] when present
    std::uint64_t n_trajectories = 100000;
    std::uint64_t master_seed = 1;
    RuleAInterpretation interpretation = RuleAInterpretation::UnconditionalDensity;
    bool operator==(const Scenario&) const = default;
};

// Profile validity plus scenario-level invariants: n_trajectories >= 1,
// observer_time inside (t_start, t_end], spontaneous rate >= 0.
void validate(const Scenario& scenario);

enum class EventKind {
    RuleACollapse,
    RuleBCollapse,
    SpontaneousCollapse,
    ObserverMeasurement,
};

struct TrajectoryEvent {
    double t = 0.0;
    EventKind kind = EventKind::ObserverMeasurement;
    std::optional<Outcome> observed; // measurements only
    bool operator==(const TrajectoryEvent&) const = default;
};

struct TrajectoryRecord {
    std::vector<TrajectoryEvent> events;
    Outcome final_outcome = Outcome::SuperpositionIntact;
    // Set only by objective collapses that capture (Rule A, or a
    // spontaneous collapse whose Born outcome is capture); observer
    // measurements never set it.
    std::optional<double> capture_time;
    bool operator==(const TrajectoryRecord&) const = default;
};

// One trajectory, fully determined by (scenario, index): all randomness
// comes from slot-addressed draws of TrajectoryRng(master_seed, index).
TrajectoryRecord run_trajectory(const Scenario& scenario, std::uint64_t index);

// Ensemble tallies over indices 0 .. n_trajectories-1. run_ensemble
// distributes trajectories across OpenMP threads; run_ensemble_serial is
// the plain-loop reference kept for testing. Both produce identical
// results for any thread count.
EnsembleStats run_ensemble(const Scenario& scenario);
EnsembleStats run_ensemble_serial(const Scenario& scenario);

struct OutcomeDistribution {
    double p_capture = 0.0;
    double p_no_capture = 0.0;
    bool operator==(const OutcomeDistribution&) const = default;
};

// Exact outcome distribution by brute-force enumeration of the discrete
// probability tree on n_steps uniform steps, independent of the sampling
// machinery. Branch masses are closed-form for the unconditional-density
// reading (the telescoped increments of P), and a per-step survival
// product for the hazard reading, converging O(1/n_steps). Requires
// n_steps >= 100.
OutcomeDistribution oracle_distribution(const Scenario& scenario,
                                        std::uint64_t n_steps = 1000);

struct OutcomeComparison {
    Outcome outcome = Outcome::CaptureObserved;
    std::uint64_t count = 0;
    double frequency = 0.0;
    double exact = 0.0;
    double z = 0.0;
    bool flagged = false;
};

struct ComparisonReport {
    std::array<OutcomeComparison, 2> rows; // capture first, then no-capture
    bool any_flagged = false;
};

// z-scores of the empirical frequencies against exact probabilities, using
// the binomial standard error sqrt(p(1-p)/n) of the exact p. Rows with
// |z| > threshold are flagged. A zero standard error gives z = 0 on exact
// agreement and +-inf otherwise.
ComparisonReport compare(const EnsembleStats& stats, const OutcomeDistribution& exact,
                         double flag_threshold = 5.0);

} // namespace cmc

#endif
