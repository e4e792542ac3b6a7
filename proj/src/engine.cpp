#include "cmc/engine.hpp"

#include <cassert>
#include <cmath>
#include <limits>

#include "cmc/rng.hpp"

namespace cmc {
namespace {

// Draw slots; see the stream layout notes in rng.hpp.
constexpr std::uint64_t kDrawCollapseTiming = 0;
constexpr std::uint64_t kDrawSpontaneousBorn = 1;
constexpr std::uint64_t kDrawObserver = 2;

double horizon_of(const Scenario& s) {
    return s.observer_time ? *s.observer_time : s.profile.t_end;
}

void finish_no_capture_at_end(const Scenario& s, const TwoComponentState& st,
                              TrajectoryRecord& rec) {
    const TwoComponentState after = apply_rule_b(st, s.profile.t_end);
    assert(after.status == CollapseStatus::CollapsedNoCapture);
    (void)after;
    rec.events.push_back({s.profile.t_end, EventKind::RuleBCollapse, std::nullopt});
    rec.final_outcome = Outcome::NoCaptureObserved;
}

TrajectoryRecord simulate(const Scenario& s, std::uint64_t index) {
    const TrajectoryRng rng(s.master_seed, index);
    const CurrentProfile& prof = s.profile;
    const bool observed = s.observer_time.has_value();
    const double horizon = horizon_of(s);

    TrajectoryRecord rec;
    switch (s.regime.kind) {
    case RegimeKind::Naive:
    case RegimeKind::QuantumJump: {
        const auto t_c = sample_rule_a_time(prof, s.interpretation,
                                            rng.uniform(kDrawCollapseTiming));
        if (t_c && *t_c < horizon) {
            rec.events.push_back({*t_c, EventKind::RuleACollapse, std::nullopt});
            rec.capture_time = *t_c;
            if (observed)
                rec.events.push_back({horizon, EventKind::ObserverMeasurement,
                                      Outcome::CaptureObserved});
            rec.final_outcome = Outcome::CaptureObserved;
        } else if (observed) {
            Outcome found;
            if (s.regime.kind == RegimeKind::Naive) {
                // Unconditioned: Born-sample the raw weights P(t), 1 - P(t)
                // even though the capture branch was already given its own
                // collapse channel. This is the deliberate double count.
                found = observer_measure(state_at(prof, horizon),
                                         rng.uniform(kDrawObserver))
                            .outcome;
            } else {
                // Conditioned: no jump so far means the state is purely
                // no-capture, nothing is left to chance.
                found = Outcome::NoCaptureObserved;
            }
            rec.events.push_back({horizon, EventKind::ObserverMeasurement, found});
            rec.final_outcome = found;
        } else {
            const TwoComponentState st =
                s.regime.kind == RegimeKind::Naive
                    ? state_at(prof, prof.t_end)
                    : TwoComponentState{1.0, 0.0, CollapseStatus::Superposed, prof.t_end};
            finish_no_capture_at_end(s, st, rec);
        }
        break;
    }
    case RegimeKind::ObserverOnly: {
        const auto mr =
            observer_measure(state_at(prof, horizon), rng.uniform(kDrawObserver));
        rec.events.push_back({horizon, EventKind::ObserverMeasurement, mr.outcome});
        rec.final_outcome = mr.outcome;
        break;
    }
    case RegimeKind::SpontaneousRate: {
        const auto t_s =
            sample_spontaneous_time(s.regime.spontaneous_rate, prof.t_start, prof.t_end,
                                    rng.uniform(kDrawCollapseTiming));
        if (t_s && *t_s < horizon) {
            const auto mr = observer_measure(state_at(prof, *t_s),
                                             rng.uniform(kDrawSpontaneousBorn));
            rec.events.push_back({*t_s, EventKind::SpontaneousCollapse, std::nullopt});
            if (mr.outcome == Outcome::CaptureObserved)
                rec.capture_time = *t_s;
            if (observed)
                rec.events.push_back({horizon, EventKind::ObserverMeasurement, mr.outcome});
            rec.final_outcome = mr.outcome;
        } else if (observed) {
            const auto mr =
                observer_measure(state_at(prof, horizon), rng.uniform(kDrawObserver));
            rec.events.push_back({horizon, EventKind::ObserverMeasurement, mr.outcome});
            rec.final_outcome = mr.outcome;
        } else {
            finish_no_capture_at_end(s, state_at(prof, prof.t_end), rec);
        }
        break;
    }
    }
    return rec;
}

} // namespace

void validate(const Scenario& scenario) {
    validate(scenario.profile);
    if (scenario.n_trajectories < 1)
        throw SimError(Errc::InvalidParameter, "n_trajectories must be at least 1");
    if (scenario.regime.kind == RegimeKind::SpontaneousRate &&
        scenario.regime.spontaneous_rate < 0.0)
        throw SimError(Errc::NegativeRate, "spontaneous collapse rate is negative",
                       scenario.regime.spontaneous_rate);
    if (scenario.observer_time) {
        const double t = *scenario.observer_time;
        if (!(t > scenario.profile.t_start && t <= scenario.profile.t_end))
            throw SimError(Errc::InvalidParameter,
                           "observer_time outside the interaction window (t_start, t_end]",
                           t);
    }
}

TrajectoryRecord run_trajectory(const Scenario& scenario, std::uint64_t index) {
    validate(scenario);
    return simulate(scenario, index);
}

EnsembleStats run_ensemble_serial(const Scenario& scenario) {
    validate(scenario);
    EnsembleStats total =
        EnsembleStats::for_window(scenario.profile.t_start, scenario.profile.t_end);
    for (std::uint64_t i = 0; i < scenario.n_trajectories; ++i) {
        const TrajectoryRecord rec = simulate(scenario, i);
        total.add(rec.final_outcome, rec.capture_time);
    }
    total.refresh_intervals();
    return total;
}

EnsembleStats run_ensemble(const Scenario& scenario) {
    validate(scenario);
    EnsembleStats total =
        EnsembleStats::for_window(scenario.profile.t_start, scenario.profile.t_end);
#ifdef _OPENMP
    const auto n = static_cast<std::int64_t>(scenario.n_trajectories);
#pragma omp parallel
    {
        EnsembleStats local =
            EnsembleStats::for_window(scenario.profile.t_start, scenario.profile.t_end);
#pragma omp for schedule(static) nowait
        for (std::int64_t i = 0; i < n; ++i) {
            const TrajectoryRecord rec = simulate(scenario, static_cast<std::uint64_t>(i));
            local.add(rec.final_outcome, rec.capture_time);
        }
#pragma omp critical
        total.merge(local);
    }
    total.refresh_intervals();
    return total;
#else
    return run_ensemble_serial(scenario);
#endif
}

OutcomeDistribution oracle_distribution(const Scenario& scenario, std::uint64_t n_steps) {
    validate(scenario);
    if (n_steps < 100)
        throw SimError(Errc::InvalidParameter, "oracle needs at least 100 steps");

    const CurrentProfile& prof = scenario.profile;
    const double horizon = horizon_of(scenario);
    const bool observed = scenario.observer_time.has_value();
    auto node = [&](std::uint64_t k) {
        if (k == n_steps)
            return horizon;
        return prof.t_start + (horizon - prof.t_start) *
                                  (static_cast<double>(k) / static_cast<double>(n_steps));
    };

    if (scenario.regime.kind == RegimeKind::ObserverOnly) {
        const double q = capture_probability(prof, horizon);
        return {q, 1.0 - q};
    }

    if (scenario.regime.kind == RegimeKind::SpontaneousRate) {
        const double rate = scenario.regime.spontaneous_rate;
        double survive = 1.0;
        double cap = 0.0;
        double nocap = 0.0;
        for (std::uint64_t k = 0; k < n_steps; ++k) {
            const double t0 = node(k);
            const double t1 = node(k + 1);
            const double step_survive = std::max(0.0, 1.0 - rate * (t1 - t0));
            const double mass = survive * (1.0 - step_survive);
            const double q = capture_probability(prof, 0.5 * (t0 + t1));
            cap += mass * q;
            nocap += mass * (1.0 - q);
            survive *= step_survive;
        }
        if (observed) {
            const double q = capture_probability(prof, horizon);
            cap += survive * q;
            nocap += survive * (1.0 - q);
        } else {
            nocap += survive; // terminal no-capture collapse
        }
        return {cap, nocap};
    }

    // Naive and QuantumJump: walk the capture-collapse tree over the window
    // up to the horizon.
    double survive = 1.0;
    double captured = 0.0;
    for (std::uint64_t k = 0; k < n_steps; ++k) {
        const double d_cum =
            capture_probability(prof, node(k + 1)) - capture_probability(prof, node(k));
        if (scenario.interpretation == RuleAInterpretation::UnconditionalDensity) {
            // increments of P(t) telescope, this sum is exact
            captured += d_cum;
            survive -= d_cum;
        } else {
            const double step_survive = std::max(0.0, 1.0 - d_cum);
            captured += survive * (1.0 - step_survive);
            survive *= step_survive;
        }
    }
    survive = std::max(0.0, survive);

    if (scenario.regime.kind == RegimeKind::Naive && observed) {
        // surviving mass is Born-split on the raw weights at the horizon
        const double q = capture_probability(prof, horizon);
        return {captured + survive * q, survive * (1.0 - q)};
    }
    // QuantumJump resolves surviving mass to no-capture whether observed or
    // not; unobserved Naive does the same through the terminal rule.
    return {captured, survive};
}

ComparisonReport compare(const EnsembleStats& stats, const OutcomeDistribution& exact,
                         double flag_threshold) {
    if (stats.n == 0)
        throw SimError(Errc::InvalidParameter, "comparison needs a nonempty ensemble");
    ComparisonReport report;
    const Outcome outcomes[2] = {Outcome::CaptureObserved, Outcome::NoCaptureObserved};
    const double exacts[2] = {exact.p_capture, exact.p_no_capture};
    for (int i = 0; i < 2; ++i) {
        OutcomeComparison& row = report.rows[i];
        row.outcome = outcomes[i];
        row.count = stats.count(outcomes[i]);
        row.frequency = stats.frequency(outcomes[i]);
        row.exact = exacts[i];
        const double se =
            std::sqrt(exacts[i] * (1.0 - exacts[i]) / static_cast<double>(stats.n));
        if (se > 0.0) {
            row.z = (row.frequency - row.exact) / se;
        } else if (row.frequency == row.exact) {
            row.z = 0.0;
        } else {
            row.z = row.frequency > row.exact ? std::numeric_limits<double>::infinity()
                                              : -std::numeric_limits<double>::infinity();
        }
        row.flagged = std::abs(row.z) > flag_threshold;
        report.any_flagged = report.any_flagged || row.flagged;
    }
    return report;
}

} // namespace cmc
