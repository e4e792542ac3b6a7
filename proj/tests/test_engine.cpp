#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cmc/engine.hpp"
#include "cmc/scenario_io.hpp"

using namespace cmc;

namespace {

template <typename Fn>
Errc code_of(Fn&& fn) {
    try {
        fn();
    } catch (const SimError& e) {
        return e.code();
    }
    FAIL("expected a SimError");
    return Errc::InvalidParameter;
}

Scenario small(const char* preset, std::uint64_t n = 20000) {
    Scenario s = preset_scenario(preset);
    s.n_trajectories = n;
    return s;
}

} // namespace

TEST_CASE("scenario validation covers the scenario-level invariants") {
    Scenario s = preset_scenario("fig1");
    CHECK_NOTHROW(validate(s));

    s.observer_time = 12.0;
    CHECK(code_of([&] { validate(s); }) == Errc::InvalidParameter);
    s.observer_time = 0.0; // must be strictly past onset
    CHECK(code_of([&] { validate(s); }) == Errc::InvalidParameter);
    s.observer_time = 10.0; // the window end is allowed
    CHECK_NOTHROW(validate(s));

    s = preset_scenario("fig1");
    s.n_trajectories = 0;
    CHECK(code_of([&] { validate(s); }) == Errc::InvalidParameter);

    s = preset_scenario("grw-timing");
    s.regime.spontaneous_rate = -0.1;
    CHECK(code_of([&] { validate(s); }) == Errc::NegativeRate);

    s = preset_scenario("fig1");
    s.profile = make_constant(0.2, 0.0, 10.0);
    CHECK(code_of([&] { validate(s); }) == Errc::TotalProbabilityExceedsOne);
}

TEST_CASE("trajectory records are well formed in every regime") {
    for (const char* name :
         {"fig1", "fig1-observer-only", "fig1-quantum-jump", "no-observer", "grw-timing"}) {
        const Scenario s = preset_scenario(name);
        for (std::uint64_t i = 0; i < 3000; ++i) {
            const TrajectoryRecord rec = run_trajectory(s, i);
            REQUIRE(!rec.events.empty());
            CHECK(rec.final_outcome != Outcome::SuperpositionIntact);
            for (std::size_t k = 1; k < rec.events.size(); ++k)
                CHECK(rec.events[k - 1].t < rec.events[k].t);
            for (const TrajectoryEvent& ev : rec.events) {
                CHECK(ev.t >= s.profile.t_start);
                CHECK(ev.t <= s.profile.t_end);
            }
            // terminal event agrees with the recorded outcome
            const TrajectoryEvent& last = rec.events.back();
            switch (last.kind) {
            case EventKind::ObserverMeasurement:
                REQUIRE(last.observed.has_value());
                CHECK(*last.observed == rec.final_outcome);
                break;
            case EventKind::RuleBCollapse:
                CHECK(rec.final_outcome == Outcome::NoCaptureObserved);
                break;
            case EventKind::RuleACollapse:
                CHECK(rec.final_outcome == Outcome::CaptureObserved);
                break;
            case EventKind::SpontaneousCollapse:
                break; // Born outcome not recorded on the event itself
            }
            if (rec.capture_time) {
                CHECK(rec.final_outcome == Outcome::CaptureObserved);
                CHECK((rec.events[0].kind == EventKind::RuleACollapse ||
                       rec.events[0].kind == EventKind::SpontaneousCollapse));
                CHECK(rec.events[0].t == *rec.capture_time);
            }
        }
    }
}

TEST_CASE("trajectories are pure functions of scenario and index") {
    const Scenario s = preset_scenario("fig1");
    CHECK(run_trajectory(s, 5) == run_trajectory(s, 5));
    CHECK(run_trajectory(s, 123456) == run_trajectory(s, 123456));
}

TEST_CASE("a quantum-jump trajectory without a jump reports no capture") {
    const Scenario s = preset_scenario("fig1-quantum-jump");
    for (std::uint64_t i = 0; i < 5000; ++i) {
        const TrajectoryRecord rec = run_trajectory(s, i);
        bool jumped = false;
        for (const TrajectoryEvent& ev : rec.events)
            jumped = jumped || ev.kind == EventKind::RuleACollapse;
        if (!jumped)
            CHECK(rec.final_outcome == Outcome::NoCaptureObserved);
        else
            CHECK(rec.final_outcome == Outcome::CaptureObserved);
    }
}

TEST_CASE("an observer sitting at the window end preempts the terminal rule") {
    Scenario s = preset_scenario("fig1");
    s.observer_time = 10.0;
    for (std::uint64_t i = 0; i < 2000; ++i) {
        const TrajectoryRecord rec = run_trajectory(s, i);
        for (const TrajectoryEvent& ev : rec.events)
            CHECK(ev.kind != EventKind::RuleBCollapse);
        CHECK(rec.events.back().kind == EventKind::ObserverMeasurement);
    }
}

TEST_CASE("oracle reproduces the naive regime's inflated capture rate") {
    const OutcomeDistribution d = oracle_distribution(preset_scenario("fig1"));
    CHECK(std::abs(d.p_capture - 0.75) < 1e-12);
    CHECK(std::abs(d.p_no_capture - 0.25) < 1e-12);
    CHECK(std::abs(d.p_capture + d.p_no_capture - 1.0) < 1e-12);
}

TEST_CASE("oracle keeps the consistent regimes at one half") {
    // P(25/3) = 0.5 exactly, so the Born split is exact
    const OutcomeDistribution born =
        oracle_distribution(preset_scenario("fig1-observer-only"));
    CHECK(born.p_capture == 0.5);
    const OutcomeDistribution jump =
        oracle_distribution(preset_scenario("fig1-quantum-jump"));
    CHECK(std::abs(jump.p_capture - 0.5) < 1e-12);
}

TEST_CASE("oracle handles the terminal rule and both rule A readings") {
    const Scenario s = preset_scenario("no-observer");
    const OutcomeDistribution unconditional = oracle_distribution(s);
    CHECK(std::abs(unconditional.p_capture - 0.6) < 1e-12);

    Scenario hazard = s;
    hazard.interpretation = RuleAInterpretation::HazardRate;
    // survival-product tree converges O(1/n_steps) to 1 - exp(-0.6)
    const double exact = 0.45118836390597361;
    CHECK(std::abs(oracle_distribution(hazard, 1000).p_capture - exact) < 1e-3);
    CHECK(std::abs(oracle_distribution(hazard, 200000).p_capture - exact) < 1e-6);

    CHECK(code_of([&] { oracle_distribution(s, 99); }) == Errc::InvalidParameter);
}

TEST_CASE("oracle matches the closed form for spontaneous collapses") {
    // capture mass: integral of r exp(-r t) P(t) over [0, 10] with
    // P(t) = 0.06 t and r = 0.1 gives 0.06 (1 - 2/e) / 0.1
    const double exact = 0.15854467059426917;
    const OutcomeDistribution d =
        oracle_distribution(preset_scenario("grw-timing"), 100000);
    CHECK(std::abs(d.p_capture - exact) < 1e-5);
    CHECK(std::abs(d.p_capture + d.p_no_capture - 1.0) < 1e-12);
}

TEST_CASE("oracle capture probability follows the double-count closed form") {
    // for the naive regime with a flat pulse, capture probability is
    // q + (1 - q) q where q is the cumulative at the observation time
    for (const double q : {0.1, 0.3, 0.5, 0.7}) {
        Scenario s = preset_scenario("fig1");
        const double rate = (q + 0.2) / 10.0;
        s.profile = make_constant(rate, 0.0, 10.0);
        s.observer_time = q / rate;
        const OutcomeDistribution d = oracle_distribution(s);
        CHECK(std::abs(d.p_capture - (q + (1.0 - q) * q)) < 1e-6);
    }
}

TEST_CASE("observer-only without an observer time measures at the window end") {
    Scenario s = preset_scenario("fig1-observer-only");
    s.observer_time.reset();
    CHECK(oracle_distribution(s).p_capture == 0.6);
    s.n_trajectories = 20000;
    const EnsembleStats stats = run_ensemble(s);
    CHECK(std::abs(stats.frequency(Outcome::CaptureObserved) - 0.6) < 0.02);
}

TEST_CASE("ensembles agree with their oracles across presets and readings") {
    for (const char* name :
         {"fig1", "fig1-observer-only", "fig1-quantum-jump", "no-observer", "grw-timing"}) {
        for (const auto interp : {RuleAInterpretation::UnconditionalDensity,
                                  RuleAInterpretation::HazardRate}) {
            Scenario s = small(name);
            s.interpretation = interp;
            const ComparisonReport report =
                compare(run_ensemble(s), oracle_distribution(s));
            for (const OutcomeComparison& row : report.rows) {
                CHECK(std::abs(row.z) < 5.0);
                CHECK(!row.flagged);
            }
            CHECK(!report.any_flagged);
        }
    }
}

TEST_CASE("scoring the naive ensemble against the Born oracle flags the clash") {
    const Scenario s = small("fig1");
    const ComparisonReport report =
        compare(run_ensemble(s), oracle_distribution(preset_scenario("fig1-observer-only")));
    CHECK(report.any_flagged);
    CHECK(report.rows[0].flagged);
    // (0.75 - 0.50) / sqrt(0.25 / 20000) is about +70
    CHECK(report.rows[0].z > 50.0);
    CHECK(report.rows[1].z < -50.0);
}

TEST_CASE("comparison handles zero-variance oracles") {
    EnsembleStats all = EnsembleStats::for_window(0.0, 10.0);
    for (int i = 0; i < 10; ++i)
        all.add(Outcome::CaptureObserved, std::nullopt);
    all.refresh_intervals();
    const ComparisonReport agree = compare(all, OutcomeDistribution{1.0, 0.0});
    CHECK(agree.rows[0].z == 0.0);
    CHECK(!agree.any_flagged);

    all.add(Outcome::NoCaptureObserved, std::nullopt);
    all.refresh_intervals();
    const ComparisonReport clash = compare(all, OutcomeDistribution{1.0, 0.0});
    CHECK(std::isinf(clash.rows[0].z));
    CHECK(clash.rows[0].z < 0.0);
    CHECK(clash.any_flagged);
}

TEST_CASE("a single-trajectory ensemble reports wide intervals and no flags") {
    Scenario s = small("fig1-observer-only", 1);
    const EnsembleStats stats = run_ensemble(s);
    CHECK(stats.n == 1);
    CHECK(stats.capture_ci.hi - stats.capture_ci.lo > 0.5);
    const ComparisonReport report = compare(stats, oracle_distribution(s));
    CHECK(!report.any_flagged); // |z| = 1 at worst
}

TEST_CASE("parallel, serial and merged ensembles are identical") {
    const Scenario s = small("fig1");
    const EnsembleStats serial = run_ensemble_serial(s);
    const EnsembleStats parallel = run_ensemble(s);
    CHECK(serial == parallel);

#ifdef _OPENMP
    const int before = omp_get_max_threads();
    for (const int threads : {1, 3, 8}) {
        omp_set_num_threads(threads);
        CHECK(run_ensemble(s) == serial);
    }
    omp_set_num_threads(before);
#endif

    // same tallies when the index range is split by hand
    Scenario first_half = s;
    first_half.n_trajectories = 10000;
    EnsembleStats merged = run_ensemble(first_half);
    EnsembleStats second = EnsembleStats::for_window(s.profile.t_start, s.profile.t_end);
    for (std::uint64_t i = 10000; i < 20000; ++i) {
        const TrajectoryRecord rec = run_trajectory(s, i);
        second.add(rec.final_outcome, rec.capture_time);
    }
    merged.merge(second);
    CHECK(merged == serial);
}

TEST_CASE("naive capture counts split between collapse and observer channels") {
    const Scenario s = small("fig1", 50000);
    const EnsembleStats stats = run_ensemble(s);
    std::uint64_t collapsed = 0;
    for (const auto c : stats.capture_time_histogram)
        collapsed += c;
    // rule A accounts for P(t_obs) = 0.5 of the trajectories, the observer
    // lifts the total to 0.75
    const double n = static_cast<double>(s.n_trajectories);
    CHECK(std::abs(static_cast<double>(collapsed) / n - 0.5) < 5.0 * std::sqrt(0.25 / n));
    CHECK(stats.count(Outcome::CaptureObserved) > collapsed);
}
