#ifndef CMC_SCENARIO_IO_HPP
#define CMC_SCENARIO_IO_HPP

#include <string>
#include <string_view>
#include <vector>

#include "cmc/engine.hpp"

namespace cmc {

// Scenario documents are a flat INI dialect:
//
//   # comment (anywhere; rest of line)
//   rule_a_interpretation = unconditional-density | hazard-rate
//   n_trajectories = 200000
//   master_seed = 42
//   observer_time = 8.33                # optional
//
//   [profile]
//   kind = constant | linear-ramp | gaussian-pulse | tabulated
//   t_start = 0
//   t_end = 10
//   rate = 0.06                         # params depend on kind
//   grid = 0:0 2:0.1 10:0               # tabulated nodes, time:rate
//
//   [regime]
//   name = naive | observer-only | quantum-jump | spontaneous-rate
//   rate = 0.1                          # spontaneous-rate only
//
// Unknown sections and keys are rejected with their line number; missing
// required pieces are reported by name; semantic violations surface from
// scenario validation. Omitted top-level fields take the defaults above
// (interpretation unconditional-density, n_trajectories 100000,
// master_seed 1, no observer).
Scenario parse_scenario(std::string_view text);

// Canonical document for a scenario; numbers carry 17 significant digits
// so parse(serialize(s)) == s exactly.
std::string serialize_scenario(const Scenario& scenario);

const std::vector<std::string>& preset_names();

// Built-in scenarios by name; UnknownPreset otherwise.
//   fig1                constant 0.06 current on [0, 10], observer at 25/3,
//                       naive regime, n = 200000
//   fig1-observer-only  same pulse, Born measurement only
//   fig1-quantum-jump   same pulse, conditioned no-jump reading
//   no-observer         same pulse, naive regime, terminal rule only
//   grw-timing          same pulse, spontaneous collapses at rate 0.1
Scenario preset_scenario(std::string_view name);
std::string preset_document(std::string_view name);

// CSV "t,current,cumulative_probability" on n_points uniform times over
// the window (first row t_start, last row exactly t_end). Requires
// n_points >= 2.
std::string emit_trace(const CurrentProfile& profile, std::size_t n_points);

// CSV "outcome,count,frequency,ci_lo,ci_hi,oracle,z", one row per outcome,
// capture first. Numbers carry 17 significant digits; lines end with LF.
std::string emit_report(const EnsembleStats& stats, const ComparisonReport& report);

std::string_view to_string(Outcome outcome);

} // namespace cmc

#endif
