// collapsemc command line: run ensembles, trace profiles, print oracle
// distributions, and score ensembles against oracles.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "cmc/scenario_io.hpp"

namespace {

struct ScenarioArgs {
    std::string file;
    std::string preset;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    bool has_n = false;
    bool has_seed = false;
};

void add_scenario_options(CLI::App* cmd, ScenarioArgs& args, bool with_overrides) {
    CLI::Option* file = cmd->add_option("--scenario", args.file, "scenario document to load");
    CLI::Option* preset =
        cmd->add_option("--preset", args.preset, "built-in scenario name");
    file->excludes(preset);
    preset->excludes(file);
    if (with_overrides) {
        cmd->add_option("--n", args.n, "override the trajectory count")
            ->each([&](const std::string&) { args.has_n = true; });
        cmd->add_option("--seed", args.seed, "override the master seed")
            ->each([&](const std::string&) { args.has_seed = true; });
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw cmc::SimError(cmc::Errc::InvalidParameter, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

cmc::Scenario load_scenario(const ScenarioArgs& args) {
    if (args.file.empty() && args.preset.empty())
        throw cmc::SimError(cmc::Errc::InvalidParameter,
                            "either --scenario or --preset is required");
    cmc::Scenario s = args.preset.empty() ? cmc::parse_scenario(read_file(args.file))
                                          : cmc::preset_scenario(args.preset);
    if (args.has_n)
        s.n_trajectories = args.n;
    if (args.has_seed)
        s.master_seed = args.seed;
    cmc::validate(s);
    return s;
}

// Relative --out paths land under COLLAPSEMC_OUT_DIR when it is set; an
// empty --out means stdout.
void write_output(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::filesystem::path path(out);
    if (path.is_relative())
        if (const char* dir = std::getenv("COLLAPSEMC_OUT_DIR"))
            path = std::filesystem::path(dir) / path;
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw cmc::SimError(cmc::Errc::InvalidParameter,
                            "cannot write '" + path.string() + "'");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
}

int score_and_emit(const cmc::Scenario& scenario, const cmc::Scenario& oracle_scenario,
                   std::uint64_t steps, const std::string& out, bool strict,
                   bool summary) {
    const cmc::EnsembleStats stats = cmc::run_ensemble(scenario);
    const cmc::OutcomeDistribution exact =
        cmc::oracle_distribution(oracle_scenario, steps);
    const cmc::ComparisonReport report = cmc::compare(stats, exact);
    write_output(out, cmc::emit_report(stats, report));
    if (summary) {
        for (const cmc::OutcomeComparison& row : report.rows)
            std::fprintf(stderr, "%s: count=%llu freq=%.6f oracle=%.6f z=%+.3f%s\n",
                         std::string(cmc::to_string(row.outcome)).c_str(),
                         static_cast<unsigned long long>(row.count), row.frequency,
                         row.exact, row.z, row.flagged ? "  FLAGGED" : "");
        std::fprintf(stderr, report.any_flagged
                                 ? "deviation beyond 5 sigma detected\n"
                                 : "empirical distribution consistent with oracle\n");
    }
    return report.any_flagged && strict ? 2 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-event collapse-timing Monte Carlo laboratory"};
    app.require_subcommand(1);

    ScenarioArgs run_args;
    std::string run_out;
    bool run_strict = false;
    std::uint64_t run_steps = 1000;
    CLI::App* run = app.add_subcommand("run", "simulate an ensemble and emit the report");
    add_scenario_options(run, run_args, true);
    run->add_option("--out", run_out, "report destination (default stdout)");
    run->add_option("--steps", run_steps, "oracle tree steps");
    run->add_flag("--strict", run_strict, "exit 2 when any |z| > 5");

    ScenarioArgs trace_args;
    std::string trace_out;
    std::size_t trace_points = 101;
    CLI::App* trace =
        app.add_subcommand("trace", "tabulate the current and its running integral");
    add_scenario_options(trace, trace_args, false);
    trace->add_option("--points", trace_points, "number of sample times");
    trace->add_option("--out", trace_out, "trace destination (default stdout)");

    ScenarioArgs oracle_args;
    std::uint64_t oracle_steps = 1000;
    std::string oracle_out;
    CLI::App* oracle =
        app.add_subcommand("oracle", "print the exact outcome distribution");
    add_scenario_options(oracle, oracle_args, false);
    oracle->add_option("--steps", oracle_steps, "probability tree steps");
    oracle->add_option("--out", oracle_out, "destination (default stdout)");

    ScenarioArgs cmp_args;
    std::string cmp_out;
    std::string cmp_oracle_preset;
    bool cmp_strict = false;
    std::uint64_t cmp_steps = 1000;
    CLI::App* cmp =
        app.add_subcommand("compare", "score an ensemble against an oracle");
    add_scenario_options(cmp, cmp_args, true);
    cmp->add_option("--oracle-preset", cmp_oracle_preset,
                    "score against this preset's oracle instead of the scenario's own");
    cmp->add_option("--out", cmp_out, "report destination (default stdout)");
    cmp->add_option("--steps", cmp_steps, "oracle tree steps");
    cmp->add_flag("--strict", cmp_strict, "exit 2 when any |z| > 5");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        (void)app.exit(e);
        return 1;
    }

    try {
        if (run->parsed()) {
            const cmc::Scenario s = load_scenario(run_args);
            return score_and_emit(s, s, run_steps, run_out, run_strict, false);
        }
        if (trace->parsed()) {
            const cmc::Scenario s = load_scenario(trace_args);
            write_output(trace_out, cmc::emit_trace(s.profile, trace_points));
            return 0;
        }
        if (oracle->parsed()) {
            const cmc::Scenario s = load_scenario(oracle_args);
            const cmc::OutcomeDistribution d = cmc::oracle_distribution(s, oracle_steps);
            char buf[128];
            std::snprintf(buf, sizeof buf, "outcome,probability\n%s,%.17g\n%s,%.17g\n",
                          "CaptureObserved", d.p_capture, "NoCaptureObserved",
                          d.p_no_capture);
            write_output(oracle_out, buf);
            return 0;
        }
        const cmc::Scenario s = load_scenario(cmp_args);
        const cmc::Scenario oracle_s =
            cmp_oracle_preset.empty() ? s : [&] {
                cmc::Scenario o = cmc::preset_scenario(cmp_oracle_preset);
                cmc::validate(o);
                return o;
            }();
        return score_and_emit(s, oracle_s, cmp_steps, cmp_out, cmp_strict, true);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
