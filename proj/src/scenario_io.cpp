#include "cmc/scenario_io.hpp"

#include <charconv>
#include <map>
#include <sstream>

namespace cmc {
namespace {

std::string fmt17(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string fmt_u64(std::uint64_t v) {
    char buf[24];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

using Section = std::map<std::string, Entry>;

struct Document {
    std::map<std::string, Section> sections; // "" holds top-level keys

    Entry* find(const std::string& section, const std::string& key) {
        auto s = sections.find(section);
        if (s == sections.end())
            return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end())
            return nullptr;
        k->second.used = true;
        return &k->second;
    }

    Entry& need(const std::string& section, const std::string& key) {
        Entry* e = find(section, key);
        if (!e) {
            const std::string where =
                section.empty() ? "document" : "section [" + section + "]";
            throw SimError(Errc::ParseError, where + " is missing key '" + key + "'");
        }
        return *e;
    }

    void reject_unused() const {
        for (const auto& [name, section] : sections)
            for (const auto& [key, entry] : section)
                if (!entry.used) {
                    const std::string where =
                        name.empty() ? "at top level" : "in section [" + name + "]";
                    throw ParseError(entry.line, "unexpected key '" + key + "' " + where);
                }
    }
};

Document split_document(std::string_view text) {
    Document doc;
    doc.sections[""];
    std::string current;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError(line_no, "unterminated section header");
            const std::string name(trim(line.substr(1, line.size() - 2)));
            if (name != "profile" && name != "regime")
                throw ParseError(line_no, "unknown section [" + name + "]");
            if (doc.sections.count(name))
                throw ParseError(line_no, "duplicate section [" + name + "]");
            doc.sections[name];
            current = name;
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(line_no, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty())
            throw ParseError(line_no, "empty key");
        if (value.empty())
            throw ParseError(line_no, "empty value for '" + key + "'");
        auto [it, inserted] = doc.sections[current].try_emplace(key, Entry{value, line_no});
        if (!inserted)
            throw ParseError(line_no, "duplicate key '" + key + "'");
    }
    return doc;
}

double parse_double(const Entry& e, const std::string& key) {
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    double v = 0.0;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw ParseError(e.line, "invalid number for '" + key + "'");
    return v;
}

std::uint64_t parse_u64(const Entry& e, const std::string& key) {
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    std::uint64_t v = 0;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw ParseError(e.line, "invalid count for '" + key + "'");
    return v;
}

ProfileShape parse_shape(Document& doc, const Entry& kind, double& t_start, double& t_end,
                         bool& window_from_grid) {
    window_from_grid = false;
    if (kind.value == "constant") {
        return ConstantCurrent{parse_double(doc.need("profile", "rate"), "rate")};
    }
    if (kind.value == "linear-ramp") {
        return LinearRampCurrent{
            parse_double(doc.need("profile", "rate_start"), "rate_start"),
            parse_double(doc.need("profile", "rate_end"), "rate_end")};
    }
    if (kind.value == "gaussian-pulse") {
        return GaussianPulseCurrent{parse_double(doc.need("profile", "center"), "center"),
                                    parse_double(doc.need("profile", "width"), "width"),
                                    parse_double(doc.need("profile", "area"), "area")};
    }
    if (kind.value == "tabulated") {
        const Entry& grid = doc.need("profile", "grid");
        TabulatedCurrent tab;
        std::istringstream tokens{grid.value};
        std::string token;
        while (tokens >> token) {
            const std::size_t colon = token.find(':');
            if (colon == std::string::npos)
                throw ParseError(grid.line, "grid nodes must be time:rate pairs");
            tab.times.push_back(
                parse_double(Entry{token.substr(0, colon), grid.line}, "grid"));
            tab.rates.push_back(
                parse_double(Entry{token.substr(colon + 1), grid.line}, "grid"));
        }
        if (tab.times.size() < 2)
            throw ParseError(grid.line, "grid needs at least two time:rate nodes");
        t_start = tab.times.front();
        t_end = tab.times.back();
        window_from_grid = true;
        // explicit window keys are allowed but must agree with the grid
        if (const Entry* e = doc.find("profile", "t_start"))
            if (parse_double(*e, "t_start") != t_start)
                throw ParseError(e->line, "t_start must match the first grid time");
        if (const Entry* e = doc.find("profile", "t_end"))
            if (parse_double(*e, "t_end") != t_end)
                throw ParseError(e->line, "t_end must match the last grid time");
        return tab;
    }
    throw ParseError(kind.line, "unknown profile kind '" + kind.value + "'");
}

Regime parse_regime(Document& doc) {
    const Entry& name = doc.need("regime", "name");
    if (name.value == "naive")
        return {RegimeKind::Naive, 0.0};
    if (name.value == "observer-only")
        return {RegimeKind::ObserverOnly, 0.0};
    if (name.value == "quantum-jump")
        return {RegimeKind::QuantumJump, 0.0};
    if (name.value == "spontaneous-rate")
        return {RegimeKind::SpontaneousRate,
                parse_double(doc.need("regime", "rate"), "rate")};
    throw ParseError(name.line, "unknown regime '" + name.value + "'");
}

std::string_view kind_name(const ProfileShape& shape) {
    switch (shape.index()) {
    case 0:
        return "constant";
    case 1:
        return "linear-ramp";
    case 2:
        return "gaussian-pulse";
    default:
        return "tabulated";
    }
}

std::string_view regime_name(RegimeKind kind) {
    switch (kind) {
    case RegimeKind::Naive:
        return "naive";
    case RegimeKind::ObserverOnly:
        return "observer-only";
    case RegimeKind::QuantumJump:
        return "quantum-jump";
    default:
        return "spontaneous-rate";
    }
}

Scenario fig1_base() {
    Scenario s;
    s.profile = make_constant(0.06, 0.0, 10.0);
    s.regime = {RegimeKind::Naive, 0.0};
    s.observer_time = 25.0 / 3.0;
    s.n_trajectories = 200000;
    s.master_seed = 42;
    s.interpretation = RuleAInterpretation::UnconditionalDensity;
    return s;
}

} // namespace

Scenario parse_scenario(std::string_view text) {
    Document doc = split_document(text);
    if (!doc.sections.count("profile"))
        throw SimError(Errc::ParseError, "document is missing the [profile] section");
    if (!doc.sections.count("regime"))
        throw SimError(Errc::ParseError, "document is missing the [regime] section");

    Scenario s;
    const Entry& kind = doc.need("profile", "kind");
    double t_start = 0.0;
    double t_end = 0.0;
    bool window_from_grid = false;
    s.profile.shape = parse_shape(doc, kind, t_start, t_end, window_from_grid);
    if (!window_from_grid) {
        t_start = parse_double(doc.need("profile", "t_start"), "t_start");
        t_end = parse_double(doc.need("profile", "t_end"), "t_end");
    }
    s.profile.t_start = t_start;
    s.profile.t_end = t_end;

    s.regime = parse_regime(doc);

    if (const Entry* e = doc.find("", "observer_time"))
        s.observer_time = parse_double(*e, "observer_time");
    if (const Entry* e = doc.find("", "rule_a_interpretation")) {
        if (e->value == "unconditional-density")
            s.interpretation = RuleAInterpretation::UnconditionalDensity;
        else if (e->value == "hazard-rate")
            s.interpretation = RuleAInterpretation::HazardRate;
        else
            throw ParseError(e->line,
                             "unknown rule_a_interpretation '" + e->value + "'");
    }
    if (const Entry* e = doc.find("", "n_trajectories"))
        s.n_trajectories = parse_u64(*e, "n_trajectories");
    if (const Entry* e = doc.find("", "master_seed"))
        s.master_seed = parse_u64(*e, "master_seed");

    doc.reject_unused();
    validate(s);
    return s;
}

std::string serialize_scenario(const Scenario& scenario) {
    std::string out;
    out += "rule_a_interpretation = ";
    out += scenario.interpretation == RuleAInterpretation::UnconditionalDensity
               ? "unconditional-density"
               : "hazard-rate";
    out += '\n';
    out += "n_trajectories = " + fmt_u64(scenario.n_trajectories) + '\n';
    out += "master_seed = " + fmt_u64(scenario.master_seed) + '\n';
    if (scenario.observer_time)
        out += "observer_time = " + fmt17(*scenario.observer_time) + '\n';

    out += "\n[profile]\n";
    out += "kind = ";
    out += kind_name(scenario.profile.shape);
    out += '\n';
    if (const auto* c = std::get_if<ConstantCurrent>(&scenario.profile.shape)) {
        out += "rate = " + fmt17(c->rate) + '\n';
    } else if (const auto* r = std::get_if<LinearRampCurrent>(&scenario.profile.shape)) {
        out += "rate_start = " + fmt17(r->rate_start) + '\n';
        out += "rate_end = " + fmt17(r->rate_end) + '\n';
    } else if (const auto* g = std::get_if<GaussianPulseCurrent>(&scenario.profile.shape)) {
        out += "center = " + fmt17(g->center) + '\n';
        out += "width = " + fmt17(g->width) + '\n';
        out += "area = " + fmt17(g->area) + '\n';
    } else if (const auto* tab = std::get_if<TabulatedCurrent>(&scenario.profile.shape)) {
        out += "grid =";
        for (std::size_t i = 0; i < tab->times.size(); ++i)
            out += ' ' + fmt17(tab->times[i]) + ':' + fmt17(tab->rates[i]);
        out += '\n';
    }
    if (!std::holds_alternative<TabulatedCurrent>(scenario.profile.shape)) {
        out += "t_start = " + fmt17(scenario.profile.t_start) + '\n';
        out += "t_end = " + fmt17(scenario.profile.t_end) + '\n';
    }

    out += "\n[regime]\n";
    out += "name = ";
    out += regime_name(scenario.regime.kind);
    out += '\n';
    if (scenario.regime.kind == RegimeKind::SpontaneousRate)
        out += "rate = " + fmt17(scenario.regime.spontaneous_rate) + '\n';
    return out;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "fig1", "fig1-observer-only", "fig1-quantum-jump", "no-observer", "grw-timing"};
    return names;
}

Scenario preset_scenario(std::string_view name) {
    if (name == "fig1")
        return fig1_base();
    if (name == "fig1-observer-only") {
        Scenario s = fig1_base();
        s.regime = {RegimeKind::ObserverOnly, 0.0};
        return s;
    }
    if (name == "fig1-quantum-jump") {
        Scenario s = fig1_base();
        s.regime = {RegimeKind::QuantumJump, 0.0};
        return s;
    }
    if (name == "no-observer") {
        Scenario s = fig1_base();
        s.observer_time.reset();
        return s;
    }
    if (name == "grw-timing") {
        Scenario s = fig1_base();
        s.observer_time.reset();
        s.regime = {RegimeKind::SpontaneousRate, 0.1};
        return s;
    }
    throw SimError(Errc::UnknownPreset, "unknown preset '" + std::string(name) + "'");
}

std::string preset_document(std::string_view name) {
    const Scenario s = preset_scenario(name); // validates the name first
    return "# preset " + std::string(name) + '\n' + serialize_scenario(s);
}

std::string emit_trace(const CurrentProfile& profile, std::size_t n_points) {
    if (n_points < 2)
        throw SimError(Errc::InvalidParameter, "trace needs at least two points");
    std::string out = "t,current,cumulative_probability\n";
    for (std::size_t i = 0; i < n_points; ++i) {
        const double t =
            i + 1 == n_points
                ? profile.t_end
                : profile.t_start + (profile.t_end - profile.t_start) *
                                        (static_cast<double>(i) /
                                         static_cast<double>(n_points - 1));
        out += fmt17(t) + ',' + fmt17(current(profile, t)) + ',' +
               fmt17(capture_probability(profile, t)) + '\n';
    }
    return out;
}

std::string emit_report(const EnsembleStats& stats, const ComparisonReport& report) {
    std::string out = "outcome,count,frequency,ci_lo,ci_hi,oracle,z\n";
    for (const OutcomeComparison& row : report.rows) {
        const ConfidenceInterval& ci = row.outcome == Outcome::CaptureObserved
                                           ? stats.capture_ci
                                           : stats.no_capture_ci;
        out += std::string(to_string(row.outcome)) + ',' + fmt_u64(row.count) + ',' +
               fmt17(row.frequency) + ',' + fmt17(ci.lo) + ',' + fmt17(ci.hi) + ',' +
               fmt17(row.exact) + ',' + fmt17(row.z) + '\n';
    }
    return out;
}

std::string_view to_string(Outcome outcome) {
    switch (outcome) {
    case Outcome::CaptureObserved:
        return "CaptureObserved";
    case Outcome::NoCaptureObserved:
        return "NoCaptureObserved";
    default:
        return "SuperpositionIntact";
    }
}

} // namespace cmc
