#include "cmc/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace cmc {
namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143268;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

// Fraction of the unit Gaussian falling inside the window; the truncated
// pulse is renormalized by this factor.
double gaussian_window_mass(const GaussianPulseCurrent& g, double t_start, double t_end) {
    const double za = (t_start - g.center) / g.width;
    const double zb = (t_end - g.center) / g.width;
    return normal_cdf(zb) - normal_cdf(za);
}

double trapezoid_mass(double r0, double r1, double dt) {
    return 0.5 * (r0 + r1) * dt;
}

// Running integral of a linear segment starting at rate j0 with slope s,
// evaluated tau past the segment start.
double segment_cumulative(double j0, double s, double tau) {
    return j0 * tau + 0.5 * s * tau * tau;
}

// Inverse of segment_cumulative, written in the numerically stable
// quadratic form (no cancellation when s*target is small against j0^2).
double segment_invert(double j0, double s, double target) {
    const double disc = std::max(0.0, j0 * j0 + 2.0 * s * target);
    return 2.0 * target / (j0 + std::sqrt(disc));
}

std::string num_str(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace

CurrentProfile make_constant(double rate, double t_start, double t_end) {
    return {ConstantCurrent{rate}, t_start, t_end};
}

CurrentProfile make_linear_ramp(double rate_start, double rate_end, double t_start, double t_end) {
    return {LinearRampCurrent{rate_start, rate_end}, t_start, t_end};
}

CurrentProfile make_gaussian_pulse(double center, double width, double area,
                                   double t_start, double t_end) {
    return {GaussianPulseCurrent{center, width, area}, t_start, t_end};
}

CurrentProfile make_tabulated(std::vector<double> times, std::vector<double> rates) {
    if (times.size() < 2 || times.size() != rates.size())
        throw SimError(Errc::InvalidParameter,
                       "tabulated profile needs at least two (time, rate) nodes");
    const double t0 = times.front();
    const double t1 = times.back();
    return {TabulatedCurrent{std::move(times), std::move(rates)}, t0, t1};
}

void validate(const CurrentProfile& profile) {
    auto require_finite = [](double v, const char* name) {
        if (!std::isfinite(v))
            throw SimError(Errc::InvalidParameter, std::string(name) + " is not finite");
    };
    require_finite(profile.t_start, "t_start");
    require_finite(profile.t_end, "t_end");
    if (!(profile.t_start < profile.t_end))
        throw SimError(Errc::WindowInverted,
                       "interaction window is inverted: t_start >= t_end");

    std::visit(
        overloaded{
            [&](const ConstantCurrent& c) {
                require_finite(c.rate, "rate");
                if (c.rate < 0.0)
                    throw SimError(Errc::NegativeCurrent,
                                   "negative current at t = " + num_str(profile.t_start),
                                   profile.t_start);
            },
            [&](const LinearRampCurrent& r) {
                require_finite(r.rate_start, "rate_start");
                require_finite(r.rate_end, "rate_end");
                if (r.rate_start < 0.0)
                    throw SimError(Errc::NegativeCurrent,
                                   "negative current at t = " + num_str(profile.t_start),
                                   profile.t_start);
                if (r.rate_end < 0.0)
                    throw SimError(Errc::NegativeCurrent,
                                   "negative current at t = " + num_str(profile.t_end),
                                   profile.t_end);
            },
            [&](const GaussianPulseCurrent& g) {
                require_finite(g.center, "center");
                require_finite(g.width, "width");
                require_finite(g.area, "area");
                if (!(g.width > 0.0))
                    throw SimError(Errc::InvalidParameter, "pulse width must be positive");
                if (g.area < 0.0)
                    throw SimError(Errc::NegativeCurrent,
                                   "negative current at t = " + num_str(g.center), g.center);
                if (!(gaussian_window_mass(g, profile.t_start, profile.t_end) > 0.0))
                    throw SimError(Errc::InvalidParameter,
                                   "pulse mass inside the window vanishes");
            },
            [&](const TabulatedCurrent& tab) {
                if (tab.times.size() < 2 || tab.times.size() != tab.rates.size())
                    throw SimError(Errc::InvalidParameter,
                                   "tabulated profile needs at least two (time, rate) nodes");
                for (std::size_t i = 0; i < tab.times.size(); ++i) {
                    require_finite(tab.times[i], "grid time");
                    require_finite(tab.rates[i], "grid rate");
                    if (i > 0 && !(tab.times[i - 1] < tab.times[i]))
                        throw SimError(Errc::InvalidParameter,
                                       "grid times must be strictly increasing");
                    if (tab.rates[i] < 0.0)
                        throw SimError(Errc::NegativeCurrent,
                                       "negative current at t = " + num_str(tab.times[i]),
                                       tab.times[i]);
                }
                if (tab.times.front() != profile.t_start || tab.times.back() != profile.t_end)
                    throw SimError(Errc::InvalidParameter,
                                   "grid must span the window exactly");
            },
        },
        profile.shape);

    const double total = total_capture_probability(profile);
    if (total > 1.0 + 1e-12)
        throw SimError(Errc::TotalProbabilityExceedsOne,
                       "total capture probability exceeds one: " + num_str(total), total);
}

double current(const CurrentProfile& profile, double t) {
    if (t < profile.t_start || t > profile.t_end)
        return 0.0;
    return std::visit(
        overloaded{
            [&](const ConstantCurrent& c) { return c.rate; },
            [&](const LinearRampCurrent& r) {
                const double f = (t - profile.t_start) / (profile.t_end - profile.t_start);
                return r.rate_start + (r.rate_end - r.rate_start) * f;
            },
            [&](const GaussianPulseCurrent& g) {
                const double z = (t - g.center) / g.width;
                const double mass = gaussian_window_mass(g, profile.t_start, profile.t_end);
                return g.area * kInvSqrt2Pi * std::exp(-0.5 * z * z) / (g.width * mass);
            },
            [&](const TabulatedCurrent& tab) {
                auto it = std::upper_bound(tab.times.begin(), tab.times.end(), t);
                if (it == tab.times.begin())
                    return tab.rates.front();
                if (it == tab.times.end())
                    return tab.rates.back();
                const auto i = static_cast<std::size_t>(it - tab.times.begin()) - 1;
                const double f = (t - tab.times[i]) / (tab.times[i + 1] - tab.times[i]);
                return tab.rates[i] + (tab.rates[i + 1] - tab.rates[i]) * f;
            },
        },
        profile.shape);
}

double capture_probability(const CurrentProfile& profile, double t) {
    if (t <= profile.t_start)
        return 0.0;
    if (t >= profile.t_end)
        return total_capture_probability(profile);
    return std::visit(
        overloaded{
            [&](const ConstantCurrent& c) { return c.rate * (t - profile.t_start); },
            [&](const LinearRampCurrent& r) {
                const double s =
                    (r.rate_end - r.rate_start) / (profile.t_end - profile.t_start);
                return segment_cumulative(r.rate_start, s, t - profile.t_start);
            },
            [&](const GaussianPulseCurrent& g) {
                const double za = (profile.t_start - g.center) / g.width;
                const double zt = (t - g.center) / g.width;
                const double mass = gaussian_window_mass(g, profile.t_start, profile.t_end);
                return g.area * (normal_cdf(zt) - normal_cdf(za)) / mass;
            },
            [&](const TabulatedCurrent& tab) {
                double acc = 0.0;
                for (std::size_t i = 0; i + 1 < tab.times.size(); ++i) {
                    const double t0 = tab.times[i];
                    const double t1 = tab.times[i + 1];
                    if (t >= t1) {
                        acc += trapezoid_mass(tab.rates[i], tab.rates[i + 1], t1 - t0);
                        continue;
                    }
                    const double s = (tab.rates[i + 1] - tab.rates[i]) / (t1 - t0);
                    acc += segment_cumulative(tab.rates[i], s, t - t0);
                    break;
                }
                return acc;
            },
        },
        profile.shape);
}

double total_capture_probability(const CurrentProfile& profile) {
    const double span = profile.t_end - profile.t_start;
    return std::visit(
        overloaded{
            [&](const ConstantCurrent& c) { return c.rate * span; },
            [&](const LinearRampCurrent& r) {
                return trapezoid_mass(r.rate_start, r.rate_end, span);
            },
            [&](const GaussianPulseCurrent& g) { return g.area; },
            [&](const TabulatedCurrent& tab) {
                double acc = 0.0;
                for (std::size_t i = 0; i + 1 < tab.times.size(); ++i)
                    acc += trapezoid_mass(tab.rates[i], tab.rates[i + 1],
                                          tab.times[i + 1] - tab.times[i]);
                return acc;
            },
        },
        profile.shape);
}

double invert_capture_probability(const CurrentProfile& profile, double target) {
    const double total = total_capture_probability(profile);
    if (!(target >= 0.0) || target > total)
        throw SimError(Errc::InvalidParameter,
                       "inversion target outside [0, total capture probability]", target);
    if (target <= 0.0)
        return profile.t_start;
    if (target >= total)
        return profile.t_end;
    const double t = std::visit(
        overloaded{
            [&](const ConstantCurrent& c) { return profile.t_start + target / c.rate; },
            [&](const LinearRampCurrent& r) {
                const double s =
                    (r.rate_end - r.rate_start) / (profile.t_end - profile.t_start);
                return profile.t_start + segment_invert(r.rate_start, s, target);
            },
            [&](const GaussianPulseCurrent&) {
                double lo = profile.t_start;
                double hi = profile.t_end;
                const double span = hi - lo;
                for (int i = 0; i < 200 && hi - lo > 1e-15 * span; ++i) {
                    const double mid = 0.5 * (lo + hi);
                    (capture_probability(profile, mid) < target ? lo : hi) = mid;
                }
                return 0.5 * (lo + hi);
            },
            [&](const TabulatedCurrent& tab) {
                double acc = 0.0;
                for (std::size_t i = 0; i + 1 < tab.times.size(); ++i) {
                    const double t0 = tab.times[i];
                    const double t1 = tab.times[i + 1];
                    const double mass = trapezoid_mass(tab.rates[i], tab.rates[i + 1], t1 - t0);
                    if (acc + mass < target) {
                        acc += mass;
                        continue;
                    }
                    const double local = target - acc;
                    if (local <= 0.0)
                        return t0;
                    const double s = (tab.rates[i + 1] - tab.rates[i]) / (t1 - t0);
                    if (s == 0.0)
                        return tab.rates[i] > 0.0 ? t0 + local / tab.rates[i] : t1;
                    return std::min(t1, t0 + segment_invert(tab.rates[i], s, local));
                }
                return profile.t_end;
            },
        },
        profile.shape);
    return std::clamp(t, profile.t_start, profile.t_end);
}

TwoComponentState state_at(const CurrentProfile& profile, double t) {
    if (t < profile.t_start)
        throw SimError(Errc::InvalidParameter, "state queried before interaction onset", t);
    const double q = capture_probability(profile, t);
    return {1.0 - q, q, CollapseStatus::Superposed, t};
}

TwoComponentState collapsed_capture(double t) {
    return {0.0, 1.0, CollapseStatus::CollapsedCapture, t};
}

TwoComponentState collapsed_no_capture(double t) {
    return {1.0, 0.0, CollapseStatus::CollapsedNoCapture, t};
}

} // namespace cmc
