#ifndef CMC_ERROR_HPP
#define CMC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cmc {

// Error identities surfaced by validation and by the stochastic rules.
enum class Errc {
    NegativeCurrent,
    WindowInverted,
    TotalProbabilityExceedsOne,
    InvalidDraw,
    NegativeRate,
    RuleBBeforeEnd,
    AlreadyCollapsed,
    InvalidParameter,
    UnknownPreset,
    ParseError,
};

class SimError : public std::runtime_error {
public:
    SimError(Errc code, const std::string& what, double detail = 0.0)
        : std::runtime_error(what), code_(code), detail_(detail) {}

    Errc code() const noexcept { return code_; }

    // Offending value when there is one: the time at which a current went
    // negative, the excess total probability, the out-of-range draw.
    double detail() const noexcept { return detail_; }

private:
    Errc code_;
    double detail_;
};

// Scenario-document error carrying a 1-based source line.
class ParseError : public SimError {
public:
    ParseError(int line, const std::string& what)
        : SimError(Errc::ParseError, "line " + std::to_string(line) + ": " + what),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

} // namespace cmc

#endif
