// errors.hpp — exception types shared across the library

#pragma once

#include <stdexcept>
#include <string>

namespace gapengine {

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Carries the best error reached so callers can report it.
struct FitError : std::runtime_error {
    FitError(const std::string& what, double best) : std::runtime_error(what), best_error(best) {}
    double best_error;
};

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InstabilityError : std::runtime_error {
    InstabilityError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
    double time;
};

struct InsufficientSpan : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DepthInsufficient : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct AssemblyError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace gapengine
