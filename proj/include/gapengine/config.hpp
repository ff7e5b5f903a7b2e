// config.hpp — run configuration: INI loading, validation and assembly checks
//
// Sections: [system] [sweep] [slow] [fast] [solver] [output] [run]. Every key is optional
// except system.omega0 and the two bath blocks' kappa/omega_c/temperature.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gapengine/bath.hpp"
#include "gapengine/dynamics.hpp"
#include "gapengine/floquet.hpp"
#include "gapengine/hierarchy.hpp"
#include "gapengine/tls.hpp"

namespace gapengine {

// Carries every violated constraint, one message per entry.
struct ConfigError : std::runtime_error {
    explicit ConfigError(std::vector<std::string> problems);
    std::vector<std::string> problems;
};

struct BathConfig {
    bool enabled{true};
    BathSpec spec;
};

struct RunConfig {
    DrivenTLS tls;                  // omega_s is overwritten per grid point
    std::vector<double> omega_grid; // strictly increasing
    BathConfig slow;
    BathConfig fast;
    BathLabel hot{BathLabel::Fast};

    SolverKind solver{SolverKind::Heom};
    std::size_t depth{4};
    double step{0.0};    // <= 0: default_step
    double filter{1e-7};
    InitialState initial{InitialState::Ground};
    double fit_tol{1e-5};
    double fit_window{0.0}; // <= 0: max(50, 3 x memory time)
    double steady_tol{1e-4};
    double max_time{5000.0};
    RateWeighting weighting{RateWeighting::Prefactor};
    int k_max{-1};

    std::string name{"run"};
    std::string outdir{"."};
    bool traces{false};
    std::size_t trace_stride{10};
    std::size_t threads{1};

    std::string source_text; // raw file contents, used for the provenance hash

    BathLabel cold() const { return hot == BathLabel::Fast ? BathLabel::Slow : BathLabel::Fast; }
    const BathConfig& bath(BathLabel b) const { return b == BathLabel::Slow ? slow : fast; }
    std::vector<BathSpec> enabled_baths() const;

    // Re-checks every invariant (including the slow/fast label rule); throws ConfigError.
    void validate() const;
};

RunConfig parse_config(const std::string& text, const std::string& origin = "<string>");
RunConfig load_config(const std::string& path);

// "a:b:step" (inclusive, rounded to the step) or a comma-separated list.
std::vector<double> parse_grid(const std::string& spec);

// Applies "section.key=value" on top of the already-parsed configuration text.
RunConfig apply_overrides(const RunConfig& cfg, const std::vector<std::string>& assignments);

InitialState initial_from_string(const std::string& s);
const char* to_string(InitialState s);

// 64-bit FNV-1a of the configuration text, hex encoded.
std::string config_hash(const std::string& text);

} // namespace gapengine
