// sweep.hpp — per-point solver assembly, parallel sweeps, depth convergence scans, CSV output

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gapengine/config.hpp"
#include "gapengine/decomposition.hpp"
#include "gapengine/observables.hpp"

namespace gapengine {

// Fitted decompositions of the enabled baths (shared read-only by all sweep points).
struct PreparedBaths {
    std::vector<BathDecomposition> decompositions;
    double c_slow0{1.0};
    double c_fast0{1.0};
};

PreparedBaths prepare_baths(const RunConfig& cfg);

// Builds the time-stepping solver for one driving frequency. The returned object keeps
// whatever model data it needs alive.
std::unique_ptr<Dynamics> make_dynamics(const RunConfig& cfg, const PreparedBaths& baths, double omega_s);

struct PointResult {
    double omega_s{0.0};
    SteadyStateReport report;
    std::optional<double> eta;
    std::string status{"ok"}; // ok | timeout | blowup | fit_failure | error: ...
    double wall_seconds{0.0};

    bool ok() const { return status == "ok"; }
};

PointResult run_point(const RunConfig& cfg, const PreparedBaths& baths, double omega_s);

struct SweepResult {
    RunConfig config;
    std::vector<PointResult> rows; // grid order
    std::string config_hash;
    double wall_seconds{0.0};

    bool all_ok() const;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total, const PointResult&)>;

// Points run independently on cfg.threads workers; rows come back in grid order.
SweepResult run_sweep(const RunConfig& cfg, const ProgressFn& progress = {});

struct ConvergenceRow {
    std::size_t depth{0};
    double mean_slow{0.0};
    double mean_fast{0.0};
    double change_to_next{0.0}; // relative change of the currents versus depth + 1
    std::string status;
};

struct ConvergenceScan {
    std::vector<ConvergenceRow> rows;
    std::optional<std::size_t> converged_depth;
};

// Smallest depth whose period-averaged currents change by < rel_tol against the next depth.
ConvergenceScan convergence_scan(const RunConfig& cfg, const PreparedBaths& baths, double omega_s,
                                 const std::vector<std::size_t>& depths, double rel_tol = 0.01);

std::string csv_header();
std::string csv_row(const RunConfig& cfg, const PointResult& p);

struct OutputPaths {
    std::string csv;
    std::string resonances;
    std::string provenance;
    std::vector<std::string> traces;
};

// Writes <dir>/<name>.csv, <name>_resonances.csv, <name>_provenance.txt and, when enabled,
// <name>_trace_<i>.csv. Throws std::runtime_error with the offending path on I/O failure.
OutputPaths emit_outputs(const SweepResult& result, const std::string& dir);

inline constexpr const char* kVersion = "1.0.0";

} // namespace gapengine
