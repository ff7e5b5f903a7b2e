// gapengine_cli.cpp — command-line driver: load a preset, run the sweep, write CSV outputs

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gapengine/config.hpp"
#include "gapengine/errors.hpp"
#include "gapengine/sweep.hpp"

using namespace gapengine;

namespace {

std::vector<std::size_t> parse_depths(const std::string& s) {
    std::vector<std::size_t> out;
    for (double v : parse_grid(s)) {
        if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) {
            throw std::invalid_argument("depths must be positive integers");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gapengine: driven two-level heat engine between bandgap reservoirs"};
    std::string config_path;
    std::string solver;
    std::string grid;
    std::string outdir;
    std::string depths;
    std::size_t threads = 0;
    int verbosity = 1;
    bool check_only = false;
    std::vector<std::string> overrides;

    app.add_option("config", config_path, "INI configuration (preset) file")->required()->check(CLI::ExistingFile);
    app.add_option("-s,--solver", solver, "Solver override: heom, redfield_plus, redfield_markov, born_markov");
    app.add_option("-g,--grid", grid, "Driving-frequency grid override: start:stop:step or a,b,c");
    app.add_option("-o,--outdir", outdir, "Output directory (default: output.dir from the config)");
    app.add_option("-j,--threads", threads, "Parallel sweep points (default: run.threads from the config)");
    app.add_option("--set", overrides, "Override any config field, e.g. --set solver.depth=5")->take_all();
    app.add_option("--convergence", depths,
                   "Run a hierarchy-depth convergence scan at each grid point instead of a sweep (e.g. 2:6:1)");
    app.add_flag("--check", check_only, "Validate the configuration and exit");
    app.add_flag("-v,--verbose", [&](std::int64_t n) { verbosity = 1 + static_cast<int>(n); }, "More progress output");
    app.add_flag("-q,--quiet", [&](std::int64_t) { verbosity = 0; }, "Suppress progress output");
    CLI11_PARSE(app, argc, argv);

    RunConfig cfg;
    try {
        cfg = load_config(config_path);
        std::vector<std::string> all = overrides;
        if (!solver.empty()) all.push_back("solver.kind=" + solver);
        if (!grid.empty()) all.push_back("sweep.omega_s=" + grid);
        if (!outdir.empty()) all.push_back("output.dir=" + outdir);
        if (threads > 0) all.push_back("run.threads=" + std::to_string(threads));
        cfg = apply_overrides(cfg, all);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    if (check_only) {
        if (verbosity > 0) std::cout << config_path << ": ok (" << cfg.omega_grid.size() << " points)\n";
        return 0;
    }

    if (!depths.empty()) {
        std::vector<std::size_t> ds;
        try {
            ds = parse_depths(depths);
        } catch (const std::exception& e) {
            std::cerr << "error: --convergence: " << e.what() << '\n';
            return 2;
        }
        PreparedBaths baths;
        try {
            baths = prepare_baths(cfg);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 1;
        }
        bool all_converged = true;
        std::printf("omega_s,L,I_s,I_f,change_to_next,status\n");
        for (double w : cfg.omega_grid) {
            const auto scan = convergence_scan(cfg, baths, w, ds);
            for (const auto& r : scan.rows) {
                std::printf("%.10g,%zu,%.10g,%.10g,%.3e,%s\n", w, r.depth, r.mean_slow, r.mean_fast, r.change_to_next,
                            r.status.c_str());
            }
            if (scan.converged_depth) {
                std::fprintf(stderr, "omega_s=%g: converged depth L*=%zu\n", w, *scan.converged_depth);
            } else {
                std::fprintf(stderr, "omega_s=%g: not converged on the depth grid\n", w);
                all_converged = false;
            }
        }
        return all_converged ? 0 : 1;
    }

    auto progress = [&](std::size_t done, std::size_t total, const PointResult& p) {
        if (verbosity == 0) return;
        std::fprintf(stderr, "[%zu/%zu] omega_s=%-8g %s", done, total, p.omega_s, p.status.c_str());
        if (verbosity > 1) {
            std::fprintf(stderr, "  I_s=%.6g I_f=%.6g P=%.6g t=%.1f (%.1fs)", p.report.mean_slow, p.report.mean_fast,
                         p.report.power_by_sum, p.report.detect_time, p.wall_seconds);
        }
        std::fprintf(stderr, "\n");
    };
    const auto result = run_sweep(cfg, progress);
    try {
        const auto paths = emit_outputs(result, cfg.outdir);
        if (verbosity > 0) std::fprintf(stderr, "wrote %s (%.1fs)\n", paths.csv.c_str(), result.wall_seconds);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return result.all_ok() ? 0 : 1;
}
