// sweep.cpp — solver assembly, threaded sweep execution and result files

#include "gapengine/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "gapengine/errors.hpp"
#include "gapengine/floquet.hpp"
#include "gapengine/hierarchy.hpp"
#include "gapengine/master_equations.hpp"

namespace gapengine {

namespace {

// HEOM propagator bundled with the model it points into.
class OwnedHeom final : public Dynamics {
public:
    OwnedHeom(std::unique_ptr<HeomModel> model, const HeomConfig& cfg, const Mat2& rho0)
        : model_(std::move(model)), prop_(*model_, cfg, rho0) {}

    double time() const override { return prop_.time(); }
    void step(double h) override { prop_.step(h); }
    Mat2 rho() const override { return prop_.rho(); }
    Mat2 bath_moment(BathLabel b) const override { return prop_.bath_moment(b); }
    bool has_bath(BathLabel b) const override { return prop_.has_bath(b); }
    std::optional<std::complex<double>> mixed_moment() const override { return prop_.mixed_moment(); }
    const DrivenTLS& tls() const override { return prop_.tls(); }
    SolverKind kind() const override { return SolverKind::Heom; }
    std::vector<cplx> state_vector() const override { return prop_.state_vector(); }
    void set_state_vector(std::span<const cplx> v) override { prop_.set_state_vector(v); }

private:
    std::unique_ptr<HeomModel> model_;
    HeomPropagator prop_;
};

std::string fmt(double v) {
    if (std::isnan(v)) return "NA";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string sanitize(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PointResult born_markov_point(const RunConfig& cfg, double omega_s) {
    if (!cfg.slow.enabled || !cfg.fast.enabled) {
        throw std::invalid_argument("born_markov needs both baths enabled");
    }
    BornMarkovInputs in;
    in.tls = cfg.tls;
    in.tls.omega_s = omega_s;
    in.hot = cfg.bath(cfg.hot).spec;
    in.cold = cfg.bath(cfg.cold()).spec;
    in.weighting = cfg.weighting;
    in.k_max = cfg.k_max;
    const auto model = bm_rates(in);
    const auto cur = bm_heat_currents(model);
    PointResult p;
    p.omega_s = omega_s;
    auto& r = p.report;
    r.mean_slow = cfg.hot == BathLabel::Slow ? cur.hot : cur.cold;
    r.mean_fast = cfg.hot == BathLabel::Fast ? cur.hot : cur.cold;
    r.power_by_sum = cur.hot + cur.cold;
    r.power_by_work = std::numeric_limits<double>::quiet_NaN();
    r.power_by_parts = std::numeric_limits<double>::quiet_NaN();
    r.mean_p1 = model.excited_population();
    r.converged = true;
    r.step = std::numeric_limits<double>::quiet_NaN();
    return p;
}

} // namespace

PreparedBaths prepare_baths(const RunConfig& cfg) {
    PreparedBaths pb;
    for (const auto& spec : cfg.enabled_baths()) {
        const double window = cfg.fit_window > 0.0 ? cfg.fit_window : default_fit_window(spec);
        pb.decompositions.push_back(fit_exponentials(spec, window, cfg.fit_tol));
        const double c0 = correlation_quadrature(spec, 0.0).real();
        (spec.label == BathLabel::Slow ? pb.c_slow0 : pb.c_fast0) = c0;
    }
    return pb;
}

std::unique_ptr<Dynamics> make_dynamics(const RunConfig& cfg, const PreparedBaths& baths, double omega_s) {
    DrivenTLS tls = cfg.tls;
    tls.omega_s = omega_s;
    const Mat2 rho0 = initial_density(cfg.initial);
    switch (cfg.solver) {
    case SolverKind::Heom: {
        auto model = std::make_unique<HeomModel>(tls, baths.decompositions, cfg.depth);
        HeomConfig hc;
        hc.depth = cfg.depth;
        hc.filter = cfg.filter;
        hc.initial = cfg.initial;
        hc.step = cfg.step > 0.0 ? cfg.step : default_step(tls, baths.decompositions);
        return std::make_unique<OwnedHeom>(std::move(model), hc, rho0);
    }
    case SolverKind::RedfieldPlus: return std::make_unique<RedfieldPlusPropagator>(tls, baths.decompositions, rho0);
    case SolverKind::RedfieldMarkov:
        return std::make_unique<MarkovRedfieldPropagator>(tls, baths.decompositions, rho0);
    case SolverKind::BornMarkov: break;
    }
    throw std::invalid_argument("born_markov has no time-stepping solver");
}

PointResult run_point(const RunConfig& cfg, const PreparedBaths& baths, double omega_s) {
    const auto t0 = std::chrono::steady_clock::now();
    PointResult p;
    p.omega_s = omega_s;
    try {
        if (cfg.solver == SolverKind::BornMarkov) {
            p = born_markov_point(cfg, omega_s);
        } else {
            auto dyn = make_dynamics(cfg, baths, omega_s);
            DrivenTLS tls = cfg.tls;
            tls.omega_s = omega_s;
            SteadyOptions so;
            so.step = cfg.step > 0.0 ? cfg.step : default_step(tls, baths.decompositions);
            so.tol = cfg.steady_tol;
            so.max_time = cfg.max_time;
            so.trace_stride = cfg.traces ? cfg.trace_stride : 0;
            p.report = run_to_steady_state(*dyn, so, baths.c_slow0, baths.c_fast0);
            if (!p.report.converged) p.status = "timeout";
        }
        const double hot = cfg.hot == BathLabel::Slow ? p.report.mean_slow : p.report.mean_fast;
        const double cold = cfg.hot == BathLabel::Slow ? p.report.mean_fast : p.report.mean_slow;
        p.eta = efficiency(cold, hot, p.report.power_by_sum);
    } catch (const InstabilityError& e) {
        p.status = std::string("blowup: ") + e.what();
    } catch (const FitError& e) {
        p.status = std::string("fit_failure: ") + e.what();
    } catch (const std::exception& e) {
        p.status = std::string("error: ") + e.what();
    }
    p.omega_s = omega_s;
    p.wall_seconds = elapsed(t0);
    return p;
}

bool SweepResult::all_ok() const {
    return std::all_of(rows.begin(), rows.end(), [](const PointResult& p) { return p.ok(); });
}

SweepResult run_sweep(const RunConfig& cfg, const ProgressFn& progress) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    SweepResult res;
    res.config = cfg;
    res.config_hash = config_hash(cfg.source_text);
    const std::size_t n = cfg.omega_grid.size();
    res.rows.resize(n);

    PreparedBaths baths;
    std::string fit_problem;
    if (cfg.solver != SolverKind::BornMarkov) {
        try {
            baths = prepare_baths(cfg);
        } catch (const FitError& e) {
            fit_problem = std::string("fit_failure: ") + e.what();
        } catch (const std::exception& e) {
            fit_problem = std::string("error: ") + e.what();
        }
    }

    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    std::mutex mu;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            PointResult p;
            if (!fit_problem.empty()) {
                p.omega_s = cfg.omega_grid[i];
                p.status = fit_problem;
            } else {
                p = run_point(cfg, baths, cfg.omega_grid[i]);
            }
            res.rows[i] = std::move(p);
            std::lock_guard<std::mutex> lock(mu);
            ++done;
            if (progress) progress(done, n, res.rows[i]);
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.threads, n));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    res.wall_seconds = elapsed(t0);
    return res;
}

ConvergenceScan convergence_scan(const RunConfig& cfg, const PreparedBaths& baths, double omega_s,
                                 const std::vector<std::size_t>& depths, double rel_tol) {
    if (depths.empty()) throw std::invalid_argument("convergence scan: empty depth grid");
    for (std::size_t i = 1; i < depths.size(); ++i) {
        if (depths[i] <= depths[i - 1]) throw std::invalid_argument("convergence scan: depths must be ascending");
    }
    ConvergenceScan scan;
    for (std::size_t L : depths) {
        RunConfig c = cfg;
        c.solver = SolverKind::Heom;
        c.depth = L;
        const auto p = run_point(c, baths, omega_s);
        scan.rows.push_back({L, p.report.mean_slow, p.report.mean_fast, std::numeric_limits<double>::quiet_NaN(),
                             p.status});
    }
    for (std::size_t i = 0; i + 1 < scan.rows.size(); ++i) {
        const auto& a = scan.rows[i];
        const auto& b = scan.rows[i + 1];
        const double scale = std::max({std::abs(b.mean_slow), std::abs(b.mean_fast), 1e-300});
        scan.rows[i].change_to_next =
            std::max(std::abs(a.mean_slow - b.mean_slow), std::abs(a.mean_fast - b.mean_fast)) / scale;
        if (!scan.converged_depth && a.status == "ok" && b.status == "ok" && scan.rows[i].change_to_next < rel_tol) {
            scan.converged_depth = a.depth;
        }
    }
    return scan;
}

std::string csv_header() {
    return "omega_s,lambda,kappa_s,kappa_f,T_s,T_f,Omega_s,Omega_f,I_s,I_f,P_sum,P_work,eta,X_corr,L,h,delta,"
           "detect_time,solver,status";
}

std::string csv_row(const RunConfig& cfg, const PointResult& p) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto& r = p.report;
    const bool heom = cfg.solver == SolverKind::Heom;
    const bool stepped = cfg.solver != SolverKind::BornMarkov;
    std::ostringstream os;
    auto bath_field = [&](const BathConfig& b, double v) { return b.enabled ? fmt(v) : std::string("NA"); };
    os << fmt(p.omega_s) << ',' << fmt(cfg.tls.lambda) << ',' << bath_field(cfg.slow, cfg.slow.spec.spectral.kappa)
       << ',' << bath_field(cfg.fast, cfg.fast.spec.spectral.kappa) << ','
       << bath_field(cfg.slow, cfg.slow.spec.temperature) << ',' << bath_field(cfg.fast, cfg.fast.spec.temperature)
       << ',' << bath_field(cfg.slow, cfg.slow.spec.spectral.omega_c) << ','
       << bath_field(cfg.fast, cfg.fast.spec.spectral.omega_c) << ',';
    const bool have = p.ok() || p.status == "timeout";
    os << bath_field(cfg.slow, have ? r.mean_slow : nan) << ',' << bath_field(cfg.fast, have ? r.mean_fast : nan) << ','
       << fmt(have ? r.power_by_sum : nan) << ',' << fmt(have ? r.power_by_work : nan) << ','
       << fmt(have && p.eta ? *p.eta : nan) << ',' << fmt(have && r.x_corr ? *r.x_corr : nan) << ',';
    os << (heom ? std::to_string(cfg.depth) : cfg.solver == SolverKind::RedfieldPlus ? std::string("1") : "NA") << ','
       << fmt(stepped && have ? r.step : nan) << ',' << fmt(heom ? cfg.filter : nan) << ','
       << fmt(stepped && have ? r.detect_time : nan) << ',' << to_string(cfg.solver) << ','
       << sanitize(p.status);
    return os.str();
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
    out.close();
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

} // namespace

OutputPaths emit_outputs(const SweepResult& result, const std::string& dir) {
    namespace fs = std::filesystem;
    const auto& cfg = result.config;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
    const fs::path base(dir);
    OutputPaths paths;

    const fs::path csv = base / (cfg.name + ".csv");
    {
        auto out = open_out(csv);
        out << csv_header() << '\n';
        for (const auto& row : result.rows) out << csv_row(cfg, row) << '\n';
        close_out(out, csv);
    }
    paths.csv = csv.string();

    const fs::path res = base / (cfg.name + "_resonances.csv");
    {
        auto out = open_out(res);
        out << "omega_s,mechanism\n";
        for (const auto& r : predict_resonances(cfg.tls.omega0, cfg.tls.lambda, cfg.slow.spec.spectral.omega_c,
                                                cfg.fast.spec.spectral.omega_c, 3)) {
            out << fmt(r.omega_s) << ',' << sanitize(r.mechanism) << '\n';
        }
        close_out(out, res);
    }
    paths.resonances = res.string();

    const fs::path prov = base / (cfg.name + "_provenance.txt");
    {
        auto out = open_out(prov);
        out << "name = " << cfg.name << "\n";
        out << "version = " << kVersion << "\n";
        out << "config_hash = " << result.config_hash << "\n";
        out << "solver = " << to_string(cfg.solver) << "\n";
        out << "points = " << result.rows.size() << "\n";
        out << "wall_seconds = " << fmt(result.wall_seconds) << "\n";
        out << "# omega_s wall_seconds steps mean_P1 period_change periodicity_defect P_by_parts X_corr_imag "
               "trace_drift hermiticity extrapolations status\n";
        for (const auto& p : result.rows) {
            const auto& r = p.report;
            out << fmt(p.omega_s) << ' ' << fmt(p.wall_seconds) << ' ' << r.steps << ' ' << fmt(r.mean_p1) << ' '
                << fmt(r.period_change) << ' ' << fmt(r.periodicity_defect) << ' ' << fmt(r.power_by_parts) << ' '
                << fmt(r.x_corr_imag) << ' ' << fmt(r.trace_drift) << ' ' << fmt(r.hermiticity) << ' ' << r.extrapolations << ' ' << p.status
                << '\n';
        }
        close_out(out, prov);
    }
    paths.provenance = prov.string();

    if (cfg.traces) {
        for (std::size_t i = 0; i < result.rows.size(); ++i) {
            const auto& tr = result.rows[i].report.trace;
            if (tr.empty()) continue;
            const fs::path tp = base / (cfg.name + "_trace_" + std::to_string(i) + ".csv");
            auto out = open_out(tp);
            out << "t,P1,I_s,I_f\n";
            for (const auto& row : tr) {
                out << fmt(row.t) << ',' << fmt(row.p1) << ',' << fmt(row.i_slow) << ',' << fmt(row.i_fast) << '\n';
            }
            close_out(out, tp);
            paths.traces.push_back(tp.string());
        }
    }
    return paths;
}

} // namespace gapengine
