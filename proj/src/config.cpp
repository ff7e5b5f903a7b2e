// config.cpp — INI parsing (Boost.PropertyTree) and field-level validation

#include "gapengine/config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gapengine/errors.hpp"

namespace gapengine {

namespace pt = boost::property_tree;

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& p : v) s += "\n  " + p;
    return s;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"system", {"omega0", "lambda", "omega_s", "hot"}},
        {"sweep", {"omega_s"}},
        {"slow", {"enabled", "family", "kappa", "omega_c", "xi", "temperature"}},
        {"fast", {"enabled", "family", "kappa", "omega_c", "xi", "temperature"}},
        {"solver",
         {"kind", "depth", "step", "filter", "initial", "fit_tol", "fit_window", "steady_tol", "max_time", "weighting",
          "k_max"}},
        {"output", {"name", "dir", "traces", "trace_stride"}},
        {"run", {"threads"}},
    };
    return s;
}

class Reader {
public:
    Reader(const pt::ptree& tree, std::vector<std::string>& problems) : tree_(tree), problems_(problems) {}

    std::optional<std::string> raw(const std::string& key) const {
        auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
        if (!v) return std::nullopt;
        return trim(*v);
    }

    double number(const std::string& key, double fallback, bool required = false) {
        const auto v = raw(key);
        if (!v) {
            if (required) problems_.push_back(key + ": required field is missing");
            return fallback;
        }
        try {
            std::size_t pos = 0;
            const double d = std::stod(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("trailing");
            return d;
        } catch (const std::exception&) {
            problems_.push_back(key + ": expected a number, got '" + *v + "'");
            return fallback;
        }
    }

    long integer(const std::string& key, long fallback) {
        const double d = number(key, static_cast<double>(fallback));
        if (d != std::floor(d)) {
            problems_.push_back(key + ": expected an integer");
            return fallback;
        }
        return static_cast<long>(d);
    }

    bool boolean(const std::string& key, bool fallback) {
        const auto v = raw(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "yes" || *v == "1" || *v == "on") return true;
        if (*v == "false" || *v == "no" || *v == "0" || *v == "off") return false;
        problems_.push_back(key + ": expected true/false, got '" + *v + "'");
        return fallback;
    }

    std::string text(const std::string& key, const std::string& fallback) const { return raw(key).value_or(fallback); }

private:
    const pt::ptree& tree_;
    std::vector<std::string>& problems_;
};

BathConfig read_bath(Reader& r, const std::string& sec, BathLabel label, std::vector<std::string>& problems) {
    BathConfig b;
    b.enabled = r.boolean(sec + ".enabled", true);
    b.spec.label = label;
    const std::string fam = r.text(sec + ".family", "bandgap");
    if (fam == "bandgap") {
        b.spec.spectral.family = SpectralFamily::Bandgap;
    } else if (fam == "narrow") {
        b.spec.spectral.family = SpectralFamily::Narrow;
    } else {
        problems.push_back(sec + ".family: expected bandgap or narrow, got '" + fam + "'");
    }
    b.spec.spectral.kappa = r.number(sec + ".kappa", 1.0, b.enabled);
    b.spec.spectral.omega_c = r.number(sec + ".omega_c", 1.0, b.enabled);
    b.spec.spectral.xi = r.number(sec + ".xi", 1.0);
    b.spec.temperature = r.number(sec + ".temperature", 0.0, b.enabled);
    return b;
}

RunConfig from_tree(const pt::ptree& tree, const std::string& origin) {
    std::vector<std::string> problems;
    for (const auto& [section, body] : tree) {
        const auto it = schema().find(section);
        if (it == schema().end()) {
            if (body.data().empty() || !body.empty()) {
                problems.push_back(origin + ": unknown section [" + section + "]");
            } else {
                problems.push_back(origin + ": key '" + section + "' must belong to a section");
            }
            continue;
        }
        for (const auto& [key, value] : body) {
            (void)value;
            if (!it->second.count(key)) problems.push_back(section + "." + key + ": unknown key");
        }
    }

    Reader r(tree, problems);
    RunConfig c;
    c.tls.omega0 = r.number("system.omega0", 3.0, true);
    c.tls.lambda = r.number("system.lambda", 0.0);
    c.tls.omega_s = 1.0;

    const auto single = r.raw("system.omega_s");
    const auto grid = r.raw("sweep.omega_s");
    if (single && grid) problems.push_back("system.omega_s: give either system.omega_s or sweep.omega_s, not both");
    try {
        if (grid) {
            c.omega_grid = parse_grid(*grid);
        } else if (single) {
            c.omega_grid = {r.number("system.omega_s", 1.0)};
        } else {
            problems.push_back("sweep.omega_s: no driving frequency given (set system.omega_s or sweep.omega_s)");
        }
    } catch (const std::invalid_argument& e) {
        problems.push_back(std::string("sweep.omega_s: ") + e.what());
    }

    c.slow = read_bath(r, "slow", BathLabel::Slow, problems);
    c.fast = read_bath(r, "fast", BathLabel::Fast, problems);

    const std::string hot = r.text("system.hot", "auto");
    if (hot == "slow") {
        c.hot = BathLabel::Slow;
    } else if (hot == "fast") {
        c.hot = BathLabel::Fast;
    } else if (hot == "auto") {
        c.hot = c.slow.spec.temperature > c.fast.spec.temperature ? BathLabel::Slow : BathLabel::Fast;
    } else {
        problems.push_back("system.hot: expected auto, slow or fast, got '" + hot + "'");
    }

    try {
        c.solver = solver_from_string(r.text("solver.kind", "heom"));
    } catch (const std::invalid_argument& e) {
        problems.push_back(std::string("solver.kind: ") + e.what());
    }
    const long depth = r.integer("solver.depth", 4);
    if (depth < 1) problems.push_back("solver.depth: must be >= 1");
    c.depth = static_cast<std::size_t>(std::max(1L, depth));
    c.step = r.number("solver.step", 0.0);
    c.filter = r.number("solver.filter", 1e-7);
    try {
        c.initial = initial_from_string(r.text("solver.initial", "ground"));
    } catch (const std::invalid_argument& e) {
        problems.push_back(std::string("solver.initial: ") + e.what());
    }
    c.fit_tol = r.number("solver.fit_tol", 1e-5);
    c.fit_window = r.number("solver.fit_window", 0.0);
    c.steady_tol = r.number("solver.steady_tol", 1e-4);
    c.max_time = r.number("solver.max_time", 5000.0);
    const std::string weighting = r.text("solver.weighting", "prefactor");
    if (weighting == "prefactor") {
        c.weighting = RateWeighting::Prefactor;
    } else if (weighting == "bessel") {
        c.weighting = RateWeighting::Bessel;
    } else {
        problems.push_back("solver.weighting: expected prefactor or bessel, got '" + weighting + "'");
    }
    c.k_max = static_cast<int>(r.integer("solver.k_max", -1));

    c.name = r.text("output.name", "run");
    c.outdir = r.text("output.dir", ".");
    c.traces = r.boolean("output.traces", false);
    const long stride = r.integer("output.trace_stride", 10);
    if (stride < 1) problems.push_back("output.trace_stride: must be >= 1");
    c.trace_stride = static_cast<std::size_t>(std::max(1L, stride));
    const long threads = r.integer("run.threads", 1);
    if (threads < 1) problems.push_back("run.threads: must be >= 1");
    c.threads = static_cast<std::size_t>(std::max(1L, threads));

    try {
        c.validate();
    } catch (const ConfigError& e) {
        for (const auto& p : e.problems) {
            if (std::find(problems.begin(), problems.end(), p) == problems.end()) problems.push_back(p);
        }
    }
    if (!problems.empty()) throw ConfigError(problems);
    return c;
}

pt::ptree read_tree(const std::string& text, const std::string& origin) {
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError({origin + ":" + std::to_string(e.line()) + ": " + e.message()});
    }
    return tree;
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> p)
    : std::runtime_error("invalid configuration:" + join(p)), problems(std::move(p)) {}

std::vector<BathSpec> RunConfig::enabled_baths() const {
    std::vector<BathSpec> v;
    if (slow.enabled) v.push_back(slow.spec);
    if (fast.enabled) v.push_back(fast.spec);
    return v;
}

void RunConfig::validate() const {
    std::vector<std::string> problems;
    auto guard = [&](const std::string& field, auto&& check) {
        try {
            check();
        } catch (const std::exception& e) {
            problems.push_back(field + ": " + e.what());
        }
    };
    if (!(tls.omega0 > 0.0)) problems.push_back("system.omega0: must be > 0");
    if (!(tls.lambda >= 0.0)) problems.push_back("system.lambda: must be >= 0");
    if (omega_grid.empty()) problems.push_back("sweep.omega_s: grid is empty");
    for (std::size_t i = 0; i < omega_grid.size(); ++i) {
        if (!(omega_grid[i] > 0.0)) problems.push_back("sweep.omega_s: every frequency must be > 0");
        if (i > 0 && !(omega_grid[i] > omega_grid[i - 1])) {
            problems.push_back("sweep.omega_s: grid must be strictly increasing");
            break;
        }
    }
    if (!slow.enabled && !fast.enabled) problems.push_back("slow.enabled/fast.enabled: at least one bath is required");
    for (const auto* b : {&slow, &fast}) {
        if (!b->enabled) continue;
        const std::string sec = b == &slow ? "slow" : "fast";
        const auto& sd = b->spec.spectral;
        if (!(sd.kappa > 0.0)) problems.push_back(sec + ".kappa: must be > 0");
        if (!(sd.omega_c > 0.0)) problems.push_back(sec + ".omega_c: must be > 0");
        if (!(sd.xi > 0.0)) problems.push_back(sec + ".xi: must be > 0");
        if (!(b->spec.temperature >= 0.0)) problems.push_back(sec + ".temperature: must be >= 0");
        if (tls.omega0 > 0.0 && sd.omega_c > 0.0) {
            guard(sec + ".omega_c", [&] { b->spec.check_label(tls.omega0); });
        }
    }
    if (!bath(hot).enabled && slow.enabled && fast.enabled) problems.push_back("system.hot: hot bath is disabled");
    if (depth < 1) problems.push_back("solver.depth: must be >= 1");
    if (!(filter >= 0.0)) problems.push_back("solver.filter: must be >= 0");
    if (!(fit_tol > 0.0)) problems.push_back("solver.fit_tol: must be > 0");
    if (!(steady_tol > 0.0)) problems.push_back("solver.steady_tol: must be > 0");
    if (!(max_time > 0.0)) problems.push_back("solver.max_time: must be > 0");
    if (!std::isfinite(step)) problems.push_back("solver.step: must be finite");
    if (!problems.empty()) throw ConfigError(problems);
}

std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> out;
    const std::string s = trim(spec);
    if (s.empty()) throw std::invalid_argument("empty grid");
    auto num = [](const std::string& t) {
        std::size_t pos = 0;
        const std::string u = trim(t);
        const double d = std::stod(u, &pos);
        if (pos != u.size()) throw std::invalid_argument("bad number '" + u + "'");
        return d;
    };
    try {
        if (s.find(':') != std::string::npos) {
            std::vector<std::string> parts;
            std::stringstream ss(s);
            for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
            if (parts.size() != 3) throw std::invalid_argument("range must be start:stop:step");
            const double a = num(parts[0]), b = num(parts[1]), h = num(parts[2]);
            if (!(h > 0.0) || b < a) throw std::invalid_argument("range needs step > 0 and stop >= start");
            const auto n = static_cast<std::size_t>(std::floor((b - a) / h + 1e-9));
            for (std::size_t i = 0; i <= n; ++i) {
                // Round to the step's decimal resolution so 0.1 steps print as 0.3, 0.4, ...
                const double v = a + static_cast<double>(i) * h;
                out.push_back(std::round(v * 1e12) / 1e12);
            }
        } else {
            std::stringstream ss(s);
            for (std::string p; std::getline(ss, p, ',');) {
                if (!trim(p).empty()) out.push_back(num(p));
            }
        }
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("cannot parse grid '") + s + "': " + e.what());
    } catch (const std::out_of_range&) {
        throw std::invalid_argument("grid value out of range in '" + s + "'");
    }
    if (out.empty()) throw std::invalid_argument("empty grid");
    if (std::adjacent_find(out.begin(), out.end(), std::greater_equal<>()) != out.end()) {
        throw std::invalid_argument("grid '" + s + "' must be strictly increasing");
    }
    return out;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    RunConfig c = from_tree(read_tree(text, origin), origin);
    c.source_text = text;
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path + ": cannot open configuration file"});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

RunConfig apply_overrides(const RunConfig& cfg, const std::vector<std::string>& assignments) {
    if (assignments.empty()) return cfg;
    pt::ptree tree = read_tree(cfg.source_text, "<config>");
    std::string appended;
    std::vector<std::string> problems;
    for (const auto& a : assignments) {
        const auto eq = a.find('=');
        const auto dot = a.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
            problems.push_back("override '" + a + "': expected section.key=value");
            continue;
        }
        const std::string key = trim(a.substr(0, eq));
        const std::string value = trim(a.substr(eq + 1));
        // A grid override replaces a single frequency and vice versa.
        if (key == "sweep.omega_s") {
            if (auto sys = tree.get_child_optional("system")) sys->erase("omega_s");
        }
        if (key == "system.omega_s") {
            if (auto sw = tree.get_child_optional("sweep")) sw->erase("omega_s");
        }
        tree.put(pt::ptree::path_type(key, '.'), value);
        appended += "; override " + key + " = " + value + "\n";
    }
    if (!problems.empty()) throw ConfigError(problems);
    RunConfig c = from_tree(tree, "<config+overrides>");
    c.source_text = cfg.source_text + appended;
    return c;
}

InitialState initial_from_string(const std::string& s) {
    if (s == "ground") return InitialState::Ground;
    if (s == "excited") return InitialState::Excited;
    if (s == "mixed") return InitialState::Mixed;
    throw std::invalid_argument("expected ground, excited or mixed, got '" + s + "'");
}

const char* to_string(InitialState s) {
    switch (s) {
    case InitialState::Ground: return "ground";
    case InitialState::Excited: return "excited";
    case InitialState::Mixed: return "mixed";
    }
    return "ground";
}

std::string config_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace gapengine
