// floquet.cpp — Bessel weights, Born-Markov rates and currents, resonance list

#include "gapengine/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace gapengine {

double bessel_weight(int k, double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("bessel_weight: non-finite argument");
    const int n = std::abs(k);
    double v = x == 0.0 ? (n == 0 ? 1.0 : 0.0) : std::cyl_bessel_j(static_cast<double>(n), std::abs(x));
    // J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x)
    const bool odd = (n % 2) != 0;
    if (odd && k < 0) v = -v;
    if (odd && x < 0.0) v = -v;
    return v;
}

double FloquetExpansion::sum_rule_deficit() const {
    const double x = argument();
    double s = 0.0;
    for (int k = -k_max; k <= k_max; ++k) {
        const double j = bessel_weight(k, x);
        s += j * j;
    }
    return 1.0 - s;
}

FloquetExpansion make_expansion(const DrivenTLS& tls, double deficit) {
    tls.validate();
    FloquetExpansion e{tls, 0};
    const double x = e.argument();
    double s = bessel_weight(0, x) * bessel_weight(0, x);
    while (1.0 - s >= deficit) {
        ++e.k_max;
        const double j = bessel_weight(e.k_max, x);
        s += 2.0 * j * j;
        if (e.k_max > 100000) throw std::runtime_error("make_expansion: sum rule not reached");
    }
    return e;
}

double BornMarkovModel::sideband_weight(int k) const {
    if (weighting == RateWeighting::Bessel) {
        const double j = expansion.weight(k);
        return j * j;
    }
    const double x = expansion.argument();
    return x * x / 4.0;
}

double BornMarkovModel::ratio() const {
    if (gamma1 > 0.0) return gamma0 / gamma1;
    return gamma0 > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

double BornMarkovModel::excited_population() const {
    const double total = gamma0 + gamma1;
    return total > 0.0 ? gamma0 / total : 0.0;
}

BornMarkovModel bm_rates(const BornMarkovInputs& in) {
    in.hot.validate();
    in.cold.validate();
    BornMarkovModel m;
    m.expansion = in.k_max >= 0 ? FloquetExpansion{in.tls, in.k_max} : make_expansion(in.tls);
    m.hot = in.hot;
    m.cold = in.cold;
    m.weighting = in.weighting;
    const int kk = m.expansion.k_max;
    for (int k = -kk; k <= kk; ++k) {
        const double wk = m.expansion.quasi_energy(k);
        const double wmk = m.expansion.quasi_energy(-k);
        const double f = m.sideband_weight(k);
        SidebandRates r;
        r.k = k;
        r.gamma0 = f * (spectral_function(in.hot, -wk) + spectral_function(in.cold, -wmk));
        r.gamma1 = f * (spectral_function(in.hot, wk) + spectral_function(in.cold, wmk));
        m.gamma0 += r.gamma0;
        m.gamma1 += r.gamma1;
        m.sidebands.push_back(r);
    }
    return m;
}

BornMarkovCurrents bm_heat_currents(const BornMarkovModel& model) {
    BornMarkovCurrents c;
    const double total = model.gamma0 + model.gamma1;
    if (!(total > 0.0)) return c;
    const double p0 = model.gamma1 / total;
    const double p1 = model.gamma0 / total;
    const int kk = model.expansion.k_max;
    for (int k = -kk; k <= kk; ++k) {
        const double f = model.sideband_weight(k);
        // omega S(omega) (exp(-beta omega) - w)/(w + 1) written as omega (S(-omega) P0 - S(omega) P1),
        // which stays finite at T = 0 and for negative quasi-energies.
        const double wk = model.expansion.quasi_energy(k);
        c.hot += f * wk * (spectral_function(model.hot, -wk) * p0 - spectral_function(model.hot, wk) * p1);
        const double wmk = model.expansion.quasi_energy(-k);
        c.cold += f * wmk * (spectral_function(model.cold, -wmk) * p0 - spectral_function(model.cold, wmk) * p1);
    }
    return c;
}

double bm_population_ode(double p0, double gain, double loss, double t) {
    if (!(p0 >= 0.0 && p0 <= 1.0)) throw std::invalid_argument("bm_population_ode: P0 must lie in [0, 1]");
    if (gain < 0.0 || loss < 0.0) throw std::invalid_argument("bm_population_ode: rates must be >= 0");
    const double total = gain + loss;
    if (total == 0.0) return p0;
    const double inf = gain / total;
    return inf + (p0 - inf) * std::exp(-total * t);
}

std::vector<Resonance> predict_resonances(double omega0, double /*lambda*/, double omega_slow, double omega_fast,
                                          int k_max) {
    if (k_max < 1) throw std::invalid_argument("predict_resonances: k_max must be >= 1");
    std::vector<Resonance> out;
    auto add = [&](double w, const std::string& what) {
        if (w > 0.0) out.push_back({w, what});
    };
    for (auto [name, om] : {std::pair{"slow", omega_slow}, std::pair{"fast", omega_fast}}) {
        for (int k = 1; k <= k_max; ++k) {
            std::ostringstream s;
            s << "sideband k=" << k << " " << name;
            add(std::abs(om - omega0) / k, s.str());
        }
    }
    add(omega_slow, "collective Omega_s");
    add(omega_fast, "collective Omega_f");
    add(2.0 * omega_slow, "collective 2 Omega_s");
    add(2.0 * omega_fast, "collective 2 Omega_f");
    add((omega0 + omega_slow) / 2.0, "collective (omega0+Omega_s)/2");
    add((omega0 + omega_fast) / 2.0, "collective (omega0+Omega_f)/2");
    add((omega_fast - omega_slow) / 2.0, "collective (Omega_f-Omega_s)/2");
    add((omega_fast + omega_slow) / 2.0, "collective (Omega_f+Omega_s)/2");
    std::stable_sort(out.begin(), out.end(), [](const Resonance& a, const Resonance& b) { return a.omega_s < b.omega_s; });
    return out;
}

} // namespace gapengine
