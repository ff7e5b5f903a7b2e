// floquet.hpp — sideband expansion, Born-Markov rates and currents, resonance predictor
//
// The modulated TLS evolves with exp(-i Int omega) = sum_k J_k(lambda/omega_s) exp(-i omega^(k) t),
// omega^(k) = omega0 + k omega_s. In the weak-coupling limit the reservoirs are probed at these
// quasi-energies only.

#pragma once

#include <string>
#include <vector>

#include "gapengine/bath.hpp"
#include "gapengine/tls.hpp"

namespace gapengine {

// J_k(x) for any integer k and real x.
double bessel_weight(int k, double x);

struct FloquetExpansion {
    DrivenTLS tls;
    int k_max{0}; // window k = -k_max..k_max

    double argument() const { return tls.lambda / tls.omega_s; }
    double quasi_energy(int k) const { return tls.omega0 + k * tls.omega_s; }
    double weight(int k) const { return bessel_weight(k, argument()); }
    // 1 - sum_{|k| <= k_max} J_k^2
    double sum_rule_deficit() const;
};

inline constexpr double kSumRuleDeficit = 1e-8;

// Smallest symmetric window whose Bessel sum-rule deficit is below the threshold.
FloquetExpansion make_expansion(const DrivenTLS& tls, double deficit = kSumRuleDeficit);

enum class RateWeighting {
    Prefactor, // lambda^2 / (4 omega_s^2) for every sideband
    Bessel,    // J_k(lambda/omega_s)^2 per sideband
};

struct BornMarkovInputs {
    DrivenTLS tls;
    BathSpec hot;
    BathSpec cold;
    RateWeighting weighting{RateWeighting::Prefactor};
    int k_max{-1}; // < 0: smallest window meeting the sum rule
};

struct SidebandRates {
    int k{0};
    double gamma0{0.0}; // uses S(-omega): excitation 0 -> 1
    double gamma1{0.0}; // uses S(+omega): relaxation 1 -> 0
};

struct BornMarkovModel {
    FloquetExpansion expansion;
    BathSpec hot;
    BathSpec cold;
    RateWeighting weighting{RateWeighting::Prefactor};
    std::vector<SidebandRates> sidebands;
    double gamma0{0.0};
    double gamma1{0.0};

    // Population ratio P1/P0 = Gamma0/Gamma1.
    double ratio() const;
    double excited_population() const;
    double ground_population() const { return 1.0 - excited_population(); }
    double sideband_weight(int k) const;
};

BornMarkovModel bm_rates(const BornMarkovInputs& in);

struct BornMarkovCurrents {
    double hot{0.0};
    double cold{0.0};
};

BornMarkovCurrents bm_heat_currents(const BornMarkovModel& model);

// Solution of dP0/dt = gain (1 - P0) - loss P0 at time t, starting from p0.
double bm_population_ode(double p0, double gain, double loss, double t);

struct Resonance {
    double omega_s{0.0};
    std::string mechanism;
};

// Sidebands |Omega_a - omega0|/k for both baths and k <= k_max, plus the fast-driving set.
std::vector<Resonance> predict_resonances(double omega0, double lambda, double omega_slow, double omega_fast,
                                          int k_max);

} // namespace gapengine
