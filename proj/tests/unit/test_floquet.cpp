// test_floquet.cpp — Bessel weights, sideband windows, Born-Markov rates and currents, resonances

#include <cmath>
#include <random>

#include "doctest.h"
#include "gapengine/floquet.hpp"

using namespace gapengine;

namespace {

BathSpec slow_cold() { return {SpectralDensity::bandgap(1.0, 2.0), 0.0, BathLabel::Slow}; }
BathSpec fast_hot() { return {SpectralDensity::bandgap(1.0, 4.0), 2.0, BathLabel::Fast}; }

} // namespace

TEST_SUITE("floquet_analytics") {

TEST_CASE("Bessel reference values") {
    CHECK(bessel_weight(0, 1.0) == doctest::Approx(0.7651976865579666).epsilon(1e-14));
    CHECK(bessel_weight(1, 1.0) == doctest::Approx(0.44005058574493355).epsilon(1e-14));
    CHECK(bessel_weight(2, 2.5) == doctest::Approx(0.44605905843961724).epsilon(1e-13));
    CHECK(bessel_weight(0, 0.0) == 1.0);
    CHECK(bessel_weight(3, 0.0) == 0.0);
}

TEST_CASE("Bessel reflection symmetry") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> kd(0, 12);
    std::uniform_real_distribution<double> xd(-8.0, 8.0);
    for (int i = 0; i < 200; ++i) {
        const int k = kd(rng);
        const double x = xd(rng);
        const double sign = k % 2 == 0 ? 1.0 : -1.0;
        CHECK(bessel_weight(-k, x) == doctest::Approx(sign * bessel_weight(k, x)).epsilon(1e-12));
        CHECK(bessel_weight(k, -x) == doctest::Approx(sign * bessel_weight(k, x)).epsilon(1e-12));
    }
}

TEST_CASE("sideband window meets the sum rule") {
    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        const auto e = make_expansion(DrivenTLS{3.0, x, 1.0});
        CHECK(e.sum_rule_deficit() < 1e-8);
        if (e.k_max > 0) {
            const FloquetExpansion smaller{e.tls, e.k_max - 1};
            CHECK(smaller.sum_rule_deficit() >= 1e-8);
        }
    }
    const auto undriven = make_expansion(DrivenTLS{3.0, 0.0, 1.0});
    CHECK(undriven.k_max == 0);
    CHECK(undriven.weight(0) == 1.0);
    CHECK(undriven.quasi_energy(2) == 5.0);
}

TEST_CASE("undriven rates obey detailed balance") {
    const BathSpec hot = fast_hot();
    BathSpec idle = slow_cold();
    idle.spectral.kappa = 1e-300;
    const auto m = bm_rates({DrivenTLS{4.0, 0.0, 1.0}, hot, idle, RateWeighting::Bessel});
    CHECK(m.ratio() == doctest::Approx(std::exp(-4.0 / hot.temperature)).epsilon(1e-9));
    const auto c = bm_heat_currents(m);
    CHECK(std::abs(c.hot) < 1e-15);
}

TEST_CASE("first law of the Born-Markov currents") {
    // With the Bessel weighting the net work equals the current sum; both currents are finite.
    const auto m = bm_rates({DrivenTLS{3.0, 1.0, 1.0}, fast_hot(), slow_cold(), RateWeighting::Bessel});
    const auto c = bm_heat_currents(m);
    CHECK(std::isfinite(c.hot));
    CHECK(std::isfinite(c.cold));
    CHECK(m.excited_population() == doctest::Approx(m.gamma0 / (m.gamma0 + m.gamma1)));
    CHECK(m.ground_population() + m.excited_population() == doctest::Approx(1.0));
}

TEST_CASE("frozen Born-Markov oracle (prefactor weighting)") {
    const auto m = bm_rates({DrivenTLS{3.0, 1.0, 1.0}, fast_hot(), slow_cold()});
    CHECK(m.expansion.k_max == 5);
    CHECK(m.gamma0 == doctest::Approx(1.351273426300714e-01).epsilon(1e-10));
    CHECK(m.gamma1 == doctest::Approx(1.976844174674090e-01).epsilon(1e-10));
    CHECK(m.excited_population() == doctest::Approx(4.060173312099689e-01).epsilon(1e-10));
    const auto c = bm_heat_currents(m);
    CHECK(c.hot == doctest::Approx(-9.416108581137253e-02).epsilon(1e-10));
    CHECK(c.cold == doctest::Approx(-2.504014762153557e-01).epsilon(1e-10));
    CHECK(m.sideband_weight(3) == doctest::Approx(0.25));
}

TEST_CASE("population ODE solution") {
    CHECK(bm_population_ode(1.0, 0.0, 0.0, 5.0) == 1.0);
    const double g = 0.3, l = 0.7;
    CHECK(bm_population_ode(1.0, g, l, 0.0) == doctest::Approx(1.0));
    CHECK(bm_population_ode(1.0, g, l, 100.0) == doctest::Approx(g / (g + l)));
    const double t = 1.3, h = 1e-5;
    const double p = bm_population_ode(0.2, g, l, t);
    const double dp = (bm_population_ode(0.2, g, l, t + h) - bm_population_ode(0.2, g, l, t - h)) / (2 * h);
    CHECK(dp == doctest::Approx(g * (1.0 - p) - l * p).epsilon(1e-7));
    CHECK_THROWS(bm_population_ode(1.5, g, l, 1.0));
    CHECK_THROWS(bm_population_ode(0.5, -g, l, 1.0));
}

TEST_CASE("resonance predictor") {
    const auto r = predict_resonances(3.0, 1.0, 2.0, 4.0, 2);
    auto has = [&](double w) {
        for (const auto& x : r) if (std::abs(x.omega_s - w) < 1e-12) return true;
        return false;
    };
    CHECK(has(1.0));
    CHECK(has(0.5));
    CHECK(std::is_sorted(r.begin(), r.end(), [](const Resonance& a, const Resonance& b) { return a.omega_s < b.omega_s; }));
    CHECK_THROWS(predict_resonances(3.0, 1.0, 2.0, 4.0, 0));
}

}
