// test_bath.cpp — spectral densities, spectral functions and the correlation quadrature

#include <cmath>
#include <complex>

#include "doctest.h"
#include "gapengine/bath.hpp"

using namespace gapengine;

namespace {

BathSpec slow_cold() { return {SpectralDensity::bandgap(1.0, 2.0), 0.0, BathLabel::Slow}; }
BathSpec fast_hot() { return {SpectralDensity::bandgap(1.0, 4.0), 2.0, BathLabel::Fast}; }
BathSpec narrow_hot() { return {SpectralDensity::narrow(1.0, 5.0), 2.0, BathLabel::Fast}; }

} // namespace

TEST_SUITE("bath_model") {

TEST_CASE("spectral density closed forms") {
    // (1 - 4)^6 + 1 = 730
    CHECK(spectral_density_value(SpectralDensity::bandgap(1.0, 2.0), 1.0) == doctest::Approx(1.0 / 730.0));
    // kappa xi^8 w / (w^2 xi^10) at w = Omega
    CHECK(spectral_density_value(SpectralDensity::bandgap(2.0, 3.0, 0.5), 3.0) ==
          doctest::Approx(2.0 * std::pow(0.5, 8) * 3.0 / (9.0 * std::pow(0.5, 10))));
    // narrow peak: J(Omega) = kappa Omega / Omega^2
    CHECK(spectral_density_value(SpectralDensity::narrow(1.0, 5.0), 5.0) == doctest::Approx(0.2));
    CHECK(spectral_density_value(SpectralDensity::bandgap(1.0, 2.0), 0.0) == 0.0);
    // odd in omega
    CHECK(spectral_density_value(SpectralDensity::bandgap(1.0, 2.0), -1.3) ==
          doctest::Approx(-spectral_density_value(SpectralDensity::bandgap(1.0, 2.0), 1.3)));
}

TEST_CASE("invalid spectral parameters are rejected") {
    CHECK_THROWS_AS(SpectralDensity::bandgap(0.0, 2.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(SpectralDensity::bandgap(1.0, -2.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(SpectralDensity::bandgap(1.0, 2.0, 0.0).validate(), std::invalid_argument);
    BathSpec b = fast_hot();
    b.temperature = -1.0;
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
}

TEST_CASE("slow and fast labels follow the TLS frequency") {
    CHECK_NOTHROW(slow_cold().check_label(3.0));
    CHECK_NOTHROW(fast_hot().check_label(3.0));
    CHECK_THROWS(slow_cold().check_label(1.5));
    CHECK_THROWS(fast_hot().check_label(4.5));
}

TEST_CASE("detailed balance and zero-temperature limit of S") {
    const BathSpec f = fast_hot();
    for (double w : {0.3, 1.0, 3.0, 4.2}) {
        CHECK(spectral_function(f, w) == doctest::Approx(std::exp(w / f.temperature) * spectral_function(f, -w)).epsilon(1e-12));
        CHECK(spectral_function(f, w) - spectral_function(f, -w) ==
              doctest::Approx(spectral_density_value(f.spectral, w)).epsilon(1e-12));
    }
    const BathSpec s = slow_cold();
    CHECK(spectral_function(s, -1.7) == 0.0);
    CHECK(spectral_function(s, 1.7) == doctest::Approx(spectral_density_value(s.spectral, 1.7)));
    // w -> 0 limit: T dJ/dw
    CHECK(spectral_function(f, 0.0) == doctest::Approx(f.temperature * f.spectral.slope_at_zero()));
    CHECK(std::isfinite(spectral_function(f, 1e-12)));
}

TEST_CASE("support interval brackets the spectral weight") {
    const auto sup = spectral_support(fast_hot());
    CHECK(sup.lo < -3.0);
    CHECK(sup.hi > 4.0);
    CHECK(sup.peak > 0.0);
    CHECK(std::abs(spectral_function(fast_hot(), sup.hi * 1.01)) < 1e-9 * sup.peak);
}

TEST_CASE("correlation function symmetries") {
    for (const auto& b : {slow_cold(), fast_hot(), narrow_hot()}) {
        const auto c0 = correlation_quadrature(b, 0.0);
        CHECK(c0.imag() == doctest::Approx(0.0));
        CHECK(c0.real() > 0.0);
        // |C(t)| <= C(0) for a positive spectral function
        CHECK(std::abs(correlation_quadrature(b, 2.3)) <= c0.real() * (1.0 + 1e-9));
    }
}

TEST_CASE("frozen correlation oracle values") {
    struct Row {
        BathSpec bath;
        double t;
        std::complex<double> c;
    };
    const Row rows[] = {
        {slow_cold(), 0.0, {1.069748799991660e-01, 0.0}},
        {slow_cold(), 1.0, {-3.981522955167550e-02, -9.638465299711567e-02}},
        {slow_cold(), 7.5, {-1.206304965274989e-02, -1.902397361024122e-02}},
        {fast_hot(), 0.0, {4.358762067973367e-02, 0.0}},
        {fast_hot(), 1.0, {-2.853865488656207e-02, 2.466952815099198e-02}},
        {fast_hot(), 7.5, {2.054311565610090e-03, 1.890794034457285e-02}},
        {narrow_hot(), 0.0, {5.375501156963544e-04, 0.0}},
        {narrow_hot(), 1.0, {1.524792325207390e-04, 4.372637946460577e-04}},
        {narrow_hot(), 7.5, {5.268383042565089e-04, 9.019801066879531e-05}},
    };
    for (const auto& r : rows) {
        CAPTURE(r.t);
        CHECK(std::abs(correlation_quadrature(r.bath, r.t) - r.c) < 1e-9);
    }
}

TEST_CASE("grid evaluation agrees with adaptive quadrature") {
    for (const auto& b : {slow_cold(), fast_hot(), narrow_hot()}) {
        const double dt = 0.37;
        const auto grid = correlation_on_grid(b, dt, 200);
        for (std::size_t j : {0u, 17u, 101u, 199u}) {
            CHECK(std::abs(grid[j] - correlation_quadrature(b, j * dt)) < 1e-9);
        }
    }
}

TEST_CASE("counter term oracle values") {
    CHECK(counter_term(slow_cold().spectral) == doctest::Approx(1.106582119656596e-01).epsilon(1e-9));
    CHECK(counter_term(fast_hot().spectral) == doctest::Approx(1.661753130125302e-02).epsilon(1e-9));
}

TEST_CASE("memory time and default fit window") {
    const BathSpec f = fast_hot();
    const double tm = memory_time(f);
    CHECK(tm > 0.0);
    CHECK(default_fit_window(f) == doctest::Approx(std::max(50.0, 3.0 * tm)));
    const double c0 = correlation_quadrature(f, 0.0).real();
    CHECK(std::abs(correlation_quadrature(f, tm * 1.2)) < 1e-3 * c0 * 1.5);
}

}
