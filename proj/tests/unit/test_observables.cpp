// test_observables.cpp — currents, period averages, power, efficiency and steady-state detection

#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "gapengine/errors.hpp"
#include "gapengine/hierarchy.hpp"
#include "gapengine/observables.hpp"

using namespace gapengine;

namespace {

constexpr double kPi = std::numbers::pi;

// Dynamics stub with a prescribed state and bath moments.
struct FixedDynamics final : Dynamics {
    DrivenTLS t{3.0, 0.0, 1.0};
    Mat2 state{ops::ground_state()};
    Mat2 slow{Mat2::Zero()};
    Mat2 fast{Mat2::Zero()};
    double time() const override { return 0.0; }
    void step(double) override {}
    Mat2 rho() const override { return state; }
    Mat2 bath_moment(BathLabel b) const override { return b == BathLabel::Slow ? slow : fast; }
    bool has_bath(BathLabel) const override { return true; }
    const DrivenTLS& tls() const override { return t; }
    SolverKind kind() const override { return SolverKind::RedfieldMarkov; }
};

} // namespace

TEST_SUITE("observables") {

TEST_CASE("heat current is omega times the bath-resolved population rate") {
    FixedDynamics d;
    d.fast << 0.0, cplx(0.1, 0.3), cplx(-0.2, 0.05), 0.0;
    // dP1/dt = -i (M01 - M10)
    const double rate = (cplx(0.0, -1.0) * (d.fast(0, 1) - d.fast(1, 0))).real();
    CHECK(population_rate(d.fast) == doctest::Approx(rate));
    CHECK(heat_current(d, BathLabel::Fast) == doctest::Approx(3.0 * rate));
    CHECK(heat_current(d, BathLabel::Slow) == 0.0);
    CHECK(population_rate(d) == doctest::Approx(rate));
}

TEST_CASE("period average of harmonics") {
    const std::size_t n = 64;
    std::vector<double> s(n + 1);
    for (std::size_t i = 0; i <= n; ++i) s[i] = 0.7 + std::cos(2 * kPi * i / n) + 0.3 * std::sin(4 * kPi * i / n);
    CHECK(period_average(s, n) == doctest::Approx(0.7).epsilon(1e-14));
    CurrentTrace tr{BathLabel::Fast, 0.1, s};
    CHECK(mean_current(tr, n) == doctest::Approx(0.7).epsilon(1e-14));
    CHECK_THROWS_AS(period_average(std::span<const double>(s).first(10), n), InsufficientSpan);
}

TEST_CASE("power by both routes and efficiency") {
    const std::size_t n = 100;
    std::vector<double> w(n + 1), r(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        w[i] = 3.0 + std::cos(2 * kPi * i / n);
        r[i] = std::cos(2 * kPi * i / n);
    }
    const auto p = power(-0.2, 0.5, w, r, n);
    CHECK(p.by_sum == doctest::Approx(0.3));
    CHECK(p.by_work == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(power(0.0, 0.0, w, std::span<const double>(r).first(5), n), DimensionMismatch);

    CHECK(efficiency(-0.2, 0.5, 0.3).value() == doctest::Approx(0.6));
    CHECK_FALSE(efficiency(-0.2, 0.5, -0.1).has_value());
    CHECK_FALSE(efficiency(-0.2, 0.0, 0.3).has_value());
}

TEST_CASE("detector fires on a decaying periodic signal") {
    const std::size_t n = 50;
    const double tau = 2.0, dt = tau / n;
    SteadyStateDetector det(n, 1e-4, 1000.0);
    DetectStatus st = DetectStatus::Pending;
    double t = 0.0;
    for (std::size_t i = 0; st == DetectStatus::Pending; ++i) {
        t = i * dt;
        const double env = 1.0 + std::exp(-0.5 * t);
        st = det.push(t, -0.1 * env + 0.01 * std::sin(kPi * t), 0.2 * env, 0.3 * env);
    }
    CHECK(st == DetectStatus::Detected);
    // exp(-0.5 t) tau ~ 1e-4 relative change per period needs t of roughly 16-20
    CHECK(det.detection_time() > 10.0);
    CHECK(det.detection_time() < 40.0);
    CHECK(det.last_change() < 1e-4);
}

TEST_CASE("detector accepts decayed equilibrium currents") {
    const std::size_t n = 20;
    SteadyStateDetector det(n, 1e-4, 1000.0);
    DetectStatus st = DetectStatus::Pending;
    for (std::size_t i = 0; st == DetectStatus::Pending; ++i) {
        const double t = i * 0.05;
        const double i_f = std::exp(-2.0 * t) * std::cos(3.0 * t);
        st = det.push(t, 0.0, i_f, 0.1);
    }
    CHECK(st == DetectStatus::Detected);
}

TEST_CASE("detector times out") {
    SteadyStateDetector det(10, 1e-4, 5.0);
    DetectStatus st = DetectStatus::Pending;
    for (std::size_t i = 0; st == DetectStatus::Pending; ++i) {
        const double t = i * 0.1;
        st = det.push(t, t, -t, 0.5);
    }
    CHECK(st == DetectStatus::Timeout);
}

TEST_CASE("steps per period is an integer division of the period") {
    CHECK(steps_per_period(2.0, 0.01) == 200);
    CHECK(steps_per_period(2.0, 0.013) == 154);
    CHECK(steps_per_period(1.0, 5.0) == 1);
}

TEST_CASE("steady state run on a weakly coupled undriven bath") {
    const std::vector<BathDecomposition> b{
        fit_exponentials({SpectralDensity::bandgap(0.05, 4.0), 2.0, BathLabel::Fast}, 50.0, 1e-6)};
    const HeomModel model(DrivenTLS{4.0, 0.0, 1.0}, b, 2);
    HeomPropagator p(model, HeomConfig{2, 1e-9, 0.02}, ops::ground_state());
    SteadyOptions opts;
    opts.step = 0.02;
    opts.max_time = 20000.0;
    opts.trace_stride = 100;
    const auto rep = run_to_steady_state(p, opts);
    CHECK(rep.converged);
    CHECK(rep.hermiticity < 1e-10);
    CHECK(rep.trace_drift < 1e-10);
    CHECK(std::abs(rep.mean_fast) < 1e-6);
    CHECK(rep.power_by_sum == doctest::Approx(rep.mean_fast).epsilon(1e-12));
    CHECK(!rep.trace.empty());
    CHECK(rep.x_corr.has_value() == false);
}

}
