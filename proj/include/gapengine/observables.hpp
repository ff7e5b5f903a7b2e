// observables.hpp — heat currents, period averages, power, efficiency and steady-state detection
//
// With M_a the summed first-order moment of bath a and H0 = diag(0, omega):
//   I_a(t)  = -i Tr([H0, sigma_x] M_a) = omega(t) dP1_a/dt,   dP1_a/dt = -i (M_a(0,1) - M_a(1,0))
// Positive I_a means energy flows from bath a into the system.

#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "gapengine/bath.hpp"
#include "gapengine/dynamics.hpp"

namespace gapengine {

double heat_current(const Dynamics& dyn, BathLabel bath);
// Contribution of the given moment to dP1/dt.
double population_rate(const Mat2& moment);
// Total dP1/dt from all baths.
double population_rate(const Dynamics& dyn);

// Real part of sum Tr rho_{0_k^+,0_l^+} / (C_s(0) C_f(0)). Throws DepthInsufficient when the
// solver carries no second-order mixed ADOs.
double bath_bath_correlation(const Dynamics& dyn, double cs0, double cf0);

// Uniformly sampled trace; samples[0] and samples[n] are one period apart when n = samples per period.
struct CurrentTrace {
    BathLabel bath{BathLabel::Slow};
    double dt{0.0};
    std::vector<double> samples;
};

// Trapezoidal average over exactly one period (the last `per_period` intervals of the trace).
double mean_current(const CurrentTrace& trace, std::size_t per_period);
double period_average(std::span<const double> samples, std::size_t per_period);

struct PowerPair {
    double by_sum{0.0};
    double by_work{0.0};
};

// by_sum = I_s + I_f; by_work = (1/tau) Int omega dP1/dt over the same period.
PowerPair power(double mean_slow, double mean_fast, std::span<const double> omega,
                std::span<const double> p1_rate, std::size_t per_period);

// eta = 1 - |I_cold / I_hot|; empty when I_hot = 0 or P <= 0.
std::optional<double> efficiency(double mean_cold, double mean_hot, double power);

enum class DetectStatus { Pending, Detected, Timeout };

// Consumes one sample per integrator step and compares successive full-period averages of
// I_s, I_f and P1. Steady state is declared once three consecutive period-to-period changes
// all stay below tol (relative). Current changes are measured against the larger of the two
// current averages, but never against less than current_floor times the largest |I| seen, so
// that decayed (equilibrium) currents still register as settled.
class SteadyStateDetector {
public:
    SteadyStateDetector(std::size_t per_period, double tol, double max_time, double current_floor = 1e-6);

    DetectStatus push(double t, double i_slow, double i_fast, double p1);
    // Forgets all period averages (after the state was replaced) but keeps the current peak.
    void restart();
    DetectStatus status() const { return status_; }
    double detection_time() const { return detect_time_; }
    std::size_t periods() const { return averages_.size(); }
    // Largest relative change seen among the last three period comparisons.
    double last_change() const { return last_change_; }

private:
    struct Averages {
        double i_slow, i_fast, p1;
    };
    double change(const Averages& a, const Averages& b) const;

    std::size_t per_period_;
    double tol_;
    double max_time_;
    double floor_;
    double peak_{0.0};
    std::vector<double> buf_slow_, buf_fast_, buf_p1_;
    std::vector<Averages> averages_;
    std::vector<double> changes_;
    DetectStatus status_{DetectStatus::Pending};
    double detect_time_{0.0};
    double last_change_{0.0};
};

struct SteadyOptions {
    double step{0.0};         // requested step; snapped so that tau_s / h is an integer
    double tol{1e-4};         // relative change between period averages
    double max_time{5000.0};  // detection timeout
    double current_floor{1e-6};  // see SteadyStateDetector
    std::size_t trace_stride{0}; // > 0: record every n-th step
    // Jump along the slowest period-to-period relaxation direction once it is clearly dominant
    // (needs Dynamics::state_vector support; ignored otherwise).
    bool extrapolate{true};
};

struct TraceRow {
    double t, p1, i_slow, i_fast;
};

struct SteadyStateReport {
    double mean_slow{0.0};
    double mean_fast{0.0};
    double power_by_sum{0.0};
    double power_by_work{0.0};
    // -(1/tau) Int d(omega)/dt P1 dt: the work route evaluated from populations alone.
    double power_by_parts{0.0};
    std::optional<double> x_corr;
    double x_corr_imag{0.0};
    double mean_p1{0.0};
    double detect_time{0.0};
    bool converged{false};
    double period_change{0.0};
    // max |rho(t) - rho(t - tau)| over the final period
    double periodicity_defect{0.0};
    double step{0.0};
    std::size_t steps{0};
    double trace_drift{0.0};
    double hermiticity{0.0};
    std::size_t extrapolations{0};
    std::vector<TraceRow> trace;
};

// Integer number of steps per period for the requested step.
std::size_t steps_per_period(double period, double requested);

// Propagates until the detector fires (or times out) and evaluates the final period.
// cs0/cf0 normalize the bath-bath correlation (ignored when unavailable).
SteadyStateReport run_to_steady_state(Dynamics& dyn, const SteadyOptions& opts, double cs0 = 1.0, double cf0 = 1.0);

} // namespace gapengine
