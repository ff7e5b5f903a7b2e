// bath.cpp — spectral densities and the quadrature oracle for bath correlation functions

#include "gapengine/bath.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "gapengine/errors.hpp"
#include "quadrature.hpp"

namespace gapengine {

namespace {

constexpr double kSupportThreshold = 1e-10;

double pow6(double x) {
    const double x2 = x * x;
    return x2 * x2 * x2;
}

// Half-width of the spectral peak, from |denominator resonance| ~ w^2 term.
double peak_half_width(const SpectralDensity& sd) {
    const double om = sd.omega_c;
    if (sd.family == SpectralFamily::Bandgap) {
        return std::cbrt(om * std::pow(sd.xi, 5)) / (2.0 * om);
    }
    return std::cbrt(om) / (4.0 * om * om * om);
}

std::vector<double> breakpoints(const BathSpec& bath, const SpectralSupport& sup) {
    std::vector<double> br{sup.lo, sup.hi};
    const double om = bath.spectral.omega_c;
    const double w = peak_half_width(bath.spectral);
    for (double sign : {1.0, -1.0}) {
        for (double m : {0.0, 1.0, 3.0, 10.0, 30.0}) {
            for (double s : {1.0, -1.0}) {
                const double x = sign * om + s * m * w;
                if (x > sup.lo && x < sup.hi) br.push_back(x);
            }
        }
    }
    if (0.0 > sup.lo && 0.0 < sup.hi) br.push_back(0.0);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    return br;
}

} // namespace

SpectralDensity SpectralDensity::bandgap(double kappa, double omega_c, double xi) {
    SpectralDensity sd{SpectralFamily::Bandgap, kappa, omega_c, xi};
    sd.validate();
    return sd;
}

SpectralDensity SpectralDensity::narrow(double kappa, double omega_c) {
    SpectralDensity sd{SpectralFamily::Narrow, kappa, omega_c, 1.0};
    sd.validate();
    return sd;
}

void SpectralDensity::validate() const {
    if (!(kappa > 0.0)) throw std::invalid_argument("spectral density: kappa must be > 0");
    if (!(omega_c > 0.0)) throw std::invalid_argument("spectral density: Omega must be > 0");
    if (!(xi > 0.0)) throw std::invalid_argument("spectral density: xi must be > 0");
}

double SpectralDensity::slope_at_zero() const {
    if (family == SpectralFamily::Bandgap) {
        return kappa * std::pow(xi, 8) / std::pow(omega_c, 12);
    }
    return kappa / std::pow(omega_c, 24);
}

double SpectralDensity::effective_coupling() const {
    return spectral_density_value(*this, omega_c) / omega_c;
}

std::string to_string(SpectralFamily f) { return f == SpectralFamily::Bandgap ? "bandgap" : "narrow"; }
std::string to_string(BathLabel b) { return b == BathLabel::Slow ? "slow" : "fast"; }

void BathSpec::validate() const {
    spectral.validate();
    if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
        throw std::invalid_argument("bath: temperature must be finite and >= 0");
    }
}

void BathSpec::check_label(double omega0) const {
    if (label == BathLabel::Slow && !(spectral.omega_c < omega0)) {
        throw AssemblyError("slow bath requires Omega < omega0 (Omega = " + std::to_string(spectral.omega_c) +
                            ", omega0 = " + std::to_string(omega0) + ")");
    }
    if (label == BathLabel::Fast && !(spectral.omega_c > omega0)) {
        throw AssemblyError("fast bath requires Omega > omega0 (Omega = " + std::to_string(spectral.omega_c) +
                            ", omega0 = " + std::to_string(omega0) + ")");
    }
}

double spectral_density_value(const SpectralDensity& sd, double omega) {
    const double w2 = omega * omega;
    const double om2 = sd.omega_c * sd.omega_c;
    if (sd.family == SpectralFamily::Bandgap) {
        const double xi2 = sd.xi * sd.xi;
        const double xi8 = xi2 * xi2 * xi2 * xi2;
        return sd.kappa * xi8 * omega / (pow6(w2 - om2) + w2 * xi8 * xi2);
    }
    return sd.kappa * omega / (pow6(w2 * w2 - om2 * om2) + w2);
}

double spectral_function(const BathSpec& bath, double omega) {
    if (bath.zero_temperature()) {
        return omega > 0.0 ? spectral_density_value(bath.spectral, omega) : 0.0;
    }
    if (omega == 0.0) return bath.spectral.slope_at_zero() * bath.temperature;
    const double x = bath.beta() * omega;
    const double j = spectral_density_value(bath.spectral, omega);
    if (std::abs(x) < 1e-8) {
        // n_beta = 1/x + 1/2 + O(x)
        return j / x + 0.5 * j;
    }
    return j / (-std::expm1(-x));
}

SpectralSupport spectral_support(const BathSpec& bath) {
    const double om = bath.spectral.omega_c;
    double feature = peak_half_width(bath.spectral);
    if (!bath.zero_temperature()) feature = std::min(feature, std::numbers::pi * bath.temperature);
    const double big = 4.0 * om + 40.0;
    const double step = std::min(feature / 20.0, 0.01);
    const auto n = static_cast<std::size_t>(std::ceil(2.0 * big / step));

    double peak = 0.0;
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        vals[i] = std::abs(spectral_function(bath, -big + step * static_cast<double>(i)));
        peak = std::max(peak, vals[i]);
    }
    const double thr = kSupportThreshold * peak;
    std::size_t first = n, last = 0;
    for (std::size_t i = 0; i <= n; ++i) {
        if (vals[i] >= thr) {
            first = std::min(first, i);
            last = i;
        }
    }
    SpectralSupport sup;
    sup.peak = peak;
    sup.feature = feature;
    sup.lo = -big + step * static_cast<double>(first > 0 ? first - 1 : 0);
    sup.hi = -big + step * static_cast<double>(std::min(last + 1, n));
    if (bath.zero_temperature()) sup.lo = std::max(sup.lo, 0.0);
    return sup;
}

std::complex<double> correlation_quadrature(const BathSpec& bath, double t, double abs_tol) {
    if (t < 0.0) throw std::invalid_argument("correlation_quadrature: t must be >= 0");
    const SpectralSupport sup = spectral_support(bath);
    std::vector<double> br = breakpoints(bath, sup);
    // Keep panels to a few oscillations of exp(-i w t).
    if (t > 0.0) {
        const double max_len = 8.0 * std::numbers::pi / t;
        std::vector<double> fine{br.front()};
        for (std::size_t i = 0; i + 1 < br.size(); ++i) {
            const double len = br[i + 1] - br[i];
            const auto pieces = static_cast<std::size_t>(std::ceil(len / max_len));
            for (std::size_t p = 1; p <= pieces; ++p) {
                fine.push_back(br[i] + len * static_cast<double>(p) / static_cast<double>(pieces));
            }
        }
        br = std::move(fine);
    }
    auto integrand = [&](double w) -> std::complex<double> {
        return spectral_function(bath, w) * std::complex<double>(std::cos(w * t), -std::sin(w * t));
    };
    auto res = detail::adaptive_gk_pieces(integrand, br, abs_tol * std::numbers::pi);
    if (!res.converged || res.error > abs_tol * std::numbers::pi) {
        throw QuadratureError("correlation_quadrature: no convergence at t = " + std::to_string(t) +
                              " (error estimate " + std::to_string(res.error / std::numbers::pi) + ")");
    }
    return res.value / std::numbers::pi;
}

std::vector<std::complex<double>> correlation_on_grid(const BathSpec& bath, double dt, std::size_t n) {
    std::vector<std::complex<double>> out(n, {0.0, 0.0});
    if (n == 0) return out;
    const SpectralSupport sup = spectral_support(bath);
    const std::vector<double> br = breakpoints(bath, sup);
    const double t_max = dt * static_cast<double>(n - 1);
    const double panel = std::min(sup.feature / 2.0, 6.0 / std::max(t_max, 1.0));

    using GL = boost::math::quadrature::gauss<double, 16>;
    const auto& x = GL::abscissa();
    const auto& wt = GL::weights();

    std::vector<double> nodes, weights;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        const double len = br[i + 1] - br[i];
        const auto pieces = static_cast<std::size_t>(std::ceil(len / panel));
        const double h = len / static_cast<double>(pieces);
        for (std::size_t p = 0; p < pieces; ++p) {
            const double mid = br[i] + h * (static_cast<double>(p) + 0.5);
            for (std::size_t j = 0; j < x.size(); ++j) {
                const double half = 0.5 * h;
                if (x[j] == 0.0) {
                    nodes.push_back(mid);
                    weights.push_back(wt[j] * half);
                } else {
                    nodes.push_back(mid - half * x[j]);
                    weights.push_back(wt[j] * half);
                    nodes.push_back(mid + half * x[j]);
                    weights.push_back(wt[j] * half);
                }
            }
        }
    }

    constexpr std::size_t kReanchor = 512;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double w = nodes[i];
        const double a = weights[i] * spectral_function(bath, w) / std::numbers::pi;
        if (a == 0.0) continue;
        const std::complex<double> z(std::cos(w * dt), -std::sin(w * dt));
        std::complex<double> p(a, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j % kReanchor == 0 && j > 0) {
                const double tj = dt * static_cast<double>(j);
                p = a * std::complex<double>(std::cos(w * tj), -std::sin(w * tj));
            }
            out[j] += p;
            p *= z;
        }
    }
    return out;
}

double memory_time(const BathSpec& bath) {
    const SpectralSupport sup = spectral_support(bath);
    const double wmax = std::max(std::abs(sup.lo), std::abs(sup.hi));
    const double dt = std::numbers::pi / (2.0 * std::max(wmax, 1.0));
    double horizon = 50.0;
    constexpr double kHorizonCap = 1e5;
    while (true) {
        const auto n = static_cast<std::size_t>(std::ceil(horizon / dt)) + 1;
        const auto c = correlation_on_grid(bath, dt, n);
        const double thr = 1e-3 * std::abs(c[0]);
        double last = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(c[j]) >= thr) last = dt * static_cast<double>(j);
        }
        if (last < 0.5 * horizon || horizon >= kHorizonCap) return last;
        horizon *= 2.0;
    }
}

double default_fit_window(const BathSpec& bath) { return std::max(50.0, 3.0 * memory_time(bath)); }

double counter_term(const SpectralDensity& sd) {
    sd.validate();
    const double om = sd.omega_c;
    const double w = peak_half_width(sd);
    auto f = [&](double x) { return x > 0.0 ? spectral_density_value(sd, x) / x : sd.slope_at_zero(); };
    std::vector<double> br{0.0};
    for (double m : {-30.0, -10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0, 30.0}) {
        const double x = om + m * w;
        if (x > br.back()) br.push_back(x);
    }
    const double far = 4.0 * om + 40.0;
    br.push_back(far);
    constexpr double tol = 1e-12;
    auto res = detail::adaptive_gk_pieces(f, br, tol);
    // Tail beyond `far`: J/w ~ kappa xi^8 / w^12 (bandgap) or kappa / w^24 (narrow).
    double tail = 0.0;
    if (sd.family == SpectralFamily::Bandgap) {
        tail = sd.kappa * std::pow(sd.xi, 8) / (11.0 * std::pow(far, 11));
    } else {
        tail = sd.kappa / (23.0 * std::pow(far, 23));
    }
    if (!res.converged) throw QuadratureError("counter_term: quadrature did not converge");
    return 2.0 / std::numbers::pi * (res.value + tail);
}

} // namespace gapengine
