// bath.hpp — reservoir spectral densities, spectral functions and correlation functions
//
// Conventions (hbar = k_B = 1):
//   C(t) = (1/pi) Int dw S(w) exp(-i w t),   S(w) = J(w) n_beta(w),   n_beta(w) = 1/(1 - exp(-beta w))
// so that S(w) - S(-w) = J(w) and S(w) = exp(beta w) S(-w).

#pragma once

#include <complex>
#include <limits>
#include <string>
#include <vector>

namespace gapengine {

enum class SpectralFamily { Bandgap, Narrow };

// J(w) = kappa xi^8 w / ((w^2 - Omega^2)^6 + w^2 xi^10)     (Bandgap)
// J(w) = kappa w / ((w^4 - Omega^4)^6 + w^2)                 (Narrow, xi unused)
struct SpectralDensity {
    SpectralFamily family{SpectralFamily::Bandgap};
    double kappa{1.0};
    double omega_c{1.0}; // central frequency Omega
    double xi{1.0};

    static SpectralDensity bandgap(double kappa, double omega_c, double xi = 1.0);
    static SpectralDensity narrow(double kappa, double omega_c);

    // Throws std::invalid_argument on kappa, Omega or xi <= 0.
    void validate() const;

    // dJ/dw at w = 0.
    double slope_at_zero() const;
    // Effective resonant coupling J(Omega)/Omega.
    double effective_coupling() const;
};

enum class BathLabel { Slow, Fast };

std::string to_string(SpectralFamily f);
std::string to_string(BathLabel b);

struct BathSpec {
    SpectralDensity spectral;
    double temperature{0.0};
    BathLabel label{BathLabel::Slow};

    // +infinity at T = 0.
    double beta() const {
        return temperature > 0.0 ? 1.0 / temperature : std::numeric_limits<double>::infinity();
    }
    bool zero_temperature() const { return !(temperature > 0.0); }

    void validate() const;
    // Slow baths must sit below the TLS frequency, fast baths above it.
    void check_label(double omega0) const;
};

double spectral_density_value(const SpectralDensity& sd, double omega);

// Bose-weighted spectral function with the analytic w -> 0 and T = 0 limits.
double spectral_function(const BathSpec& bath, double omega);

// Frequency interval outside which |S| < 1e-10 max|S|.
struct SpectralSupport {
    double lo{0.0};
    double hi{0.0};
    double peak{0.0};   // max |S|
    double feature{0.0}; // narrowest spectral feature scale (used to size quadrature panels)
};

SpectralSupport spectral_support(const BathSpec& bath);

inline constexpr double kQuadratureTolerance = 1e-9;

// Adaptive Gauss-Kronrod evaluation of C(t). Throws QuadratureError if the requested
// absolute tolerance is not reached.
std::complex<double> correlation_quadrature(const BathSpec& bath, double t,
                                            double abs_tol = kQuadratureTolerance);

// Batched evaluation of C on the uniform grid t_j = j * dt, j = 0..n-1, using a composite
// Gauss-Legendre rule sized to resolve both the spectral features and exp(-i w t_max).
std::vector<std::complex<double>> correlation_on_grid(const BathSpec& bath, double dt, std::size_t n);

// Time after which |C(t)| stays below 1e-3 |C(0)|.
double memory_time(const BathSpec& bath);

// 3x memory time, floored at 50.
double default_fit_window(const BathSpec& bath);

// mu = (2/pi) Int_0^inf dw J(w)/w
double counter_term(const SpectralDensity& sd);

} // namespace gapengine
