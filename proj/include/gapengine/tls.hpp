// tls.hpp — the frequency-modulated two-level working medium

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gapengine/ops.hpp"

namespace gapengine {

// H0(t) = omega(t) sigma_+ sigma_-,  omega(t) = omega0 + lambda cos(omega_s t)
struct DrivenTLS {
    double omega0{3.0};
    double lambda{0.0};
    double omega_s{1.0};

    void validate() const {
        if (!(omega0 > 0.0)) throw std::invalid_argument("tls: omega0 must be > 0");
        if (!(lambda >= 0.0)) throw std::invalid_argument("tls: lambda must be >= 0");
        if (!(omega_s > 0.0)) throw std::invalid_argument("tls: omega_s must be > 0");
    }

    double frequency(double t) const { return omega0 + lambda * std::cos(omega_s * t); }
    double frequency_rate(double t) const { return -lambda * omega_s * std::sin(omega_s * t); }
    double period() const { return 2.0 * std::numbers::pi / omega_s; }
    // Int_0^t omega(tau) dtau
    double phase(double t) const { return omega0 * t + lambda / omega_s * std::sin(omega_s * t); }

    Mat2 hamiltonian(double t) const {
        Mat2 h = Mat2::Zero();
        h(1, 1) = frequency(t);
        return h;
    }
};

} // namespace gapengine
