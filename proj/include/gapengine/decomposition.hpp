// decomposition.hpp — exponential-sum representation of a bath correlation function
//
//   C(t) ~= sum_k d_k exp(-gamma_k t),   t >= 0,  Re gamma_k > 0
//
// Modes are identified by a matrix-pencil pass on the quadrature oracle and refined by
// Levenberg-Marquardt; the reported error is certified against the oracle on a dense grid.

#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gapengine/bath.hpp"

namespace gapengine {

struct ExponentialMode {
    std::complex<double> d;
    std::complex<double> gamma;
};

struct BathDecomposition {
    BathSpec spec;
    std::vector<ExponentialMode> modes;
    double t_max{0.0};
    double certified_error{0.0};

    std::complex<double> reconstruct(double t) const;
    std::size_t size() const { return modes.size(); }
};

struct FitOptions {
    std::size_t max_modes{24};
    bool refine{true};
    // Cap on pencil samples; longer windows are identified on their leading part.
    std::size_t pencil_samples{1200};
};

// Smallest mode count (<= max_modes) whose certified error meets tol. Throws FitError with
// the best achieved error otherwise. tol may be +infinity.
BathDecomposition fit_exponentials(const BathSpec& bath, double t_max, double tol, const FitOptions& opts = {});

// Dense grid used for certification: uniform on [0, t_max], resolving the highest frequency.
struct CertGrid {
    double dt{0.0};
    std::size_t n{0};
};
CertGrid certification_grid(const BathSpec& bath, double t_max);

// Hierarchy mode: one exponent gamma with the amplitude d it carries in C(t) and the amplitude
// dbar it carries in C*(t) = sum dbar exp(-gamma t). A pole set closed under conjugation gives
// dbar = conj(d of the partner at conj(gamma)); unpaired complex poles get a partner with d = 0.
struct CoupledMode {
    std::complex<double> d;
    std::complex<double> dbar;
    std::complex<double> gamma;
    BathLabel bath{BathLabel::Slow};

    // Rescaling magnitude for the hierarchy, max(|d|, |dbar|).
    double scale() const;
};

// Slow-bath modes first, then fast; each bath's list is closed under conjugation.
std::vector<CoupledMode> coupled_modes(std::span<const BathDecomposition> baths);

// Plain-text interchange format: "key = value" header lines followed by one mode per line
// (Re d, Im d, Re gamma, Im gamma).
void write_decomposition(std::ostream& os, const BathDecomposition& dec);
BathDecomposition read_decomposition(std::istream& is);

void save_decomposition(const std::string& path, const BathDecomposition& dec);
BathDecomposition load_decomposition(const std::string& path);

} // namespace gapengine
