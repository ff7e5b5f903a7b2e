// dynamics.hpp — common interface of the time-stepping solvers
//
// Observables only need the reduced state and the bath moments
//   M_alpha(t) = sum_{k in alpha} rho_{0_k^+}(t)      (un-rescaled first-order ADOs)
// from which heat currents and the population rate follow.

#pragma once

#include <complex>
#include <optional>
#include <vector>
#include <span>
#include <string>

#include "gapengine/bath.hpp"
#include "gapengine/ops.hpp"
#include "gapengine/tls.hpp"

namespace gapengine {

enum class SolverKind { Heom, RedfieldPlus, RedfieldMarkov, BornMarkov };

const char* to_string(SolverKind s);
SolverKind solver_from_string(const std::string& s);

class Dynamics {
public:
    virtual ~Dynamics() = default;

    virtual double time() const = 0;
    // One classical RK4 step of size h.
    virtual void step(double h) = 0;
    virtual Mat2 rho() const = 0;
    virtual Mat2 bath_moment(BathLabel bath) const = 0;
    virtual bool has_bath(BathLabel bath) const = 0;
    // sum_{k slow, l fast} Tr rho_{0_k^+, 0_l^+}; absent below second order.
    virtual std::optional<std::complex<double>> mixed_moment() const { return std::nullopt; }
    virtual const DrivenTLS& tls() const = 0;
    virtual SolverKind kind() const = 0;

    // Flat copy of the complete dynamical state (reduced density and auxiliaries). Empty when
    // the solver does not expose it.
    virtual std::vector<cplx> state_vector() const { return {}; }
    // Replaces the state at the current time; the vector must come from state_vector().
    virtual void set_state_vector(std::span<const cplx> v);
};

} // namespace gapengine
