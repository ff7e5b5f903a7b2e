// master_equations.hpp — time-nonlocal Redfield+ and time-local Markovian Redfield solvers
//
// Both are written in the Schroedinger picture with one auxiliary 2x2 operator per mode.
//
// Redfield+ (first-order truncation of the hierarchy, un-rescaled):
//   d rho/dt   = -i[H0, rho] - i sum_k [sigma_x, rho_k]
//   d rho_k/dt = -i[H0, rho_k] - gamma_k rho_k - i (d_k sigma_x rho - dbar_k rho sigma_x)
// over the conjugation-closed mode list (see CoupledMode).
//
// Markovian Redfield:
//   d rho/dt = -i[H0, rho] - i sum_k [sigma_x, q_k rho + rho q_k^dag]
//   d q_k/dt = -i[H0, q_k] - gamma_k q_k - i d_k sigma_x

#pragma once

#include <span>
#include <vector>

#include "gapengine/decomposition.hpp"
#include "gapengine/dynamics.hpp"
#include "gapengine/ops.hpp"
#include "gapengine/tls.hpp"

namespace gapengine {

// Flattened mode list shared by both solvers (slow modes first, then fast). The Markovian
// solver only uses d; its q_k^dag term supplies the conjugate part exactly.
struct ModeTable {
    std::vector<std::complex<double>> d;
    std::vector<std::complex<double>> dbar;
    std::vector<std::complex<double>> gamma;
    std::vector<BathLabel> owner;

    static ModeTable from(std::span<const BathDecomposition> baths);
    std::size_t size() const { return d.size(); }
    bool has_bath(BathLabel b) const;
};

struct RedfieldPlusState {
    double t{0.0};
    Mat2 rho{Mat2::Zero()};
    std::vector<Mat2> ados; // un-rescaled rho_{0_k^+}
};

struct MarkovRedfieldState {
    double t{0.0};
    Mat2 rho{Mat2::Zero()};
    std::vector<Mat2> q;
};

RedfieldPlusState redfield_plus_rhs(const RedfieldPlusState& s, const DrivenTLS& tls, const ModeTable& modes);
MarkovRedfieldState markov_redfield_rhs(const MarkovRedfieldState& s, const DrivenTLS& tls, const ModeTable& modes);

class RedfieldPlusPropagator final : public Dynamics {
public:
    RedfieldPlusPropagator(const DrivenTLS& tls, std::span<const BathDecomposition> baths, const Mat2& rho0,
                           double t0 = 0.0);

    double time() const override { return state_.t; }
    void step(double h) override;
    Mat2 rho() const override { return state_.rho; }
    Mat2 bath_moment(BathLabel b) const override;
    bool has_bath(BathLabel b) const override { return modes_.has_bath(b); }
    const DrivenTLS& tls() const override { return tls_; }
    SolverKind kind() const override { return SolverKind::RedfieldPlus; }
    std::vector<cplx> state_vector() const override;
    void set_state_vector(std::span<const cplx> v) override;

    const RedfieldPlusState& state() const { return state_; }
    const ModeTable& modes() const { return modes_; }

private:
    DrivenTLS tls_;
    ModeTable modes_;
    RedfieldPlusState state_;
};

class MarkovRedfieldPropagator final : public Dynamics {
public:
    MarkovRedfieldPropagator(const DrivenTLS& tls, std::span<const BathDecomposition> baths, const Mat2& rho0,
                             double t0 = 0.0);

    double time() const override { return state_.t; }
    void step(double h) override;
    Mat2 rho() const override { return state_.rho; }
    // Effective first-order moment sum_k (q_k rho + rho q_k^dag) over the bath's modes.
    Mat2 bath_moment(BathLabel b) const override;
    bool has_bath(BathLabel b) const override { return modes_.has_bath(b); }
    const DrivenTLS& tls() const override { return tls_; }
    SolverKind kind() const override { return SolverKind::RedfieldMarkov; }
    std::vector<cplx> state_vector() const override;
    void set_state_vector(std::span<const cplx> v) override;

    const MarkovRedfieldState& state() const { return state_; }

private:
    DrivenTLS tls_;
    ModeTable modes_;
    MarkovRedfieldState state_;
};

} // namespace gapengine
