// master_equations.cpp — Redfield+ and Markovian Redfield generators with RK4 stepping

#include "gapengine/master_equations.hpp"

#include <algorithm>
#include <string>

#include "gapengine/errors.hpp"

namespace gapengine {

namespace {

// -i[H0, m] with H0 = diag(0, w)
Mat2 free_term(const Mat2& m, double w) {
    Mat2 r;
    r(0, 0) = 0.0;
    r(1, 1) = 0.0;
    r(0, 1) = I_UNIT * w * m(0, 1);
    r(1, 0) = -I_UNIT * w * m(1, 0);
    return r;
}

// Shared RK4 over (rho, aux[]) pairs.
template <class State, class Rhs>
void rk4(State& s, double h, Rhs&& f) {
    auto axpy = [](const State& y, double a, const State& k) {
        State r = y;
        r.rho += a * k.rho;
        auto& ra = r.*State::aux;
        const auto& ka = k.*State::aux;
        for (std::size_t i = 0; i < ra.size(); ++i) ra[i] += a * ka[i];
        r.t = y.t + a;
        return r;
    };
    const State k1 = f(s);
    const State k2 = f(axpy(s, 0.5 * h, k1));
    const State k3 = f(axpy(s, 0.5 * h, k2));
    const State k4 = f(axpy(s, h, k3));
    s.rho += h / 6.0 * (k1.rho + 2.0 * k2.rho + 2.0 * k3.rho + k4.rho);
    auto& sa = s.*State::aux;
    for (std::size_t i = 0; i < sa.size(); ++i) {
        sa[i] += h / 6.0 * ((k1.*State::aux)[i] + 2.0 * (k2.*State::aux)[i] + 2.0 * (k3.*State::aux)[i] +
                            (k4.*State::aux)[i]);
    }
    s.t += h;
}

void check_finite(const Mat2& rho, double t, const char* who) {
    if (!rho.allFinite() || ops::max_abs(rho) > 1e6) {
        throw InstabilityError(std::string(who) + ": reduced state diverged at t = " + std::to_string(t), t);
    }
}

} // namespace

ModeTable ModeTable::from(std::span<const BathDecomposition> baths) {
    ModeTable m;
    for (const auto& mode : coupled_modes(baths)) {
        m.d.push_back(mode.d);
        m.dbar.push_back(mode.dbar);
        m.gamma.push_back(mode.gamma);
        m.owner.push_back(mode.bath);
    }
    return m;
}

bool ModeTable::has_bath(BathLabel b) const { return std::find(owner.begin(), owner.end(), b) != owner.end(); }

RedfieldPlusState redfield_plus_rhs(const RedfieldPlusState& s, const DrivenTLS& tls, const ModeTable& modes) {
    if (s.ados.size() != modes.size()) {
        throw DimensionMismatch("redfield+: state has " + std::to_string(s.ados.size()) + " ADOs, expected " +
                                std::to_string(modes.size()));
    }
    const double w = tls.frequency(s.t);
    const Mat2 sx = ops::sigma_x();
    RedfieldPlusState out;
    out.t = s.t;
    out.rho = free_term(s.rho, w);
    out.ados.resize(s.ados.size());
    const Mat2 sx_rho = sx * s.rho;
    const Mat2 rho_sx = s.rho * sx;
    for (std::size_t k = 0; k < s.ados.size(); ++k) {
        out.rho -= I_UNIT * ops::commutator(sx, s.ados[k]);
        out.ados[k] = free_term(s.ados[k], w) - modes.gamma[k] * s.ados[k] -
                      I_UNIT * (modes.d[k] * sx_rho - modes.dbar[k] * rho_sx);
    }
    return out;
}

MarkovRedfieldState markov_redfield_rhs(const MarkovRedfieldState& s, const DrivenTLS& tls, const ModeTable& modes) {
    if (s.q.size() != modes.size()) {
        throw DimensionMismatch("markov redfield: state has " + std::to_string(s.q.size()) +
                                " auxiliary operators, expected " + std::to_string(modes.size()));
    }
    const double w = tls.frequency(s.t);
    const Mat2 sx = ops::sigma_x();
    MarkovRedfieldState out;
    out.t = s.t;
    out.rho = free_term(s.rho, w);
    out.q.resize(s.q.size());
    for (std::size_t k = 0; k < s.q.size(); ++k) {
        const Mat2 m = s.q[k] * s.rho + s.rho * s.q[k].adjoint();
        out.rho -= I_UNIT * ops::commutator(sx, m);
        out.q[k] = free_term(s.q[k], w) - modes.gamma[k] * s.q[k] - I_UNIT * modes.d[k] * sx;
    }
    return out;
}

namespace {

struct RpState : RedfieldPlusState {
    static constexpr std::vector<Mat2> RedfieldPlusState::*aux = &RedfieldPlusState::ados;
};
struct MrState : MarkovRedfieldState {
    static constexpr std::vector<Mat2> MarkovRedfieldState::*aux = &MarkovRedfieldState::q;
};

std::vector<cplx> flatten(const Mat2& rho, const std::vector<Mat2>& aux) {
    std::vector<cplx> v;
    v.reserve(4 * (aux.size() + 1));
    auto put = [&](const Mat2& m) {
        for (int i = 0; i < 2; ++i) for (int j = 0; j < 2; ++j) v.push_back(m(i, j));
    };
    put(rho);
    for (const auto& m : aux) put(m);
    return v;
}

void unflatten(std::span<const cplx> v, Mat2& rho, std::vector<Mat2>& aux, const char* who) {
    if (v.size() != 4 * (aux.size() + 1)) throw DimensionMismatch(std::string(who) + ": state vector size mismatch");
    auto get = [&](std::size_t at, Mat2& m) {
        for (int i = 0; i < 2; ++i) for (int j = 0; j < 2; ++j) m(i, j) = v[4 * at + 2 * i + j];
    };
    get(0, rho);
    for (std::size_t k = 0; k < aux.size(); ++k) get(k + 1, aux[k]);
}

} // namespace

std::vector<cplx> RedfieldPlusPropagator::state_vector() const { return flatten(state_.rho, state_.ados); }

void RedfieldPlusPropagator::set_state_vector(std::span<const cplx> v) {
    unflatten(v, state_.rho, state_.ados, "redfield+");
}

std::vector<cplx> MarkovRedfieldPropagator::state_vector() const { return flatten(state_.rho, state_.q); }

void MarkovRedfieldPropagator::set_state_vector(std::span<const cplx> v) {
    unflatten(v, state_.rho, state_.q, "markov redfield");
}

RedfieldPlusPropagator::RedfieldPlusPropagator(const DrivenTLS& tls, std::span<const BathDecomposition> baths,
                                               const Mat2& rho0, double t0)
    : tls_(tls), modes_(ModeTable::from(baths)) {
    tls_.validate();
    state_.t = t0;
    state_.rho = rho0;
    state_.ados.assign(modes_.size(), Mat2::Zero());
}

void RedfieldPlusPropagator::step(double h) {
    RpState s{state_};
    rk4(s, h, [&](const RpState& y) { return RpState{redfield_plus_rhs(y, tls_, modes_)}; });
    state_ = s;
    check_finite(state_.rho, state_.t, "redfield+");
}

Mat2 RedfieldPlusPropagator::bath_moment(BathLabel b) const {
    Mat2 m = Mat2::Zero();
    for (std::size_t k = 0; k < modes_.size(); ++k) {
        if (modes_.owner[k] == b) m += state_.ados[k];
    }
    return m;
}

MarkovRedfieldPropagator::MarkovRedfieldPropagator(const DrivenTLS& tls, std::span<const BathDecomposition> baths,
                                                   const Mat2& rho0, double t0)
    : tls_(tls), modes_(ModeTable::from(baths)) {
    tls_.validate();
    state_.t = t0;
    state_.rho = rho0;
    state_.q.assign(modes_.size(), Mat2::Zero());
}

void MarkovRedfieldPropagator::step(double h) {
    MrState s{state_};
    rk4(s, h, [&](const MrState& y) { return MrState{markov_redfield_rhs(y, tls_, modes_)}; });
    state_ = s;
    check_finite(state_.rho, state_.t, "markov redfield");
}

Mat2 MarkovRedfieldPropagator::bath_moment(BathLabel b) const {
    Mat2 m = Mat2::Zero();
    for (std::size_t k = 0; k < modes_.size(); ++k) {
        if (modes_.owner[k] == b) m += state_.q[k] * state_.rho + state_.rho * state_.q[k].adjoint();
    }
    return m;
}

} // namespace gapengine
