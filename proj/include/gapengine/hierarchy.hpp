// hierarchy.hpp — rescaled hierarchical equations of motion for the driven TLS
//
// Each mode k carries an exponent gamma_k, its amplitude d_k in C(t) and its amplitude dbar_k in
// C*(t) (see CoupledMode). With s_k = max(|d_k|, |dbar_k|), ADOs are stored rescaled,
// rho~_n = rho_n / sqrt(prod_k n_k! s_k^n_k), and obey
//
//   d rho~_n/dt = -(i L0(t) + sum_k n_k gamma_k) rho~_n
//                 - i sum_k sqrt((n_k+1) s_k) [sigma_x, rho~_{n_k^+}]
//                 - i sum_k sqrt(n_k/s_k) (d_k sigma_x rho~_{n_k^-} - dbar_k rho~_{n_k^-} sigma_x)
//
// with L0(t) rho = [H0(t), rho]. For real exponents dbar_k = d_k^*. Modes of the slow bath come
// first, then the fast bath.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gapengine/decomposition.hpp"
#include "gapengine/dynamics.hpp"
#include "gapengine/ops.hpp"
#include "gapengine/tls.hpp"

namespace gapengine {

inline constexpr std::size_t kDefaultAdoCeiling = 2'000'000;

// All multi-indices with |n| <= depth, ordered by level and then by descending counts.
class AdoIndexSet {
public:
    AdoIndexSet() = default;
    AdoIndexSet(std::size_t modes, std::size_t depth, std::size_t ceiling = kDefaultAdoCeiling);

    std::size_t size() const { return level_.size(); }
    std::size_t modes() const { return modes_; }
    std::size_t depth() const { return depth_; }

    std::span<const std::uint8_t> counts(std::size_t i) const { return {counts_.data() + i * modes_, modes_}; }
    std::size_t level(std::size_t i) const { return level_[i]; }
    // Neighbour n + e_k / n - e_k, or npos when outside the set.
    std::size_t up(std::size_t i, std::size_t k) const { return up_[i * modes_ + k]; }
    std::size_t down(std::size_t i, std::size_t k) const { return down_[i * modes_ + k]; }
    std::size_t find(std::span<const std::uint8_t> n) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::size_t modes_{0};
    std::size_t depth_{0};
    std::vector<std::uint8_t> counts_;
    std::vector<std::uint32_t> level_;
    std::vector<std::size_t> up_;
    std::vector<std::size_t> down_;
};

// Number of multi-indices with K modes and |n| <= L, i.e. C(K+L, L).
std::size_t index_set_size(std::size_t modes, std::size_t depth);

AdoIndexSet build_index_set(std::size_t modes, std::size_t depth, std::size_t ceiling = kDefaultAdoCeiling);

enum class InitialState { Ground, Excited, Mixed };

struct HeomConfig {
    std::size_t depth{3};
    double filter{1e-7};
    double step{0.0}; // <= 0: use default_step()
    InitialState initial{InitialState::Ground};
    double blowup{1e6};
    std::size_t ceiling{kDefaultAdoCeiling};

    void validate() const;
};

Mat2 initial_density(InitialState s);

// h = tau_min / 200 with tau_min = min(2 pi/omega_s, 2 pi/omega0, 1/max Re gamma_k).
double default_step(const DrivenTLS& tls, std::span<const BathDecomposition> baths);

// Flat storage: four complex numbers (row-major 2x2) per ADO.
struct HierarchyState {
    double t{0.0};
    std::vector<cplx> data;

    std::size_t ados() const { return data.size() / 4; }
    Mat2 ado(std::size_t i) const;
    void set_ado(std::size_t i, const Mat2& m);
    Mat2 root() const { return ado(0); }
    std::size_t active() const;
};

// Static part of the hierarchy: mode list, index set and coupling tables.
class HeomModel {
public:
    HeomModel(const DrivenTLS& tls, std::span<const BathDecomposition> baths, std::size_t depth,
              std::size_t ceiling = kDefaultAdoCeiling);

    const DrivenTLS& tls() const { return tls_; }
    const AdoIndexSet& index() const { return index_; }
    std::size_t modes() const { return d_.size(); }
    std::complex<double> d(std::size_t k) const { return d_[k]; }
    std::complex<double> dbar(std::size_t k) const { return dbar_[k]; }
    double scale(std::size_t k) const { return scale_[k]; }
    std::complex<double> gamma(std::size_t k) const { return gamma_[k]; }
    BathLabel bath_of(std::size_t k) const { return owner_[k]; }
    bool has_bath(BathLabel b) const;
    double max_decay() const;

    HierarchyState make_state(const Mat2& rho0, double t0 = 0.0) const;

    // Writes d/dt of every ADO into out (same layout as state.data).
    void rhs(double t, std::span<const cplx> y, std::span<cplx> out) const;

    // Un-rescaled first-order ADO of mode k, and the bath sum of those.
    Mat2 first_order(const HierarchyState& s, std::size_t k) const;
    Mat2 bath_moment(const HierarchyState& s, BathLabel b) const;
    // sum over slow k, fast l of Tr rho_{0_k^+,0_l^+} (un-rescaled); needs depth >= 2.
    std::complex<double> mixed_moment(const HierarchyState& s) const;

private:
    DrivenTLS tls_;
    std::vector<std::complex<double>> d_;
    std::vector<std::complex<double>> dbar_;
    std::vector<std::complex<double>> gamma_;
    std::vector<double> scale_;
    std::vector<BathLabel> owner_;
    AdoIndexSet index_;
    std::vector<std::complex<double>> damping_; // sum_k n_k gamma_k per ADO
    // Indexed [k * (depth+2) + count].
    std::vector<double> up_coef_;                     // sqrt(count s_k)
    std::vector<std::complex<double>> down_coef_;     // sqrt(count / s_k) d_k
    std::vector<std::complex<double>> down_coef_bar_; // sqrt(count / s_k) dbar_k
    std::size_t stride_{0};
};

// Spec-level entry point: derivative of every ADO.
std::vector<cplx> heom_rhs(const HierarchyState& state, const DrivenTLS& tls, std::span<const BathDecomposition> baths,
                           std::size_t depth);

// Zeroes every non-root ADO whose largest |element| is below delta. Returns zeroed count.
std::size_t filter(HierarchyState& state, double delta);

// Owns a state and advances it with fixed-step RK4, filtering after every step.
class HeomPropagator final : public Dynamics {
public:
    HeomPropagator(const HeomModel& model, const HeomConfig& cfg, const Mat2& rho0);
    HeomPropagator(const HeomModel& model, const HeomConfig& cfg, HierarchyState state);

    double time() const override { return state_.t; }
    void step(double h) override;
    Mat2 rho() const override { return state_.root(); }
    Mat2 bath_moment(BathLabel b) const override { return model_->bath_moment(state_, b); }
    bool has_bath(BathLabel b) const override { return model_->has_bath(b); }
    std::optional<std::complex<double>> mixed_moment() const override;
    const DrivenTLS& tls() const override { return model_->tls(); }
    SolverKind kind() const override { return SolverKind::Heom; }
    std::vector<cplx> state_vector() const override { return state_.data; }
    void set_state_vector(std::span<const cplx> v) override;

    const HierarchyState& state() const { return state_; }
    const HeomModel& model() const { return *model_; }
    const HeomConfig& config() const { return cfg_; }

    // Advance to t_end in steps of cfg.step (last step shortened if needed).
    void propagate_to(double t_end);

private:
    const HeomModel* model_;
    HeomConfig cfg_;
    HierarchyState state_;
    std::vector<cplx> k1_, k2_, k3_, k4_, tmp_;
};

// Checkpoint: t, mode count, depth, index set and matrices (hex floats, exact round trip).
void write_checkpoint(std::ostream& os, const HeomModel& model, const HierarchyState& state);
HierarchyState read_checkpoint(std::istream& is, const HeomModel& model);

} // namespace gapengine
