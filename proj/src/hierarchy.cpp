// hierarchy.cpp — index bookkeeping, rescaled HEOM generator, filtering and RK4 propagation

#include "gapengine/hierarchy.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "gapengine/errors.hpp"

namespace gapengine {

namespace {

std::string key_of(std::span<const std::uint8_t> n) { return std::string(n.begin(), n.end()); }

void enumerate(std::size_t k, std::size_t modes, std::size_t remaining, std::vector<std::uint8_t>& cur,
               std::vector<std::vector<std::uint8_t>>& out) {
    if (k == modes) {
        out.push_back(cur);
        return;
    }
    for (std::size_t c = remaining + 1; c-- > 0;) {
        cur[k] = static_cast<std::uint8_t>(c);
        enumerate(k + 1, modes, remaining - c, cur, out);
    }
    cur[k] = 0;
}

} // namespace

std::size_t index_set_size(std::size_t modes, std::size_t depth) {
    // C(modes + depth, depth), evaluated incrementally; saturates instead of overflowing.
    long double v = 1.0L;
    for (std::size_t i = 1; i <= depth; ++i) {
        v = v * static_cast<long double>(modes + i) / static_cast<long double>(i);
    }
    if (v > 1e18L) return static_cast<std::size_t>(-1);
    return static_cast<std::size_t>(std::llround(v));
}

AdoIndexSet::AdoIndexSet(std::size_t modes, std::size_t depth, std::size_t ceiling) : modes_(modes), depth_(depth) {
    if (modes == 0) throw std::invalid_argument("index set: need at least one mode");
    if (depth > 255) throw std::invalid_argument("index set: depth above 255");
    const std::size_t expected = index_set_size(modes, depth);
    if (expected > ceiling) {
        throw CapacityError("index set: " + std::to_string(expected) + " ADOs exceed the ceiling of " +
                            std::to_string(ceiling));
    }
    std::vector<std::vector<std::uint8_t>> all;
    all.reserve(expected);
    std::vector<std::uint8_t> cur(modes, 0);
    enumerate(0, modes, depth, cur, all);
    auto level_of = [](const std::vector<std::uint8_t>& n) {
        std::size_t s = 0;
        for (auto c : n) s += c;
        return s;
    };
    std::stable_sort(all.begin(), all.end(),
                     [&](const auto& a, const auto& b) { return level_of(a) < level_of(b); });

    const std::size_t n = all.size();
    counts_.resize(n * modes);
    level_.resize(n);
    std::unordered_map<std::string, std::size_t> lookup;
    lookup.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(all[i].begin(), all[i].end(), counts_.begin() + static_cast<std::ptrdiff_t>(i * modes));
        level_[i] = static_cast<std::uint32_t>(level_of(all[i]));
        lookup.emplace(key_of(all[i]), i);
    }
    up_.assign(n * modes, npos);
    down_.assign(n * modes, npos);
    std::vector<std::uint8_t> probe(modes);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < modes; ++k) {
            std::copy(all[i].begin(), all[i].end(), probe.begin());
            if (level_[i] < depth) {
                probe[k] = static_cast<std::uint8_t>(probe[k] + 1);
                up_[i * modes + k] = lookup.at(key_of(probe));
                probe[k] = static_cast<std::uint8_t>(probe[k] - 1);
            }
            if (probe[k] > 0) {
                probe[k] = static_cast<std::uint8_t>(probe[k] - 1);
                down_[i * modes + k] = lookup.at(key_of(probe));
            }
        }
    }
}

std::size_t AdoIndexSet::find(std::span<const std::uint8_t> n) const {
    if (n.size() != modes_) return npos;
    std::size_t lvl = 0;
    for (auto c : n) lvl += c;
    if (lvl > depth_) return npos;
    // Walk up from the root along the requested counts.
    std::size_t i = 0;
    for (std::size_t k = 0; k < modes_; ++k) {
        for (std::uint8_t c = 0; c < n[k]; ++c) i = up(i, k);
    }
    return i;
}

AdoIndexSet build_index_set(std::size_t modes, std::size_t depth, std::size_t ceiling) {
    return AdoIndexSet(modes, depth, ceiling);
}

void HeomConfig::validate() const {
    if (depth < 1) throw std::invalid_argument("heom: depth L must be >= 1");
    if (!(filter >= 0.0)) throw std::invalid_argument("heom: filter threshold must be >= 0");
    if (!(blowup > 0.0)) throw std::invalid_argument("heom: blow-up guard must be > 0");
}

Mat2 initial_density(InitialState s) {
    switch (s) {
    case InitialState::Ground: return ops::ground_state();
    case InitialState::Excited: return ops::excited_state();
    case InitialState::Mixed: return 0.5 * Mat2::Identity();
    }
    return ops::ground_state();
}

double default_step(const DrivenTLS& tls, std::span<const BathDecomposition> baths) {
    double tau = std::min(tls.period(), 2.0 * std::numbers::pi / tls.omega0);
    for (const auto& b : baths) {
        for (const auto& m : b.modes) tau = std::min(tau, 1.0 / m.gamma.real());
    }
    return tau / 200.0;
}

Mat2 HierarchyState::ado(std::size_t i) const {
    Mat2 m;
    m << data[4 * i], data[4 * i + 1], data[4 * i + 2], data[4 * i + 3];
    return m;
}

void HierarchyState::set_ado(std::size_t i, const Mat2& m) {
    data[4 * i] = m(0, 0);
    data[4 * i + 1] = m(0, 1);
    data[4 * i + 2] = m(1, 0);
    data[4 * i + 3] = m(1, 1);
}

std::size_t HierarchyState::active() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < ados(); ++i) {
        const cplx* a = &data[4 * i];
        if (a[0] != 0.0 || a[1] != 0.0 || a[2] != 0.0 || a[3] != 0.0) ++n;
    }
    return n;
}

HeomModel::HeomModel(const DrivenTLS& tls, std::span<const BathDecomposition> baths, std::size_t depth,
                     std::size_t ceiling)
    : tls_(tls) {
    tls_.validate();
    for (const auto& m : coupled_modes(baths)) {
        d_.push_back(m.d);
        dbar_.push_back(m.dbar);
        gamma_.push_back(m.gamma);
        owner_.push_back(m.bath);
        scale_.push_back(m.scale());
    }
    if (d_.empty()) throw std::invalid_argument("heom: no bath modes");
    index_ = AdoIndexSet(d_.size(), depth, ceiling);

    const std::size_t n = index_.size();
    const std::size_t kk = d_.size();
    damping_.assign(n, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = index_.counts(i);
        for (std::size_t k = 0; k < kk; ++k) damping_[i] += static_cast<double>(c[k]) * gamma_[k];
    }
    stride_ = depth + 2;
    up_coef_.assign(kk * stride_, 0.0);
    down_coef_.assign(kk * stride_, {0.0, 0.0});
    down_coef_bar_.assign(kk * stride_, {0.0, 0.0});
    for (std::size_t k = 0; k < kk; ++k) {
        const double sk = scale_[k];
        for (std::size_t c = 0; c < stride_; ++c) {
            const double cc = static_cast<double>(c);
            const std::size_t at = k * stride_ + c;
            up_coef_[at] = std::sqrt(cc * sk);
            if (sk > 0.0) {
                down_coef_[at] = std::sqrt(cc / sk) * d_[k];
                down_coef_bar_[at] = std::sqrt(cc / sk) * dbar_[k];
            }
        }
    }
}

bool HeomModel::has_bath(BathLabel b) const { return std::find(owner_.begin(), owner_.end(), b) != owner_.end(); }

double HeomModel::max_decay() const {
    double g = 0.0;
    for (const auto& v : gamma_) g = std::max(g, v.real());
    return g;
}

HierarchyState HeomModel::make_state(const Mat2& rho0, double t0) const {
    HierarchyState s;
    s.t = t0;
    s.data.assign(4 * index_.size(), {0.0, 0.0});
    s.set_ado(0, rho0);
    return s;
}

void HeomModel::rhs(double t, std::span<const cplx> y, std::span<cplx> out) const {
    const std::size_t n = index_.size();
    if (y.size() != 4 * n || out.size() != 4 * n) {
        throw DimensionMismatch("heom rhs: state holds " + std::to_string(y.size() / 4) + " ADOs, model expects " +
                                std::to_string(n));
    }
    const std::size_t kk = d_.size();
    const double w = tls_.frequency(t);
    const cplx iw(0.0, w);
    std::fill(out.begin(), out.end(), cplx{0.0, 0.0});

    for (std::size_t m = 0; m < n; ++m) {
        const cplx a0 = y[4 * m], a1 = y[4 * m + 1], a2 = y[4 * m + 2], a3 = y[4 * m + 3];
        if (a0 == 0.0 && a1 == 0.0 && a2 == 0.0 && a3 == 0.0) continue;

        // -i[H0, rho] - (sum n_k gamma_k) rho, with H0 = diag(0, w)
        const cplx r = damping_[m];
        cplx* o = &out[4 * m];
        o[0] -= r * a0;
        o[1] += (iw - r) * a1;
        o[2] += (-iw - r) * a2;
        o[3] -= r * a3;

        // [sigma_x, rho] = [[a2 - a1, a3 - a0], [a0 - a3, a1 - a2]]
        const cplx c0 = a2 - a1, c1 = a3 - a0;
        const auto counts = index_.counts(m);
        for (std::size_t k = 0; k < kk; ++k) {
            const std::size_t mk = counts[k];
            // m is the n_k^+ neighbour of m - e_k
            const std::size_t lo = index_.down(m, k);
            if (lo != AdoIndexSet::npos) {
                const cplx f(0.0, -up_coef_[k * stride_ + mk]);
                cplx* q = &out[4 * lo];
                q[0] += f * c0;
                q[1] += f * c1;
                q[2] -= f * c1;
                q[3] -= f * c0;
            }
            // m is the n_k^- neighbour of m + e_k
            const std::size_t hi = index_.up(m, k);
            if (hi != AdoIndexSet::npos) {
                const cplx dk = down_coef_[k * stride_ + mk + 1];
                const cplx dc = down_coef_bar_[k * stride_ + mk + 1];
                const cplx mi(0.0, -1.0);
                // d sigma_x rho - dbar rho sigma_x
                cplx* q = &out[4 * hi];
                q[0] += mi * (dk * a2 - dc * a1);
                q[1] += mi * (dk * a3 - dc * a0);
                q[2] += mi * (dk * a0 - dc * a3);
                q[3] += mi * (dk * a1 - dc * a2);
            }
        }
    }
}

Mat2 HeomModel::first_order(const HierarchyState& s, std::size_t k) const {
    const std::size_t i = index_.up(0, k);
    return std::sqrt(scale_[k]) * s.ado(i);
}

Mat2 HeomModel::bath_moment(const HierarchyState& s, BathLabel b) const {
    Mat2 m = Mat2::Zero();
    for (std::size_t k = 0; k < d_.size(); ++k) {
        if (owner_[k] == b) m += first_order(s, k);
    }
    return m;
}

std::complex<double> HeomModel::mixed_moment(const HierarchyState& s) const {
    if (index_.depth() < 2) throw DepthInsufficient("bath-bath correlation needs hierarchy depth >= 2");
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t k = 0; k < d_.size(); ++k) {
        if (owner_[k] != BathLabel::Slow) continue;
        const std::size_t ik = index_.up(0, k);
        for (std::size_t l = 0; l < d_.size(); ++l) {
            if (owner_[l] != BathLabel::Fast) continue;
            const std::size_t ikl = index_.up(ik, l);
            const double scale = std::sqrt(scale_[k] * scale_[l]);
            sum += scale * (s.data[4 * ikl] + s.data[4 * ikl + 3]);
        }
    }
    return sum;
}

std::vector<cplx> heom_rhs(const HierarchyState& state, const DrivenTLS& tls, std::span<const BathDecomposition> baths,
                           std::size_t depth) {
    const HeomModel model(tls, baths, depth);
    std::vector<cplx> out(state.data.size());
    model.rhs(state.t, state.data, out);
    return out;
}

std::size_t filter(HierarchyState& state, double delta) {
    if (!(delta > 0.0)) return 0;
    const double d2 = delta * delta;
    std::size_t zeroed = 0;
    for (std::size_t i = 1; i < state.ados(); ++i) {
        cplx* a = &state.data[4 * i];
        const double mx = std::max(std::max(std::norm(a[0]), std::norm(a[1])), std::max(std::norm(a[2]), std::norm(a[3])));
        if (mx < d2 && mx > 0.0) {
            a[0] = a[1] = a[2] = a[3] = cplx{0.0, 0.0};
            ++zeroed;
        }
    }
    return zeroed;
}

HeomPropagator::HeomPropagator(const HeomModel& model, const HeomConfig& cfg, const Mat2& rho0)
    : HeomPropagator(model, cfg, model.make_state(rho0)) {}

HeomPropagator::HeomPropagator(const HeomModel& model, const HeomConfig& cfg, HierarchyState state)
    : model_(&model), cfg_(cfg), state_(std::move(state)) {
    cfg_.validate();
    if (state_.ados() != model.index().size()) {
        throw DimensionMismatch("heom: state size does not match the index set");
    }
    const std::size_t n = state_.data.size();
    k1_.resize(n);
    k2_.resize(n);
    k3_.resize(n);
    k4_.resize(n);
    tmp_.resize(n);
}

void HeomPropagator::set_state_vector(std::span<const cplx> v) {
    if (v.size() != state_.data.size()) throw DimensionMismatch("heom: state vector size mismatch");
    std::copy(v.begin(), v.end(), state_.data.begin());
}

void HeomPropagator::step(double h) {
    auto& y = state_.data;
    const double t = state_.t;
    const std::size_t n = y.size();
    model_->rhs(t, y, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k1_[i];
    model_->rhs(t + 0.5 * h, tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k2_[i];
    model_->rhs(t + 0.5 * h, tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * k3_[i];
    model_->rhs(t + h, tmp_, k4_);
    const double h6 = h / 6.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += h6 * (k1_[i] + 2.0 * (k2_[i] + k3_[i]) + k4_[i]);
        worst = std::max(worst, std::max(std::abs(y[i].real()), std::abs(y[i].imag())));
    }
    state_.t = t + h;
    if (!(worst <= cfg_.blowup)) {
        throw InstabilityError("heom: ADO magnitude exceeded the blow-up guard at t = " + std::to_string(state_.t) +
                                   " (increase depth or reduce step)",
                               state_.t);
    }
    filter(state_, cfg_.filter);
}

void HeomPropagator::propagate_to(double t_end) {
    if (t_end < state_.t) throw std::invalid_argument("heom: t_end precedes current time");
    const double h = cfg_.step;
    if (!(h > 0.0)) throw std::invalid_argument("heom: step must be set before propagate_to");
    while (state_.t < t_end) {
        const double remaining = t_end - state_.t;
        if (remaining < 1e-12 * std::max(1.0, t_end)) break;
        step(std::min(h, remaining));
    }
}

std::optional<std::complex<double>> HeomPropagator::mixed_moment() const {
    if (model_->index().depth() < 2 || !model_->has_bath(BathLabel::Slow) || !model_->has_bath(BathLabel::Fast)) {
        return std::nullopt;
    }
    return model_->mixed_moment(state_);
}

void write_checkpoint(std::ostream& os, const HeomModel& model, const HierarchyState& state) {
    const auto& idx = model.index();
    char buf[128];
    os << "# gapengine heom checkpoint v1\n";
    std::snprintf(buf, sizeof buf, "t %a\n", state.t);
    os << buf;
    os << "modes " << idx.modes() << "\n";
    os << "depth " << idx.depth() << "\n";
    os << "ados " << idx.size() << "\n";
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto c = idx.counts(i);
        for (std::size_t k = 0; k < c.size(); ++k) os << (k ? " " : "") << static_cast<unsigned>(c[k]);
        for (std::size_t e = 0; e < 4; ++e) {
            const cplx v = state.data[4 * i + e];
            std::snprintf(buf, sizeof buf, " %a %a", v.real(), v.imag());
            os << buf;
        }
        os << '\n';
    }
}

HierarchyState read_checkpoint(std::istream& is, const HeomModel& model) {
    const auto& idx = model.index();
    std::string line, word;
    auto next_line = [&]() {
        while (std::getline(is, line)) {
            if (!line.empty() && line[0] != '#') return true;
        }
        return false;
    };
    auto header = [&](const char* name) {
        if (!next_line()) throw std::runtime_error(std::string("checkpoint: missing ") + name);
        std::istringstream ls(line);
        std::string value;
        ls >> word >> value;
        if (word != name) throw std::runtime_error(std::string("checkpoint: expected ") + name + ", got " + word);
        return value;
    };
    HierarchyState s;
    s.t = std::strtod(header("t").c_str(), nullptr);
    const auto modes = std::stoul(header("modes"));
    const auto depth = std::stoul(header("depth"));
    const auto ados = std::stoul(header("ados"));
    if (modes != idx.modes() || depth != idx.depth() || ados != idx.size()) {
        throw DimensionMismatch("checkpoint: hierarchy shape does not match the model");
    }
    s.data.assign(4 * ados, {0.0, 0.0});
    std::vector<std::uint8_t> counts(modes);
    for (std::size_t row = 0; row < ados; ++row) {
        if (!next_line()) throw std::runtime_error("checkpoint: truncated at ADO " + std::to_string(row));
        std::istringstream ls(line);
        for (std::size_t k = 0; k < modes; ++k) {
            unsigned c = 0;
            ls >> c;
            counts[k] = static_cast<std::uint8_t>(c);
        }
        const std::size_t i = idx.find(counts);
        if (i == AdoIndexSet::npos) throw std::runtime_error("checkpoint: unknown multi-index at row " + std::to_string(row));
        for (std::size_t e = 0; e < 4; ++e) {
            std::string re, im;
            ls >> re >> im;
            if (!ls) throw std::runtime_error("checkpoint: malformed row " + std::to_string(row));
            s.data[4 * i + e] = {std::strtod(re.c_str(), nullptr), std::strtod(im.c_str(), nullptr)};
        }
    }
    return s;
}

} // namespace gapengine
