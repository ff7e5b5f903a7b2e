// observables.cpp — current extraction, period averaging and the steady-state driver

#include "gapengine/observables.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "gapengine/errors.hpp"

namespace gapengine {

double population_rate(const Mat2& m) { return (-I_UNIT * (m(0, 1) - m(1, 0))).real(); }

double heat_current(const Dynamics& dyn, BathLabel bath) {
    if (!dyn.has_bath(bath)) return 0.0;
    const double w = dyn.tls().frequency(dyn.time());
    return w * population_rate(dyn.bath_moment(bath));
}

double population_rate(const Dynamics& dyn) {
    double r = 0.0;
    for (BathLabel b : {BathLabel::Slow, BathLabel::Fast}) {
        if (dyn.has_bath(b)) r += population_rate(dyn.bath_moment(b));
    }
    return r;
}

double bath_bath_correlation(const Dynamics& dyn, double cs0, double cf0) {
    const auto m = dyn.mixed_moment();
    if (!m) {
        throw DepthInsufficient(std::string("bath-bath correlation is unavailable for solver ") + to_string(dyn.kind()) +
                                " (needs both baths and hierarchy depth >= 2)");
    }
    return m->real() / (cs0 * cf0);
}

double period_average(std::span<const double> samples, std::size_t per_period) {
    if (per_period == 0 || samples.size() < per_period + 1) {
        throw InsufficientSpan("period average: need " + std::to_string(per_period + 1) + " samples, got " +
                               std::to_string(samples.size()));
    }
    const auto tail = samples.subspan(samples.size() - per_period - 1);
    double s = 0.5 * (tail.front() + tail.back());
    for (std::size_t i = 1; i < per_period; ++i) s += tail[i];
    return s / static_cast<double>(per_period);
}

double mean_current(const CurrentTrace& trace, std::size_t per_period) {
    return period_average(trace.samples, per_period);
}

PowerPair power(double mean_slow, double mean_fast, std::span<const double> omega, std::span<const double> p1_rate,
                std::size_t per_period) {
    if (omega.size() != p1_rate.size()) throw DimensionMismatch("power: omega and dP1/dt traces differ in length");
    std::vector<double> integrand(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i) integrand[i] = omega[i] * p1_rate[i];
    return {mean_slow + mean_fast, period_average(integrand, per_period)};
}

std::optional<double> efficiency(double mean_cold, double mean_hot, double power) {
    if (mean_hot == 0.0 || !(power > 0.0)) return std::nullopt;
    return 1.0 - std::abs(mean_cold / mean_hot);
}

SteadyStateDetector::SteadyStateDetector(std::size_t per_period, double tol, double max_time, double current_floor)
    : per_period_(per_period), tol_(tol), max_time_(max_time), floor_(current_floor) {
    if (per_period == 0) throw std::invalid_argument("steady-state detector: per_period must be > 0");
    if (!(tol > 0.0)) throw std::invalid_argument("steady-state detector: tol must be > 0");
}

double SteadyStateDetector::change(const Averages& a, const Averages& b) const {
    const double scale = std::max(
        {std::abs(a.i_slow), std::abs(a.i_fast), std::abs(b.i_slow), std::abs(b.i_fast), floor_ * peak_, 1e-300});
    const double pscale = std::max({std::abs(a.p1), std::abs(b.p1), 1e-12});
    return std::max({std::abs(a.i_slow - b.i_slow) / scale, std::abs(a.i_fast - b.i_fast) / scale,
                     std::abs(a.p1 - b.p1) / pscale});
}

void SteadyStateDetector::restart() {
    buf_slow_.clear();
    buf_fast_.clear();
    buf_p1_.clear();
    averages_.clear();
    changes_.clear();
    status_ = DetectStatus::Pending;
    last_change_ = 0.0;
}

DetectStatus SteadyStateDetector::push(double t, double i_slow, double i_fast, double p1) {
    if (status_ == DetectStatus::Detected) return status_;
    peak_ = std::max({peak_, std::abs(i_slow), std::abs(i_fast)});
    buf_slow_.push_back(i_slow);
    buf_fast_.push_back(i_fast);
    buf_p1_.push_back(p1);
    if (buf_slow_.size() == per_period_ + 1) {
        averages_.push_back({period_average(buf_slow_, per_period_), period_average(buf_fast_, per_period_),
                             period_average(buf_p1_, per_period_)});
        buf_slow_.assign(1, i_slow);
        buf_fast_.assign(1, i_fast);
        buf_p1_.assign(1, p1);
        if (averages_.size() >= 2) {
            changes_.push_back(change(averages_[averages_.size() - 1], averages_[averages_.size() - 2]));
        }
        if (changes_.size() >= 3) {
            last_change_ = std::max({changes_[changes_.size() - 1], changes_[changes_.size() - 2],
                                     changes_[changes_.size() - 3]});
            if (last_change_ < tol_) {
                status_ = DetectStatus::Detected;
                detect_time_ = t;
                return status_;
            }
        }
    }
    if (t >= max_time_) status_ = DetectStatus::Timeout;
    return status_;
}

std::size_t steps_per_period(double period, double requested) {
    if (!(requested > 0.0)) throw std::invalid_argument("step must be > 0");
    return static_cast<std::size_t>(std::max(1.0, std::ceil(period / requested - 1e-9)));
}

namespace {

struct Sample {
    double t, i_slow, i_fast, p1, omega, omega_rate, p1_rate;
    std::complex<double> mixed;
    bool has_mixed;
    Mat2 rho;
};

Sample take(const Dynamics& dyn) {
    Sample s;
    s.t = dyn.time();
    s.i_slow = heat_current(dyn, BathLabel::Slow);
    s.i_fast = heat_current(dyn, BathLabel::Fast);
    s.rho = dyn.rho();
    s.p1 = s.rho(1, 1).real();
    s.omega = dyn.tls().frequency(s.t);
    s.omega_rate = dyn.tls().frequency_rate(s.t);
    s.p1_rate = population_rate(dyn);
    const auto m = dyn.mixed_moment();
    s.has_mixed = m.has_value();
    s.mixed = m.value_or(std::complex<double>{0.0, 0.0});
    return s;
}

} // namespace

namespace {

// Reduced-rank extrapolation on period-sampled states x_n of the affine period map. With k
// real weights g (sum g = 1) minimizing |sum g_j (x_{j+1} - x_j)|, the limit is estimated as
// sum g_j x_j; real weights keep Hermiticity and the trace of the reduced density exact.
// Tries k = 1, 2, 4, 8 and jumps with the smallest k whose predicted residual is small.
class PeriodExtrapolator {
public:
    static constexpr std::size_t kMaxRank = 8;

    std::optional<std::vector<cplx>> push(std::vector<cplx> x) {
        if (disabled_) return std::nullopt;
        history_.push_back(std::move(x));
        if (history_.size() > kMaxRank + 2) history_.erase(history_.begin());
        const std::size_t m = history_.size();
        if (m < 3) return std::nullopt;

        const double last = diff_norm(m - 2);
        const double prev = diff_norm(m - 3);
        if (checking_) {
            // First difference after a jump: it must be clearly smaller than before the jump.
            checking_ = false;
            if (!(last < 0.5 * before_jump_)) {
                if (++failures_ >= 2) disabled_ = true;
            } else {
                failures_ = 0;
            }
        }
        if (!(last > 0.0) || last < 0.3 * prev) return std::nullopt; // converging quickly on its own

        for (std::size_t k : {1u, 2u, 4u, 8u}) {
            if (m < k + 2) break;
            const std::size_t first = m - (k + 2);
            Eigen::MatrixXd g(k + 1, k + 1);
            for (std::size_t a = 0; a <= k; ++a) {
                for (std::size_t b = a; b <= k; ++b) {
                    g(a, b) = g(b, a) = diff_dot(first + a, first + b);
                }
            }
            const double scale = g.diagonal().maxCoeff();
            if (!(scale > 0.0)) return std::nullopt;
            const Eigen::VectorXd y = (g / scale).completeOrthogonalDecomposition().solve(Eigen::VectorXd::Ones(k + 1));
            const double sum = y.sum();
            if (!(std::abs(sum) > 0.0) || !y.allFinite()) continue;
            const Eigen::VectorXd w = y / sum;
            const double resid2 = w.dot(g * w);
            if (!(resid2 >= 0.0) || std::sqrt(resid2) > 1e-2 * last) continue;
            std::vector<cplx> out(history_[first].size(), cplx{0.0, 0.0});
            for (std::size_t j = 0; j <= k; ++j) {
                const auto& xj = history_[first + j];
                for (std::size_t i = 0; i < out.size(); ++i) out[i] += w(static_cast<Eigen::Index>(j)) * xj[i];
            }
            before_jump_ = last;
            checking_ = true;
            history_.clear();
            history_.push_back(out);
            return out;
        }
        return std::nullopt;
    }

private:
    double diff_dot(std::size_t a, std::size_t b) const {
        const auto& xa0 = history_[a];
        const auto& xa1 = history_[a + 1];
        const auto& xb0 = history_[b];
        const auto& xb1 = history_[b + 1];
        double acc = 0.0;
        for (std::size_t i = 0; i < xa0.size(); ++i) acc += (std::conj(xa1[i] - xa0[i]) * (xb1[i] - xb0[i])).real();
        return acc;
    }
    double diff_norm(std::size_t a) const { return std::sqrt(diff_dot(a, a)); }

    std::vector<std::vector<cplx>> history_;
    bool checking_{false};
    double before_jump_{0.0};
    int failures_{0};
    bool disabled_{false};
};

} // namespace

SteadyStateReport run_to_steady_state(Dynamics& dyn, const SteadyOptions& opts, double cs0, double cf0) {
    const double tau = dyn.tls().period();
    const double requested = opts.step > 0.0 ? opts.step : tau / 200.0;
    const std::size_t n = steps_per_period(tau, requested);
    const double h = tau / static_cast<double>(n);

    SteadyStateReport rep;
    rep.step = h;
    SteadyStateDetector det(n, opts.tol, dyn.time() + opts.max_time, opts.current_floor);
    std::vector<Sample> period;
    period.reserve(n + 1);

    auto record = [&](const Sample& s) {
        rep.trace_drift = std::max(rep.trace_drift, std::abs(s.rho.trace() - 1.0));
        rep.hermiticity = std::max(rep.hermiticity, ops::hermiticity_defect(s.rho));
        if (opts.trace_stride > 0 && rep.steps % opts.trace_stride == 0) {
            rep.trace.push_back({s.t, s.p1, s.i_slow, s.i_fast});
        }
    };

    const bool accelerate = opts.extrapolate && !dyn.state_vector().empty();
    PeriodExtrapolator extrapolator;

    Sample s = take(dyn);
    record(s);
    period.push_back(s);
    DetectStatus st = det.push(s.t, s.i_slow, s.i_fast, s.p1);
    for (;;) {
        dyn.step(h);
        ++rep.steps;
        s = take(dyn);
        record(s);
        period.push_back(s);
        st = det.push(s.t, s.i_slow, s.i_fast, s.p1);
        if (period.size() == n + 1) {
            if (st != DetectStatus::Pending) break;
            period.erase(period.begin(), period.end() - 1);
            if (accelerate) {
                if (auto jumped = extrapolator.push(dyn.state_vector())) {
                    dyn.set_state_vector(*jumped);
                    ++rep.extrapolations;
                    s = take(dyn);
                    record(s);
                    period.assign(1, s);
                    det.restart();
                    st = det.push(s.t, s.i_slow, s.i_fast, s.p1);
                }
            }
        }
    }

    // The loop exits at a period boundary, so `period` holds exactly one full period.
    std::vector<double> is(n + 1), iff(n + 1), p1(n + 1), w(n + 1), pr(n + 1), wp1(n + 1), xr(n + 1), xi(n + 1);
    bool mixed = true;
    for (std::size_t i = 0; i <= n; ++i) {
        is[i] = period[i].i_slow;
        iff[i] = period[i].i_fast;
        p1[i] = period[i].p1;
        w[i] = period[i].omega;
        pr[i] = period[i].p1_rate;
        wp1[i] = -period[i].omega_rate * period[i].p1;
        xr[i] = period[i].mixed.real();
        xi[i] = period[i].mixed.imag();
        mixed = mixed && period[i].has_mixed;
    }
    rep.mean_slow = period_average(is, n);
    rep.mean_fast = period_average(iff, n);
    const auto pw = power(rep.mean_slow, rep.mean_fast, w, pr, n);
    rep.power_by_sum = pw.by_sum;
    rep.power_by_work = pw.by_work;
    rep.power_by_parts = period_average(wp1, n);
    rep.mean_p1 = period_average(p1, n);
    if (mixed) {
        rep.x_corr = period_average(xr, n) / (cs0 * cf0);
        rep.x_corr_imag = period_average(xi, n) / (cs0 * cf0);
    }
    rep.converged = st == DetectStatus::Detected;
    rep.detect_time = rep.converged ? det.detection_time() : dyn.time();
    rep.period_change = det.last_change();
    rep.periodicity_defect = ops::max_abs(period.back().rho - period.front().rho);
    return rep;
}

} // namespace gapengine
