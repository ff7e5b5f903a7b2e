// decomposition.cpp — matrix-pencil identification, LM refinement and certification

#include "gapengine/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "gapengine/errors.hpp"

namespace gapengine {

namespace {

using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;

constexpr double kMinDecay = 1e-7;
constexpr std::complex<double> I_UNIT_FIT{0.0, 1.0};

struct Samples {
    std::vector<double> t;
    cvec y;
};

Samples sample(const BathSpec& bath, double dt, std::size_t n) {
    Samples s;
    auto c = correlation_on_grid(bath, dt, n);
    s.t.resize(n);
    s.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        s.t[j] = dt * static_cast<double>(j);
        s.y(static_cast<Eigen::Index>(j)) = c[j];
    }
    return s;
}

cmat design(const std::vector<double>& t, const std::vector<std::complex<double>>& gammas) {
    cmat a(static_cast<Eigen::Index>(t.size()), static_cast<Eigen::Index>(gammas.size()));
    for (std::size_t k = 0; k < gammas.size(); ++k) {
        for (std::size_t j = 0; j < t.size(); ++j) {
            a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = std::exp(-gammas[k] * t[j]);
        }
    }
    return a;
}

double max_error(const Samples& s, const std::vector<ExponentialMode>& modes) {
    double err = 0.0;
    for (std::size_t j = 0; j < s.t.size(); ++j) {
        std::complex<double> v{0.0, 0.0};
        for (const auto& m : modes) v += m.d * std::exp(-m.gamma * s.t[j]);
        err = std::max(err, std::abs(v - s.y(static_cast<Eigen::Index>(j))));
    }
    return err;
}

std::vector<ExponentialMode> solve_amplitudes(const Samples& s, const std::vector<std::complex<double>>& gammas) {
    const cmat a = design(s.t, gammas);
    const cvec d = a.colPivHouseholderQr().solve(s.y);
    std::vector<ExponentialMode> modes(gammas.size());
    for (std::size_t k = 0; k < gammas.size(); ++k) {
        modes[k] = {d(static_cast<Eigen::Index>(k)), gammas[k]};
    }
    return modes;
}

// Right singular subspace of the two-channel (Re C, Im C) Hankel matrix. Working with real
// channels makes every identified pole set closed under complex conjugation.
struct PencilBasis {
    Eigen::MatrixXd w;
    double dt{0.0};
};

PencilBasis pencil_basis(const cvec& y, double dt, std::size_t max_modes) {
    const Eigen::Index n = y.size();
    const Eigen::Index lag = std::max<Eigen::Index>(n / 3, static_cast<Eigen::Index>(max_modes) + 1);
    const Eigen::Index rows = n - lag;
    Eigen::MatrixXd h(2 * rows, lag + 1);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j <= lag; ++j) {
            h(i, j) = y(i + j).real();
            h(rows + i, j) = y(i + j).imag();
        }
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeThinV);
    PencilBasis b;
    b.w = svd.matrixV();
    b.dt = dt;
    return b;
}

std::vector<std::complex<double>> pencil_rates(const PencilBasis& basis, std::size_t k) {
    const Eigen::Index lag = basis.w.rows() - 1;
    const Eigen::MatrixXd w = basis.w.leftCols(static_cast<Eigen::Index>(k));
    const Eigen::MatrixXd w1 = w.topRows(lag);
    const Eigen::MatrixXd w2 = w.bottomRows(lag);
    const Eigen::MatrixXd m = w1.completeOrthogonalDecomposition().solve(w2);
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    std::vector<std::complex<double>> out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const std::complex<double> z = es.eigenvalues()(i);
        const double decay = std::max(-std::log(std::abs(z)) / basis.dt, kMinDecay);
        // Real eigenvalues (including negative ones at the Nyquist edge) become real rates.
        const double freq = z.imag() == 0.0 ? 0.0 : -std::arg(z) / basis.dt;
        out.emplace_back(decay, freq);
    }
    return out;
}

// Pole structure used by the refinement: real poles carry (Re g) and a complex amplitude;
// conjugate pairs carry (Re g, Im g) and one complex amplitude for each member.
struct PoleLayout {
    std::vector<std::size_t> real_poles;                    // indices into the mode list
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // (Im g > 0, Im g < 0)
    std::size_t params() const { return 3 * real_poles.size() + 6 * pairs.size(); }
};

PoleLayout layout_of(const std::vector<ExponentialMode>& modes) {
    PoleLayout l;
    std::vector<bool> used(modes.size(), false);
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (used[i]) continue;
        if (modes[i].gamma.imag() == 0.0) {
            l.real_poles.push_back(i);
            used[i] = true;
            continue;
        }
        for (std::size_t j = i + 1; j < modes.size(); ++j) {
            if (!used[j] && modes[j].gamma == std::conj(modes[i].gamma)) {
                if (modes[i].gamma.imag() > 0.0) {
                    l.pairs.emplace_back(i, j);
                } else {
                    l.pairs.emplace_back(j, i);
                }
                used[i] = used[j] = true;
                break;
            }
        }
        if (!used[i]) {
            // Unpaired complex pole: keep it real-only in the refinement by dropping it from pairing.
            l.real_poles.push_back(i);
            used[i] = true;
        }
    }
    return l;
}

Eigen::VectorXd pack(const std::vector<ExponentialMode>& modes, const PoleLayout& l) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(l.params()));
    Eigen::Index p = 0;
    for (auto i : l.real_poles) {
        x(p++) = modes[i].gamma.real();
        x(p++) = modes[i].d.real();
        x(p++) = modes[i].d.imag();
    }
    for (auto [a, b] : l.pairs) {
        x(p++) = modes[a].gamma.real();
        x(p++) = modes[a].gamma.imag();
        x(p++) = modes[a].d.real();
        x(p++) = modes[a].d.imag();
        x(p++) = modes[b].d.real();
        x(p++) = modes[b].d.imag();
    }
    return x;
}

std::vector<ExponentialMode> unpack(const Eigen::VectorXd& x, const PoleLayout& l,
                                    const std::vector<ExponentialMode>& like) {
    std::vector<ExponentialMode> modes = like;
    Eigen::Index p = 0;
    for (auto i : l.real_poles) {
        const double g = x(p++);
        modes[i].gamma = {g, like[i].gamma.imag()};
        modes[i].d = {x(p), x(p + 1)};
        p += 2;
    }
    for (auto [a, b] : l.pairs) {
        const std::complex<double> g(x(p), x(p + 1));
        modes[a].gamma = g;
        modes[b].gamma = std::conj(g);
        modes[a].d = {x(p + 2), x(p + 3)};
        modes[b].d = {x(p + 4), x(p + 5)};
        p += 6;
    }
    return modes;
}

// Residual in real coordinates with numerically differentiated Jacobian-free structure
// handled analytically per parameter block.
struct ExpSumFunctor : Eigen::DenseFunctor<double> {
    const Samples* s;
    PoleLayout layout;
    std::vector<ExponentialMode> like;
    ExpSumFunctor(const Samples* samples, PoleLayout l, std::vector<ExponentialMode> modes)
        : Eigen::DenseFunctor<double>(static_cast<int>(l.params()), static_cast<int>(2 * samples->t.size())),
          s(samples), layout(std::move(l)), like(std::move(modes)) {}

    int operator()(const InputType& x, ValueType& fvec) const {
        const auto modes = unpack(x, layout, like);
        for (std::size_t j = 0; j < s->t.size(); ++j) {
            std::complex<double> v{0.0, 0.0};
            for (const auto& m : modes) v += m.d * std::exp(-m.gamma * s->t[j]);
            v -= s->y(static_cast<Eigen::Index>(j));
            fvec(2 * j) = v.real();
            fvec(2 * j + 1) = v.imag();
        }
        return 0;
    }

    int df(const InputType& x, JacobianType& jac) const {
        const auto modes = unpack(x, layout, like);
        jac.setZero();
        for (std::size_t j = 0; j < s->t.size(); ++j) {
            const double t = s->t[j];
            const auto r = static_cast<Eigen::Index>(2 * j);
            auto put = [&](Eigen::Index c, std::complex<double> v) {
                jac(r, c) += v.real();
                jac(r + 1, c) += v.imag();
            };
            Eigen::Index c = 0;
            for (auto i : layout.real_poles) {
                const std::complex<double> e = std::exp(-modes[i].gamma * t);
                put(c, -t * modes[i].d * e);
                put(c + 1, e);
                put(c + 2, I_UNIT_FIT * e);
                c += 3;
            }
            for (auto [a, b] : layout.pairs) {
                const std::complex<double> ea = std::exp(-modes[a].gamma * t);
                const std::complex<double> eb = std::exp(-modes[b].gamma * t);
                // d/d(Re g) and d/d(Im g); the partner carries conj(g)
                put(c, -t * modes[a].d * ea - t * modes[b].d * eb);
                put(c + 1, -I_UNIT_FIT * t * modes[a].d * ea + I_UNIT_FIT * t * modes[b].d * eb);
                put(c + 2, ea);
                put(c + 3, I_UNIT_FIT * ea);
                put(c + 4, eb);
                put(c + 5, I_UNIT_FIT * eb);
                c += 6;
            }
        }
        return 0;
    }
};

std::vector<ExponentialMode> refine(const Samples& s, const std::vector<ExponentialMode>& start) {
    const PoleLayout l = layout_of(start);
    ExpSumFunctor f(&s, l, start);
    Eigen::VectorXd x = pack(start, l);
    Eigen::LevenbergMarquardt<ExpSumFunctor> lm(f);
    lm.setMaxfev(200);
    lm.minimize(x);
    return unpack(x, l, start);
}

bool all_decaying(const std::vector<ExponentialMode>& modes) {
    return std::all_of(modes.begin(), modes.end(), [](const ExponentialMode& m) {
        return m.gamma.real() > 0.0 && std::isfinite(m.gamma.real()) && std::isfinite(m.d.real());
    });
}

} // namespace

std::complex<double> BathDecomposition::reconstruct(double t) const {
    std::complex<double> v{0.0, 0.0};
    for (const auto& m : modes) v += m.d * std::exp(-m.gamma * t);
    return v;
}

CertGrid certification_grid(const BathSpec& bath, double t_max) {
    const SpectralSupport sup = spectral_support(bath);
    const double wmax = std::max({std::abs(sup.lo), std::abs(sup.hi), 1.0});
    CertGrid g;
    const double target = std::numbers::pi / (4.0 * wmax);
    g.n = static_cast<std::size_t>(std::ceil(t_max / target)) + 1;
    g.dt = t_max / static_cast<double>(g.n - 1);
    return g;
}

BathDecomposition fit_exponentials(const BathSpec& bath, double t_max, double tol, const FitOptions& opts) {
    if (!(t_max > 0.0)) throw std::invalid_argument("fit_exponentials: t_max must be > 0");
    if (!(tol > 0.0)) throw std::invalid_argument("fit_exponentials: tol must be > 0");
    bath.validate();

    const SpectralSupport sup = spectral_support(bath);
    const double wmax = std::max({std::abs(sup.lo), std::abs(sup.hi), 1e-6});

    // Pencil samples: the real channels carry +-omega, so sample below the Nyquist limit of the
    // largest |omega| in the support, with at least 200 samples per window.
    double dtp = std::min(0.9 * std::numbers::pi / wmax, t_max / 200.0);
    std::size_t np = static_cast<std::size_t>(std::floor(t_max / dtp)) + 1;
    np = std::min(np, opts.pencil_samples);
    const Samples pencil = sample(bath, dtp, np);

    const CertGrid cg = certification_grid(bath, t_max);
    const Samples cert = sample(bath, cg.dt, cg.n);

    const PencilBasis basis = pencil_basis(pencil.y, dtp, opts.max_modes);
    const std::size_t kmax = std::min<std::size_t>(opts.max_modes, static_cast<std::size_t>(basis.w.cols()));

    BathDecomposition best;
    best.spec = bath;
    best.t_max = t_max;
    best.certified_error = std::numeric_limits<double>::infinity();

    for (std::size_t k = 1; k <= kmax; ++k) {
        auto modes = solve_amplitudes(cert, pencil_rates(basis, k));
        double err = max_error(cert, modes);
        if (opts.refine && err > tol) {
            auto refined = refine(cert, modes);
            if (all_decaying(refined)) {
                const double rerr = max_error(cert, refined);
                if (rerr < err) {
                    modes = std::move(refined);
                    err = rerr;
                }
            }
        }
        if (err < best.certified_error) {
            best.modes = modes;
            best.certified_error = err;
        }
        if (err <= tol) {
            best.modes = std::move(modes);
            best.certified_error = err;
            break;
        }
    }
    if (!(best.certified_error <= tol)) {
        throw FitError("fit_exponentials: tolerance " + std::to_string(tol) + " not met with " +
                           std::to_string(kmax) + " modes (best " + std::to_string(best.certified_error) + ")",
                       best.certified_error);
    }
    std::sort(best.modes.begin(), best.modes.end(), [](const ExponentialMode& a, const ExponentialMode& b) {
        if (a.gamma.imag() != b.gamma.imag()) return a.gamma.imag() < b.gamma.imag();
        return a.gamma.real() < b.gamma.real();
    });
    return best;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_decomposition(std::ostream& os, const BathDecomposition& dec) {
    os << "# gapengine bath decomposition v1\n";
    os << "family = " << to_string(dec.spec.spectral.family) << "\n";
    os << "kappa = " << fmt(dec.spec.spectral.kappa) << "\n";
    os << "omega_c = " << fmt(dec.spec.spectral.omega_c) << "\n";
    os << "xi = " << fmt(dec.spec.spectral.xi) << "\n";
    os << "temperature = " << fmt(dec.spec.temperature) << "\n";
    os << "label = " << to_string(dec.spec.label) << "\n";
    os << "t_max = " << fmt(dec.t_max) << "\n";
    os << "certified_error = " << fmt(dec.certified_error) << "\n";
    os << "modes = " << dec.modes.size() << "\n";
    os << "# re_d im_d re_gamma im_gamma\n";
    for (const auto& m : dec.modes) {
        os << fmt(m.d.real()) << ' ' << fmt(m.d.imag()) << ' ' << fmt(m.gamma.real()) << ' '
           << fmt(m.gamma.imag()) << '\n';
    }
}

BathDecomposition read_decomposition(std::istream& is) {
    std::map<std::string, std::string> header;
    std::vector<ExponentialMode> modes;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
            auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t");
                const auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
            };
            header[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
            continue;
        }
        std::istringstream ls(line);
        double a, b, c, d;
        if (!(ls >> a >> b >> c >> d)) {
            throw std::runtime_error("decomposition: malformed mode line " + std::to_string(lineno));
        }
        modes.push_back({{a, b}, {c, d}});
    }
    auto need = [&](const std::string& key) -> const std::string& {
        auto it = header.find(key);
        if (it == header.end()) throw std::runtime_error("decomposition: missing header key '" + key + "'");
        return it->second;
    };
    BathDecomposition dec;
    const std::string fam = need("family");
    if (fam != "bandgap" && fam != "narrow") throw std::runtime_error("decomposition: unknown family " + fam);
    dec.spec.spectral.family = fam == "bandgap" ? SpectralFamily::Bandgap : SpectralFamily::Narrow;
    dec.spec.spectral.kappa = std::stod(need("kappa"));
    dec.spec.spectral.omega_c = std::stod(need("omega_c"));
    dec.spec.spectral.xi = std::stod(need("xi"));
    dec.spec.temperature = std::stod(need("temperature"));
    const std::string label = need("label");
    if (label != "slow" && label != "fast") throw std::runtime_error("decomposition: unknown label " + label);
    dec.spec.label = label == "slow" ? BathLabel::Slow : BathLabel::Fast;
    dec.t_max = std::stod(need("t_max"));
    dec.certified_error = std::stod(need("certified_error"));
    const auto count = std::stoul(need("modes"));
    if (count != modes.size()) {
        throw std::runtime_error("decomposition: header announces " + std::to_string(count) + " modes, found " +
                                 std::to_string(modes.size()));
    }
    dec.modes = std::move(modes);
    return dec;
}

void save_decomposition(const std::string& path, const BathDecomposition& dec) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_decomposition(os, dec);
    if (!os) throw std::runtime_error("write failed: " + path);
}

BathDecomposition load_decomposition(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_decomposition(is);
}

double CoupledMode::scale() const { return std::max(std::abs(d), std::abs(dbar)); }

namespace {

bool conjugate_match(std::complex<double> a, std::complex<double> b) {
    return std::abs(a - std::conj(b)) <= 1e-12 * std::max(std::abs(a), 1.0);
}

void append_closed(const BathDecomposition& dec, std::vector<CoupledMode>& out) {
    const auto& m = dec.modes;
    std::vector<bool> partnered(m.size(), false);
    for (std::size_t i = 0; i < m.size(); ++i) {
        CoupledMode c{m[i].d, {0.0, 0.0}, m[i].gamma, dec.spec.label};
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (conjugate_match(m[i].gamma, m[j].gamma)) {
                c.dbar += std::conj(m[j].d);
                partnered[j] = true;
            }
        }
        out.push_back(c);
    }
    for (std::size_t j = 0; j < m.size(); ++j) {
        if (!partnered[j]) out.push_back({{0.0, 0.0}, std::conj(m[j].d), std::conj(m[j].gamma), dec.spec.label});
    }
}

} // namespace

std::vector<CoupledMode> coupled_modes(std::span<const BathDecomposition> baths) {
    std::vector<CoupledMode> out;
    for (BathLabel label : {BathLabel::Slow, BathLabel::Fast}) {
        for (const auto& dec : baths) {
            if (dec.spec.label == label) append_closed(dec, out);
        }
    }
    return out;
}

} // namespace gapengine
