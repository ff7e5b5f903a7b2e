// test_hierarchy.cpp — index sets, hierarchy right-hand side invariants, filtering and checkpoints

#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "gapengine/errors.hpp"
#include "gapengine/hierarchy.hpp"
#include "gapengine/master_equations.hpp"

using namespace gapengine;

namespace {

std::vector<BathDecomposition> fig3_baths(double tol = 1e-4) {
    return {fit_exponentials({SpectralDensity::bandgap(1.0, 2.0), 0.0, BathLabel::Slow}, 50.0, tol),
            fit_exponentials({SpectralDensity::bandgap(1.0, 4.0), 2.0, BathLabel::Fast}, 50.0, tol)};
}

const std::vector<BathDecomposition>& baths() {
    static const auto b = fig3_baths();
    return b;
}

} // namespace

TEST_SUITE("hierarchy") {

TEST_CASE("index set size is a binomial coefficient") {
    CHECK(index_set_size(2, 2) == 6);
    CHECK(index_set_size(10, 3) == 286);
    CHECK(index_set_size(13, 4) == 2380);
    const AdoIndexSet s(3, 4);
    CHECK(s.size() == index_set_size(3, 4));
}

TEST_CASE("index set ordering and neighbour links") {
    const AdoIndexSet s(4, 3);
    CHECK(s.level(0) == 0);
    std::set<std::vector<int>> seen;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i > 0) CHECK(s.level(i) >= s.level(i - 1));
        const auto c = s.counts(i);
        std::vector<int> key(c.begin(), c.end());
        CHECK(seen.insert(key).second);
        for (std::size_t k = 0; k < s.modes(); ++k) {
            const auto up = s.up(i, k);
            if (s.level(i) < s.depth()) {
                REQUIRE(up != AdoIndexSet::npos);
                CHECK(s.down(up, k) == i);
                CHECK(s.counts(up)[k] == c[k] + 1);
            } else {
                CHECK(up == AdoIndexSet::npos);
            }
            if (c[k] == 0) CHECK(s.down(i, k) == AdoIndexSet::npos);
        }
    }
}

TEST_CASE("capacity ceiling is enforced") {
    CHECK_THROWS_AS(AdoIndexSet(30, 8, 1000), CapacityError);
}

TEST_CASE("default step") {
    const DrivenTLS tls{3.0, 1.0, 1.0};
    double gmax = 0.0;
    for (const auto& b : baths()) for (const auto& m : b.modes) gmax = std::max(gmax, m.gamma.real());
    const double tau = std::min({2 * M_PI / 1.0, 2 * M_PI / 3.0, 1.0 / gmax});
    CHECK(default_step(tls, baths()) == doctest::Approx(tau / 200.0));
}

TEST_CASE("rhs preserves trace and Hermiticity of the reduced density") {
    const HeomModel model(DrivenTLS{3.0, 1.0, 1.0}, baths(), 3);
    HeomPropagator p(model, HeomConfig{3, 0.0, 0.01}, ops::ground_state());
    for (int i = 0; i < 500; ++i) p.step(0.01);
    std::vector<cplx> out(p.state().data.size());
    model.rhs(p.time(), p.state().data, out);
    const Mat2 droot{{out[0], out[1]}, {out[2], out[3]}};
    CHECK(std::abs(droot.trace()) < 1e-14);
    CHECK(ops::hermiticity_defect(droot) < 1e-14);
    CHECK(std::abs(p.rho().trace() - 1.0) < 1e-12);
    CHECK(ops::hermiticity_defect(p.rho()) < 1e-12);
    // populations stay physical
    CHECK(p.rho()(1, 1).real() >= 0.0);
    CHECK(p.rho()(1, 1).real() <= 1.0);
}

TEST_CASE("isolated rotating coherence without coupling") {
    // A vanishing bath amplitude decouples the TLS: rho01 rotates with the accumulated phase.
    BathDecomposition dec;
    dec.spec = {SpectralDensity::bandgap(1.0, 4.0), 2.0, BathLabel::Fast};
    dec.modes = {{{0.0, 0.0}, {1.0, 0.0}}};
    const std::vector<BathDecomposition> b{dec};
    const DrivenTLS tls{3.0, 0.5, 1.3};
    const HeomModel model(tls, b, 2);
    Mat2 rho0;
    rho0 << 0.5, 0.5, 0.5, 0.5;
    HeomPropagator p(model, HeomConfig{2, 0.0, 0.005}, rho0);
    p.propagate_to(4.0);
    const auto expected = 0.5 * std::exp(cplx(0.0, tls.phase(4.0)));
    CHECK(std::abs(p.rho()(0, 1) - expected) < 1e-8);
}

TEST_CASE("depth one reproduces Redfield+") {
    const DrivenTLS tls{3.0, 1.0, 3.0};
    const HeomModel model(tls, baths(), 1);
    HeomPropagator heom(model, HeomConfig{1, 0.0, 0.01}, ops::ground_state());
    RedfieldPlusPropagator rp(tls, baths(), ops::ground_state());
    double dev = 0.0;
    for (int i = 0; i < 2000; ++i) {
        heom.step(0.01);
        rp.step(0.01);
        dev = std::max(dev, ops::max_abs(heom.rho() - rp.rho()));
        dev = std::max(dev, ops::max_abs(heom.bath_moment(BathLabel::Fast) - rp.bath_moment(BathLabel::Fast)));
    }
    CHECK(dev < 1e-12);
}

TEST_CASE("filter zeroes small ADOs but never the root") {
    const HeomModel model(DrivenTLS{3.0, 1.0, 1.0}, baths(), 2);
    HierarchyState s = model.make_state(ops::ground_state() * 1e-12);
    s.set_ado(1, Mat2::Constant(cplx(1e-9, 0.0)));
    s.set_ado(2, Mat2::Constant(cplx(1e-3, 0.0)));
    const auto zeroed = filter(s, 1e-7);
    CHECK(zeroed == 1);
    CHECK(ops::max_abs(s.ado(1)) == 0.0);
    CHECK(ops::max_abs(s.ado(2)) > 0.0);
    CHECK(ops::max_abs(s.root()) > 0.0);
}

TEST_CASE("blow-up guard") {
    const HeomModel model(DrivenTLS{3.0, 1.0, 1.0}, baths(), 2);
    HeomConfig cfg{2, 0.0, 50.0};
    HeomPropagator p(model, cfg, ops::ground_state());
    CHECK_THROWS_AS(
        [&] {
            for (int i = 0; i < 200; ++i) p.step(50.0);
        }(),
        InstabilityError);
}

TEST_CASE("bath correlation needs depth two") {
    const HeomModel shallow(DrivenTLS{3.0, 1.0, 1.0}, baths(), 1);
    const HierarchyState s = shallow.make_state(ops::ground_state());
    CHECK_THROWS_AS((void)shallow.mixed_moment(s), DepthInsufficient);
}

TEST_CASE("checkpoint round trip resumes identically") {
    const HeomModel model(DrivenTLS{3.0, 1.0, 1.0}, baths(), 2);
    HeomPropagator a(model, HeomConfig{2, 1e-7, 0.02}, ops::ground_state());
    a.propagate_to(3.0);
    std::stringstream ss;
    write_checkpoint(ss, model, a.state());
    HeomPropagator b(model, HeomConfig{2, 1e-7, 0.02}, read_checkpoint(ss, model));
    CHECK(b.time() == a.time());
    a.propagate_to(5.0);
    b.propagate_to(5.0);
    CHECK(ops::max_abs(a.rho() - b.rho()) == 0.0);
}

TEST_CASE("checkpoint for another model is rejected") {
    const HeomModel model(DrivenTLS{3.0, 1.0, 1.0}, baths(), 2);
    const HeomModel deeper(DrivenTLS{3.0, 1.0, 1.0}, baths(), 3);
    std::stringstream ss;
    write_checkpoint(ss, model, model.make_state(ops::ground_state()));
    CHECK_THROWS(read_checkpoint(ss, deeper));
}

TEST_CASE("configuration validation") {
    CHECK_THROWS(HeomConfig{0}.validate());
    HeomConfig c;
    c.filter = -1.0;
    CHECK_THROWS(c.validate());
}

}
