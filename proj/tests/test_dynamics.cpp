#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "soliton/dynamics.hpp"
#include "soliton/errors.hpp"
#include "soliton/integrator.hpp"

using namespace soliton;

namespace {

const OrbitPreset kS2xS2{"s2xs2", 2, 2, 1.0, 0.0, -8.0, CollapsePattern::SameEnd};
const OrbitPreset kS5Cone{"s5", 2, 2, 1.0, 0.0, -8.0, CollapsePattern::OppositeEnd};

void check_exact(const OrbitPreset& p, const oracles::Exact& e, double tol) {
    const auto dz = vector_field(p, e.s);
    CHECK(std::abs(dz[0] - e.s.fdot) < tol);
    CHECK(std::abs(dz[1] - e.fdd) < tol);
    CHECK(std::abs(dz[2] - e.s.hdot) < tol);
    CHECK(std::abs(dz[3] - e.hdd) < tol);
    CHECK(std::abs(dz[4] - e.s.udot) < tol);
    CHECK(std::abs(dz[5] - e.udd) < tol);
}

}  // namespace

TEST_CASE("the Gaussian soliton on R^3 x S^2 solves the z-system") {
    const auto e = oracles::gaussian(kS2xS2, 0.3);
    CHECK(e.s.h == 0.5);
    CHECK(e.s.u == doctest::Approx(2 * 0.09 - 1.5));
    CHECK(e.s.udot == doctest::Approx(1.2));
    check_exact(kS2xS2, e, 1e-13);
}

TEST_CASE("the spherical cone solves the z-system") {
    for (double t : {0.1, 0.7, 1.5, 2.9}) check_exact(kS5Cone, oracles::sphere_cone(kS5Cone, t), 1e-13);
}

TEST_CASE("Einstein data keeps u identically zero") {
    const auto p = preset_catalog("cp2");
    const auto dz = vector_field(p, {0.5, 0.4, 0.9, 1.0, 0.2, 0.0, 0.0});
    CHECK(dz[4] == 0.0);
    CHECK(dz[5] == 0.0);
}

TEST_CASE("vector field errors") {
    const auto p = preset_catalog("s5");
    CHECK_THROWS_AS(vector_field(p, {0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0}), CollapseError);
    CHECK_THROWS_AS(vector_field(p, {0.0, 1.0, 1.0, -1.0, 1.0, 0.0, 0.0}), CollapseError);
    CHECK_THROWS_AS(vector_field(p, {0.0, 1.0, 1e300, 1.0, 1e300, 0.0, 0.0}), BlowUpError);
}

TEST_CASE("diagnostics basics") {
    const OrbitPreset p{"p", 3, 2, 1.0, 0.0, -1.0, CollapsePattern::SameEnd};
    const auto d = diagnostics(p, {0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0});
    CHECK(d.xi == doctest::Approx(3.0));
    REQUIRE(d.W);
    CHECK(*d.W == doctest::Approx(1.0 / 3.0));
    CHECK(!d.theta);
    CHECK(*d.G >= 0.0);
}

TEST_CASE("Gaussian mean curvature") {
    for (double t : {0.05, 0.2, 0.6}) {
        const auto d = diagnostics(kS2xS2, oracles::gaussian(kS2xS2, t).s);
        CHECK(d.xi == doctest::Approx(0.5 * kS2xS2.epsilon * t + 2.0 / t));
        CHECK(d.E == doctest::Approx(-0.25 * 64.0 * t * t + 8.0 * 3.0 / 2.0));
    }
}

TEST_CASE("umbilic shape operator leaves only the scalar curvature in the Lyapunov functional") {
    const auto p = preset_catalog("s2xs3");
    const SolitonState s{0.0, 2.0, 0.6, 3.0, 0.9, 0.1, 0.2};
    const auto d = diagnostics(p, s);
    CHECK(traceless_L2(p, s) == doctest::Approx(0.0));
    CHECK(d.Fcal == doctest::Approx(std::pow(4.0 * 9.0, 2.0 / 4.0) * d.S));
}

TEST_CASE("Hamiltonian residual vanishes on closed forms") {
    for (double t : {0.05, 0.3, 0.9}) CHECK(std::abs(ham_residual(kS2xS2, oracles::gaussian(kS2xS2, t).s)) < 1e-12);
    for (double t : {0.05, 1.0, 3.0}) CHECK(std::abs(ham_residual(kS5Cone, oracles::sphere_cone(kS5Cone, t).s)) < 1e-11);
}

TEST_CASE("Hamiltonian residual detects a bumped potential derivative") {
    auto s = oracles::gaussian(kS2xS2, 0.4).s;
    const double xi = diagnostics(kS2xS2, s).xi;
    const double delta = 1e-3;
    s.udot += delta;
    // only xi moves, to xi - delta
    CHECK(ham_residual(kS2xS2, s) != 0.0);
    CHECK(ham_residual(kS2xS2, s) == doctest::Approx(2.0 * xi * delta - delta * delta).epsilon(1e-9));
}

TEST_CASE("normal residual") {
    for (double t : {0.05, 0.3}) CHECK(std::abs(normal_residual(kS2xS2, oracles::gaussian(kS2xS2, t).s)) < 1e-12);
    for (double t : {0.1, 2.0}) CHECK(std::abs(normal_residual(kS5Cone, oracles::sphere_cone(kS5Cone, t).s)) < 1e-12);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pos(0.2, 3.0), any(-2.0, 2.0);
    const auto p = preset_catalog("cp2");
    for (int k = 0; k < 20; ++k)
        CHECK(std::abs(normal_residual(p, {0.0, pos(rng), any(rng), pos(rng), any(rng), any(rng), any(rng)})) > 0.0);
}

TEST_CASE("round five-sphere stays on the constraint along the integrated arc") {
    const auto p = preset_catalog("s5");
    for (double t : {0.5, 3.0, 10.0}) {
        CHECK(std::abs(normal_residual(p, oracles::round_sphere(10.0, t))) < 1e-14);
        CHECK(std::abs(ham_residual(p, oracles::round_sphere(10.0, t))) < 1e-14);
    }
    IntegratorConfig c;
    c.t_max = 15.0;
    const auto traj = integrate(p, 10.0, 0.0, c);
    for (const auto& s : traj.samples) {
        CHECK(std::abs(s.diag.normal_residual) < 1e-7);
        const auto exact = oracles::round_sphere(10.0, s.state.t);
        CHECK(std::abs(s.state.f - exact.f) < 1e-7);
        CHECK(std::abs(s.state.h - exact.h) < 1e-7);
    }
}

TEST_CASE("angle of the rescaled (E, F) point") {
    CHECK(!ef_angle(-2.0, 0.0, 0.0));
    CHECK(*ef_angle(-4.0, 4.0, 0.0) == doctest::Approx(std::numbers::pi / 2));
    CHECK(*ef_angle(-4.0, 0.0, -1.0) == doctest::Approx(std::numbers::pi));
    // eps = -4: E is divided by 4 and F by 2
    CHECK(*ef_angle(-4.0, 4.0, 2.0) == doctest::Approx(std::numbers::pi / 4));
    const auto n = normalize_ef(-4.0, 4.0, 2.0, 0.5);
    CHECK(n.E == 1.0);
    CHECK(n.F == 1.0);
    CHECK(*n.W == 1.0);
}

TEST_CASE("xi decreases at least as fast as eps/2 along trajectories") {
    struct Shot {
        const char* preset;
        double hbar, ubar;
    };
    for (const auto& shot : {Shot{"cp2", 0.7321, -0.5271}, Shot{"cp2", 1.5, 0.8}, Shot{"s5", 2.5, 0.3},
                             Shot{"s2xs3", 1.2, -1.0}, Shot{"hp(1)", 8.0, 2.0}}) {
        const auto p = preset_catalog(shot.preset);
        const auto traj = integrate(p, shot.hbar, shot.ubar, default_config(p));
        for (std::size_t k = 1; k < traj.samples.size(); ++k) {
            const double dt = traj.samples[k].state.t - traj.samples[k - 1].state.t;
            const double dxi = traj.samples[k].diag.xi - traj.samples[k - 1].diag.xi;
            CHECK(dxi <= 0.5 * p.epsilon * dt + 1e-6 * (1.0 + std::abs(traj.samples[k].diag.xi)));
        }
    }
}

TEST_CASE("Lyapunov rate matches a finite difference of the functional") {
    const auto p = preset_catalog("cp2");
    const auto traj = integrate(p, 0.7321, -0.5271, default_config(p));
    const auto& s = traj.samples;
    const double h = traj.config.step;
    for (std::size_t k = 2; k + 2 < s.size(); k += 7) {
        if (s[k + 2].state.t > 0.95 * traj.end_time) break;
        // fourth-order central difference
        const double fd =
            (8.0 * (s[k + 1].diag.Fcal - s[k - 1].diag.Fcal) - (s[k + 2].diag.Fcal - s[k - 2].diag.Fcal)) / (12.0 * h);
        CHECK(fd == doctest::Approx(lyapunov_rate(p, s[k].state)).epsilon(1e-3));
    }
}
