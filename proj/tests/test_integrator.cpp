#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "soliton/errors.hpp"
#include "soliton/integrator.hpp"

using namespace soliton;

using Scalar = std::array<double, 1>;

TEST_CASE("RK4 leaves a stationary state alone") {
    const auto y = rk4_step([](double, const Scalar&) { return Scalar{0.0}; }, 0.0, Scalar{3.25}, 0.1);
    CHECK(y[0] == 3.25);
}

TEST_CASE("RK4 on y' = y reproduces the quartic Taylor polynomial") {
    const auto y = rk4_step([](double, const Scalar& v) { return v; }, 0.0, Scalar{1.0}, 0.1);
    CHECK(y[0] == doctest::Approx(1.0 + 0.1 + 0.005 + 0.001 / 6.0 + 0.0001 / 24.0).epsilon(1e-15));
    CHECK(y[0] == doctest::Approx(1.10517083).epsilon(1e-8));
}

TEST_CASE("RK4 on a pure-time integrand is Simpson's rule") {
    const auto y = rk4_step([](double t, const Scalar&) { return Scalar{t * t}; }, 0.0, Scalar{0.0}, 1.0);
    CHECK(y[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("RK4 reports non-finite stages") {
    CHECK_THROWS_AS(rk4_step([](double, const Scalar&) { return Scalar{std::nan("")}; }, 0.0, Scalar{1.0}, 0.1),
                    BlowUpError);
}

TEST_CASE("series start with an Einstein potential") {
    const auto p = preset_catalog("s5");
    const auto series = smoothness_series(p, 10.0, 0.0);
    for (double c : series.c) CHECK(c == 0.0);
    const auto s = series_start(p, 10.0, 0.0, IntegratorConfig{});
    CHECK(s.u == 0.0);
    CHECK(s.udot == 0.0);
}

TEST_CASE("second-order potential coefficient") {
    const auto p = preset_catalog("cp2");
    const auto series = smoothness_series(p, 0.7319, -0.5276);
    // (k + 1) u''(0) = eps u(0) with k = d1 = 1, and u''(0) = 2 c_1
    const double uddot0 = p.epsilon * -0.5276 / 2.0;
    CHECK(uddot0 == doctest::Approx(1.969430).epsilon(1e-6));
    CHECK(2.0 * series.c[1] == doctest::Approx(uddot0).epsilon(1e-14));
    CHECK(series.c[1] == doctest::Approx(p.epsilon * -0.5276 / (2.0 * (p.d1 + 1))).epsilon(1e-14));
}

TEST_CASE("series start is smooth at the singular orbit") {
    for (const char* name : {"cp2", "s5", "s2xs3", "hp(1)", "cap2"}) {
        const auto p = preset_catalog(name);
        const auto series = smoothness_series(p, 1.3, 0.4);
        double prev = 1.0;
        for (double t0 : {0.1, 0.01, 0.001}) {
            const auto s = series.evaluate(t0);
            const double gap = std::abs(s.f / t0 - 1.0) + std::abs(s.fdot - 1.0);
            CHECK(gap < prev);
            prev = gap;
        }
        CHECK(prev < 1e-4);
    }
}

TEST_CASE("series start meets the constraint tolerance") {
    for (const char* name : {"cp2", "s5", "s2xs3", "s11", "hp(2)", "f(1)", "cap2"}) {
        const auto p = preset_catalog(name);
        const auto s = series_start(p, 2.0, -0.3, default_config(p));
        CHECK(std::abs(ham_residual(p, s)) <= kSeriesTolerance);
    }
}

TEST_CASE("series start preconditions") {
    const auto p = preset_catalog("cp2");
    CHECK_THROWS_AS(series_start(p, 0.0, 0.0, {}), PreconditionError);
    CHECK_THROWS_AS(series_start(p, 1.0, -2.1, {}), PreconditionError);
    CHECK_NOTHROW(series_start(p, 1.0, -2.0, {}));
}

TEST_CASE("config validation") {
    IntegratorConfig c;
    c.step = 0.0;
    CHECK_THROWS_AS(c.validate(), PreconditionError);
    c = {};
    c.t_max = 0.01;
    CHECK_THROWS_AS(c.validate(), PreconditionError);
    c = {};
    c.record_every = 0;
    CHECK_THROWS_AS(c.validate(), PreconditionError);
    CHECK(default_config(preset_catalog("s5")).t_max == doctest::Approx(50.0 / std::sqrt(0.08)));
}

TEST_CASE("the round five-sphere closes up") {
    const auto p = preset_catalog("s5");
    const auto traj = integrate(p, 10.0, 0.0, default_config(p));
    CHECK(traj.min_sol < 0.005);
    CHECK(traj.argmin_sol_t == doctest::Approx(5.0 * std::numbers::pi).epsilon(1e-3));
    CHECK(traj.termination == Termination::CollapseBase);
    REQUIRE(traj.turning_time);
    CHECK(*traj.turning_time == doctest::Approx(2.5 * std::numbers::pi).epsilon(1e-6));
}

TEST_CASE("Einstein trajectories keep a vanishing potential") {
    for (const char* name : {"cp2", "s2xs3", "hp(1)"}) {
        const auto p = preset_catalog(name);
        const auto traj = integrate(p, 1.1, 0.0, default_config(p));
        for (const auto& s : traj.samples) CHECK(std::abs(s.state.udot) < 1e-8);
        CHECK(traj.einstein);
        CHECK(!winding_angle(traj, WindingUpTo::TurningPoint));
        CHECK(!winding_angle(traj, WindingUpTo::End));
    }
}

TEST_CASE("integration is deterministic") {
    const auto p = preset_catalog("cp2");
    const auto a = integrate(p, 0.8, -0.3, default_config(p));
    const auto b = integrate(p, 0.8, -0.3, default_config(p));
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        CHECK(a.samples[k].state.f == b.samples[k].state.f);
        CHECK(a.samples[k].state.u == b.samples[k].state.u);
        CHECK(a.samples[k].diag.ham_residual == b.samples[k].diag.ham_residual);
    }
    CHECK(a.min_sol == b.min_sol);
}

TEST_CASE("samples are strictly increasing and thinned on request") {
    const auto p = preset_catalog("cp2");
    auto c = default_config(p);
    c.record_every = 5;
    const auto traj = integrate(p, 0.9, 0.2, c);
    for (std::size_t k = 1; k < traj.samples.size(); ++k)
        CHECK(traj.samples[k].state.t > traj.samples[k - 1].state.t);
    CHECK(traj.samples.back().state.t == traj.end_time);
    const auto shot = shoot(p, 0.9, 0.2, c);
    CHECK(shot.min_sol == traj.min_sol);
    CHECK(shot.termination == traj.termination);
}

TEST_CASE("turning time brackets the sign change of xi") {
    const auto p = preset_catalog("cp2");
    const auto traj = integrate(p, 0.7321, -0.5271, default_config(p));
    REQUIRE(traj.turning_time);
    for (std::size_t k = 1; k < traj.samples.size(); ++k) {
        const auto& a = traj.samples[k - 1];
        const auto& b = traj.samples[k];
        if (a.state.t <= *traj.turning_time && *traj.turning_time <= b.state.t) {
            CHECK(a.diag.xi > 0.0);
            CHECK(b.diag.xi <= 0.0);
        }
    }
}

TEST_CASE("Koiso-Cao winding is monotone and bounded") {
    const auto p = preset_catalog("cp2");
    const auto traj = integrate(p, 0.7321, -0.5271, default_config(p));
    CHECK(traj.min_sol < 0.005);
    const auto w = winding_angle(traj, WindingUpTo::TurningPoint);
    REQUIRE(w);
    CHECK(*w <= 0.0);
    CHECK(*w >= -(6.0 + std::numbers::pi / 4.0));
    for (std::size_t k = 1; k < traj.samples.size(); ++k)
        CHECK(*traj.samples[k].diag.theta <= *traj.samples[k - 1].diag.theta + 1e-6);
    CHECK(critical_point_count(traj) == 0);
}

TEST_CASE("critical points of the closed-form Gaussian") {
    const OrbitPreset p{"s2xs2", 2, 2, 1.0, 0.0, -8.0, CollapsePattern::SameEnd};
    Trajectory traj;
    for (int k = 1; k <= 200; ++k) {
        TrajectorySample smp;
        smp.state = oracles::gaussian(p, 0.01 * k).s;
        traj.samples.push_back(smp);
    }
    CHECK(critical_point_count(traj) == 0);

    // u' = sin(t) changes sign at pi and 2 pi
    Trajectory wave;
    for (int k = 0; k <= 700; ++k) {
        TrajectorySample smp;
        smp.state.t = 0.01 * k;
        smp.state.udot = std::sin(smp.state.t + 1e-3);
        wave.samples.push_back(smp);
    }
    CHECK(critical_point_count(wave) == 2);
    CHECK(critical_point_count(wave, 5.0) == 1);
}

TEST_CASE("the Gaussian soliton is tracked and then lost") {
    const OrbitPreset p{"s2xs2", 2, 2, 1.0, 0.0, -8.0, CollapsePattern::SameEnd};
    IntegratorConfig c;
    c.t_max = 5.0;
    const auto traj = integrate(p, 0.5, -1.5, c);
    double dev_initial = 0.0, dev_late = 0.0;
    for (const auto& s : traj.samples) {
        const auto e = oracles::gaussian(p, s.state.t).s;
        const double dev = std::abs(s.state.u - e.u) + std::abs(s.state.h - e.h);
        double& slot = s.state.t <= 0.5 ? dev_initial : dev_late;
        slot = std::max(slot, dev);
    }
    CHECK(dev_initial < 1e-4);
    CHECK(dev_late > 1e-2);
    CHECK(traj.termination != Termination::ReachedTMax);
}

TEST_CASE("extended precision agrees with double on a well-conditioned shot") {
    const auto p = preset_catalog("cp2");
    auto c = default_config(p);
    const auto a = shoot(p, 0.7321, -0.5271, c);
    c.extended_precision = true;
    const auto b = shoot(p, 0.7321, -0.5271, c);
    CHECK(b.min_sol == doctest::Approx(a.min_sol).epsilon(1e-3));
    CHECK(b.argmin_sol_t == a.argmin_sol_t);
    CHECK(b.termination == a.termination);
}

TEST_CASE("target hit stops the run early") {
    const auto p = preset_catalog("s5");
    auto c = default_config(p);
    c.target_sol = 0.01;
    const auto shot = shoot(p, 10.0, 0.0, c);
    CHECK(shot.termination == Termination::TargetHit);
    CHECK(shot.min_sol <= 0.01);
}

TEST_CASE("termination names round trip") {
    for (auto t : {Termination::ReachedTMax, Termination::CollapseFiber, Termination::CollapseBase,
                   Termination::BlowUp, Termination::TargetHit})
        CHECK(termination_from_string(to_string(t)) == t);
    CHECK_THROWS_AS(termination_from_string("bogus"), LookupError);
}
