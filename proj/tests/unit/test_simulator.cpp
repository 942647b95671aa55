#include <doctest.h>

#include <cmath>

#include "freqstab/metrics.hpp"
#include "freqstab/simulator.hpp"
#include "support.hpp"

using namespace freqstab;

namespace {

TwoAreaSystem damping_only(double h, double d) {
    TwoAreaSystem sys;
    sys.area_ip.h = h;
    sys.area_ip.d = d;
    sys.area_ip.blocks = {test::inertia_block("nuclear")};
    sys.area_ce.h = h;
    sys.area_ce.d = d;
    return sys;
}

TwoAreaSystem governed_island() {
    TwoAreaSystem sys;
    sys.area_ip.h = 6.0;
    sys.area_ip.d = 1.0;
    sys.area_ip.blocks = {test::steam_block("coal", 0.1), test::gas_block("ccgt", 0.08), test::hydro_block("hydro", 0.12, 0.6)};
    return sys;
}

SimConfig horizon(double t_end) {
    SimConfig cfg;
    cfg.t_end = t_end;
    return cfg;
}

}  // namespace

TEST_CASE("damping-only island follows the first-order exponential") {
    const double h = 5.0, d = 1.0, dp = 0.1, t0 = 1.0;
    const auto tr = simulate(damping_only(h, d), Disturbance{AreaId::IP, dp, t0}, horizon(40.0));
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const double t = tr.t[k];
        const double oracle = t < t0 ? 50.0 : 50.0 * (1.0 - dp / d * (1.0 - std::exp(-d * (t - t0) / (2.0 * h))));
        CHECK(std::abs(tr.f_ip[k] - oracle) < 1e-9);
        CHECK(tr.f_ce[k] == 50.0);
    }
}

TEST_CASE("damping-only island settles at -dp/D") {
    const auto tr = simulate(damping_only(5.0, 1.0), Disturbance{AreaId::IP, 0.1, 1.0}, horizon(200.0));
    const double dev = steady_state(tr, AreaId::IP, std::chrono::duration<double>(5.0)) - 50.0;
    CHECK(dev == doctest::Approx(-5.0).epsilon(1e-3));
}

TEST_CASE("governed island settles at -dp/(D + sum 1/R)") {
    const TwoAreaSystem sys = governed_island();
    const double dp = 0.05;
    const auto tr = simulate(sys, Disturbance{AreaId::IP, dp, 1.0}, horizon(400.0));
    const double beta = sys.area_ip.d + test::droop_gain(sys.area_ip);
    const double dev = steady_state(tr, AreaId::IP, std::chrono::duration<double>(5.0)) - 50.0;
    CHECK(dev == doctest::Approx(-dp / beta * 50.0).epsilon(1e-3));
}

TEST_CASE("interconnected areas share the steady-state deviation and the tie carries the remote response") {
    const TwoAreaSystem sys = test::reference_system();
    const double dp = 0.1;
    const auto tr = simulate(sys, Disturbance{AreaId::IP, dp, 1.0}, horizon(600.0));
    const double b_ip = sys.area_ip.d + test::droop_gain(sys.area_ip);
    const double b_ce = sys.area_ce.d + test::droop_gain(sys.area_ce);
    const double df = -dp / (b_ip + b_ce) * 50.0;
    CHECK(tr.f_ip.back() - 50.0 == doctest::Approx(df).epsilon(1e-3));
    CHECK(tr.f_ce.back() - 50.0 == doctest::Approx(df).epsilon(1e-3));
    CHECK(tr.p_tie.back() == doctest::Approx(dp * b_ce / (b_ip + b_ce)).epsilon(1e-3));
}

TEST_CASE("initial slope equals -dp f0 / 2H") {
    const TwoAreaSystem sys = test::reference_system();
    SimConfig cfg = horizon(2.0);
    cfg.sample_dt = 0.005;
    const auto tr = simulate(sys, Disturbance{AreaId::IP, 0.1, 1.0}, cfg);
    const std::size_t k = 200;  // t = 1.0
    const double slope = (tr.f_ip[k + 1] - tr.f_ip[k]) / cfg.sample_dt;
    CHECK(slope == doctest::Approx(-0.1 * 50.0 / (2.0 * sys.area_ip.h)).epsilon(1e-2));
    CHECK(tr.f_ip[k] == 50.0);
}

TEST_CASE("swing-equation residual and tie antisymmetry along the trajectory") {
    const TwoAreaSystem sys = test::reference_system();
    SimConfig cfg = horizon(20.0);
    cfg.record_states = true;
    const Disturbance dist{AreaId::IP, 0.1, 1.0};
    const auto tr = simulate(sys, dist, cfg);
    const TwoAreaDynamics dyn(sys);
    REQUIRE(tr.states.size() == tr.size());
    for (std::size_t k = 0; k < tr.size(); k += 7) {
        const double load = tr.t[k] >= dist.t_start ? dist.dp : 0.0;
        const AreaBalance ip = dyn.balance(tr.states[k], AreaId::IP, load);
        const AreaBalance ce = dyn.balance(tr.states[k], AreaId::CE, 0.0);
        CHECK(std::abs(ip.accel - ip.net()) < 1e-8);
        CHECK(std::abs(ce.accel - ce.net()) < 1e-8);
        CHECK(ip.tie_out == -ce.tie_out);
        CHECK(tr.p_tie[k] == -ip.tie_out);
    }
}

TEST_CASE("no disturbance leaves every channel at nominal") {
    const auto tr = simulate(test::reference_system(), Disturbance{AreaId::IP, 0.0, 1.0}, horizon(10.0));
    for (std::size_t k = 0; k < tr.size(); ++k) {
        CHECK(tr.f_ip[k] == 50.0);
        CHECK(tr.f_ce[k] == 50.0);
        CHECK(tr.p_tie[k] == 0.0);
    }
}

TEST_CASE("mirrored system gives the mirrored response") {
    TwoAreaSystem sys = test::reference_system();
    TwoAreaSystem mirror = sys;
    std::swap(mirror.area_ip.blocks, mirror.area_ce.blocks);
    std::swap(mirror.area_ip.h, mirror.area_ce.h);
    std::swap(mirror.area_ip.d, mirror.area_ce.d);
    const auto a = simulate(sys, Disturbance{AreaId::IP, 0.1, 1.0}, horizon(20.0));
    const auto b = simulate(mirror, Disturbance{AreaId::CE, 0.1, 1.0}, horizon(20.0));
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(std::abs(a.f_ip[k] - b.f_ce[k]) < 1e-10);
        CHECK(std::abs(a.f_ce[k] - b.f_ip[k]) < 1e-10);
        CHECK(std::abs(a.p_tie[k] + b.p_tie[k]) < 1e-10);
    }
}

TEST_CASE("sample grid and horizon") {
    SimConfig cfg = horizon(5.0);
    const auto tr = simulate(test::reference_system(), Disturbance{}, cfg);
    CHECK(tr.size() == 501);
    CHECK(tr.t.back() == doctest::Approx(5.0));
    CHECK(tr.sample_dt == 0.01);
    CHECK(tr.warnings.empty());
}

TEST_CASE("configuration errors") {
    const TwoAreaSystem sys = test::reference_system();
    SimConfig cfg;
    cfg.dt = 0.0;
    CHECK_THROWS_AS((void)simulate(sys, Disturbance{}, cfg), ConfigError);
    cfg = SimConfig{};
    cfg.dt = 0.003;
    CHECK_THROWS_AS((void)simulate(sys, Disturbance{}, cfg), ConfigError);
    cfg = SimConfig{};
    cfg.t_end = 0.005;
    CHECK_THROWS_AS((void)simulate(sys, Disturbance{}, cfg), ConfigError);
    cfg = SimConfig{};
    cfg.t_end = 10.005;
    CHECK_THROWS_AS((void)simulate(sys, Disturbance{}, cfg), ConfigError);
    TwoAreaSystem bad = sys;
    bad.area_ce.h = -1.0;
    CHECK_THROWS_AS((void)simulate(bad, Disturbance{}, SimConfig{}), ConfigError);
}

TEST_CASE("coarse steps raise a warning") {
    SimConfig cfg = horizon(5.0);
    cfg.dt = 0.025;
    cfg.sample_dt = 0.05;
    const auto tr = simulate(test::reference_system(), Disturbance{}, cfg);
    CHECK_FALSE(tr.warnings.empty());
}

TEST_CASE("unstable integration is reported, not returned") {
    TwoAreaSystem sys;
    sys.area_ip.blocks = {test::steam_block("coal", 0.05, 0.05)};
    SimConfig cfg;
    cfg.dt = 1.0;
    cfg.sample_dt = 1.0;
    cfg.t_end = 5000.0;
    CHECK_THROWS_AS((void)simulate(sys, Disturbance{AreaId::IP, 0.1, 1.0}, cfg), SimulationError);
}
