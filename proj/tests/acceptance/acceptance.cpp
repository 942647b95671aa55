// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "freqstab/estimation.hpp"
#include "freqstab/metrics.hpp"
#include "freqstab/pso.hpp"
#include "freqstab/scenarios.hpp"
#include "freqstab/simulator.hpp"
#include "support.hpp"

using namespace freqstab;
using Clock = std::chrono::steady_clock;
using std::chrono::milliseconds;

namespace {

// Tolerances and budgets.
constexpr double kRocofRelTol = 0.05;
constexpr double kRocofRuntime = 1.0;
constexpr double kFinalValueRelTol = 1e-3;
constexpr double kFinalValueRuntime = 1.0;
constexpr double kNadirConvergence = 1e-4;  // Hz
constexpr double kRocofConvergence = 1e-3;  // Hz/s
constexpr double kInertiaRelTol = 0.10;
constexpr double kBetaRelTol = 0.05;
constexpr double kFloorFactor = 2.0;
constexpr double kEstimationRuntime = 600.0;
constexpr double kEventLength = 30.0;
constexpr double kEventNoiseHz = 1e-3;
constexpr double kSphereTarget = 1e-6;
constexpr std::size_t kSphereIters = 200;
constexpr double kFixedPointTol = 1e-12;
constexpr double kDoublingRatio = 1.8;
constexpr double kRocofLimit = 1.0;     // Hz/s
constexpr double kSheddingLimit = 49.2; // Hz
constexpr double kSweepRuntime = 300.0;
constexpr int kRandomTraces = 100;
constexpr double kResidualTol = 1e-8;
constexpr int kBoundRuns = 1000;
constexpr int kScalingTrials = 1000;
constexpr double kScalingRelTol = 1e-12;

const Disturbance kReferenceOutage{AreaId::IP, 0.1, 1.0};

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double rel_err(double value, double expected) { return std::abs(value - expected) / std::abs(expected); }

double beta(const AreaModel& area) { return area.d + test::droop_gain(area); }

SimConfig horizon(double t_end, double dt = 0.005) {
    SimConfig cfg;
    cfg.t_end = t_end;
    cfg.dt = dt;
    return cfg;
}

Outcome analytic_rocof() {
    Outcome o;
    const auto start = Clock::now();
    const auto anchor = test::reference_anchor();
    const TwoAreaSystem& sys = anchor.params_o;
    const auto tr = simulate(sys, kReferenceOutage, horizon(3.0));
    const std::size_t k0 = static_cast<std::size_t>(std::llround(kReferenceOutage.t_start / tr.sample_dt));
    const std::size_t k1 = k0 + static_cast<std::size_t>(std::llround(0.1 / tr.sample_dt));
    const double simulated = (tr.f_ip[k0] - tr.f_ip[k1]) / (tr.t[k1] - tr.t[k0]);
    const double analytic = kReferenceOutage.dp * sys.base.f0 / (2.0 * sys.area_ip.h);
    const double runtime = seconds_since(start);
    o.detail = fmt::format("simulated {:.5f} Hz/s, analytic {:.5f} Hz/s, error {:.2f}%, {:.3f} s", simulated,
                           analytic, 100.0 * rel_err(simulated, analytic), runtime);
    o.pass = rel_err(simulated, analytic) < kRocofRelTol && runtime < kRocofRuntime;
    return o;
}

Outcome final_value() {
    Outcome o;
    const auto start = Clock::now();
    const auto anchor = test::reference_anchor();
    double worst = 0.0;
    for (bool governors : {true, false}) {
        for (AreaId id : {AreaId::IP, AreaId::CE}) {
            TwoAreaSystem sys = test::islanded(anchor.params_o);
            if (!governors) {
                for (auto& b : sys.area(id).blocks) {
                    b.fcr_enabled = false;
                    b.governor.reset();
                }
            }
            const Disturbance dist{id, 0.1, 1.0};
            const auto tr = simulate(sys, dist, horizon(governors ? 300.0 : 400.0));
            const double dev = (steady_state(tr, id, std::chrono::duration<double>(1.0)) - sys.base.f0) / sys.base.f0;
            const double analytic = -dist.dp / beta(sys.area(id));
            worst = std::max(worst, rel_err(dev, analytic));
        }
    }
    const double runtime = seconds_since(start);
    o.detail = fmt::format("worst relative error {:.2g} over 4 islanded cases, {:.3f} s", worst, runtime);
    o.pass = worst < kFinalValueRelTol && runtime < kFinalValueRuntime;
    return o;
}

Outcome solver_convergence() {
    Outcome o;
    const auto anchor = test::reference_anchor();
    const auto coarse = simulate(anchor.params_o, kReferenceOutage, horizon(60.0, 0.005));
    const auto fine = simulate(anchor.params_o, kReferenceOutage, horizon(60.0, 0.0025));
    double d_nadir = 0.0, d_rocof = 0.0;
    for (AreaId id : {AreaId::IP, AreaId::CE}) {
        d_nadir = std::max(d_nadir, std::abs(nadir(coarse, id).nadir_hz - nadir(fine, id).nadir_hz));
        d_rocof = std::max(d_rocof, std::abs(rocof_sliding(coarse, id, milliseconds(100)) -
                                             rocof_sliding(fine, id, milliseconds(100))));
    }
    o.detail = fmt::format("nadir change {:.3g} Hz, rocof100 change {:.3g} Hz/s", d_nadir, d_rocof);
    o.pass = d_nadir < kNadirConvergence && d_rocof < kRocofConvergence;
    return o;
}

Outcome estimation_recovery() {
    Outcome o;
    const auto start = Clock::now();
    const auto anchor = test::reference_anchor();
    const TwoAreaSystem& truth = anchor.params_o;
    const RecordedEvent ev =
        test::synthetic_event(truth, kReferenceOutage, anchor.mix_o, kEventNoiseHz, 7, kEventLength);
    const auto full = ModelTemplate::full(truth);
    const double floor = objective(full.extract(truth), ev, full);

    const PsoConfig cfg;
    const auto reduced = estimate_reduced(ev, truth, cfg);
    const auto init = allocate_droops(reduced, ev.mix, full);
    const auto fit = estimate_full(ev, full, init, cfg);
    const TwoAreaSystem sys = full.instantiate(fit.best_params.values);
    const double runtime = seconds_since(start);

    for (AreaId id : {AreaId::IP, AreaId::CE}) {
        const double h = sys.area(id).h, h_true = truth.area(id).h;
        const double b = beta(sys.area(id)), b_true = beta(truth.area(id));
        o.detail += fmt::format("H_{} {:.3f}/{:.3f} beta_{} {:.2f}/{:.2f}; ", to_string(id), h, h_true,
                                to_string(id), b, b_true);
        o.pass = o.pass && rel_err(h, h_true) < kInertiaRelTol && rel_err(b, b_true) < kBetaRelTol;
    }
    o.detail += fmt::format("cost {:.5f} vs floor {:.5f}; {:.0f} s", fit.best_cost, floor, runtime);
    o.pass = o.pass && fit.best_cost < kFloorFactor * floor && runtime < kEstimationRuntime;
    return o;
}

Outcome pso_benchmark() {
    Outcome o;
    ParamSpace space;
    for (int d = 0; d < 5; ++d) {
        space.entries.push_back({fmt::format("x{}", d), -5.0, 5.0});
    }
    auto sphere = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return s;
    };
    PsoConfig cfg;
    cfg.max_iters = kSphereIters;
    const auto a = pso_optimize(space, cfg, sphere);
    const auto b = pso_optimize(space, cfg, sphere);
    const bool identical = a.cost_history == b.cost_history && a.best_params.values == b.best_params.values;
    o.detail = fmt::format("best {:.3g} after {} iterations, repeat identical: {}", a.best_cost, kSphereIters,
                           identical ? "yes" : "no");
    o.pass = a.best_cost < kSphereTarget && identical;
    return o;
}

void compare_field(Outcome& o, const std::string& name, double a, double b) {
    o.require(std::abs(a - b) <= kFixedPointTol, fmt::format("{} {} != {}", name, a, b));
}

void compare_area(Outcome& o, const AreaModel& a, const AreaModel& b) {
    const std::string area(to_string(a.id));
    compare_field(o, area + ".h", a.h, b.h);
    compare_field(o, area + ".d", a.d, b.d);
    o.require(a.h_load.has_value() == b.h_load.has_value(), area + ".h_load presence");
    if (a.h_load && b.h_load) {
        compare_field(o, area + ".h_load", *a.h_load, *b.h_load);
    }
    o.require(a.blocks.size() == b.blocks.size(), area + " block count");
    for (std::size_t i = 0; i < std::min(a.blocks.size(), b.blocks.size()); ++i) {
        const auto& x = a.blocks[i];
        const auto& y = b.blocks[i];
        const std::string p = area + "." + x.name;
        o.require(x.name == y.name && x.kind == y.kind && x.technologies == y.technologies &&
                      x.fcr_enabled == y.fcr_enabled && x.governor.has_value() == y.governor.has_value(),
                  p + " identity");
        compare_field(o, p + ".pg", x.pg, y.pg);
        compare_field(o, p + ".h_contrib", x.h_contrib, y.h_contrib);
        if (!x.governor || !y.governor) {
            continue;
        }
        compare_field(o, p + ".r", x.governor->r, y.governor->r);
        compare_field(o, p + ".tg", x.governor->tg, y.governor->tg);
        o.require(x.governor->turbine.index() == y.governor->turbine.index(), p + " turbine kind");
        if (x.governor->turbine.index() != y.governor->turbine.index()) {
            continue;
        }
        std::visit(
            [&](const auto& tx) {
                using T = std::decay_t<decltype(tx)>;
                const auto& ty = std::get<T>(y.governor->turbine);
                if constexpr (std::is_same_v<T, SteamTgov1Params>) {
                    compare_field(o, p + ".t2", tx.t2, ty.t2);
                    compare_field(o, p + ".t3", tx.t3, ty.t3);
                    compare_field(o, p + ".dt", tx.dt, ty.dt);
                } else if constexpr (std::is_same_v<T, GasGastParams>) {
                    compare_field(o, p + ".t2", tx.t2, ty.t2);
                    compare_field(o, p + ".t3", tx.t3, ty.t3);
                    compare_field(o, p + ".lmax", tx.lmax, ty.lmax);
                    compare_field(o, p + ".kt", tx.kt, ty.kt);
                } else {
                    compare_field(o, p + ".rt", tx.rt, ty.rt);
                    compare_field(o, p + ".tr", tx.tr, ty.tr);
                    compare_field(o, p + ".tw", tx.tw, ty.tw);
                }
            },
            x.governor->turbine);
    }
}

Outcome fixed_point() {
    Outcome o;
    const auto anchor = test::reference_anchor();
    const TwoAreaSystem rebuilt = apply_snapshot(anchor, anchor.mix_o);
    compare_field(o, "s_base", rebuilt.base.s_base, anchor.params_o.base.s_base);
    compare_field(o, "f0", rebuilt.base.f0, anchor.params_o.base.f0);
    compare_field(o, "t_coeff", rebuilt.tie.t_coeff, anchor.params_o.tie.t_coeff);
    compare_area(o, rebuilt.area_ip, anchor.params_o.area_ip);
    compare_area(o, rebuilt.area_ce, anchor.params_o.area_ce);
    const auto a = simulate(rebuilt, kReferenceOutage, horizon(60.0));
    const auto b = simulate(anchor.params_o, kReferenceOutage, horizon(60.0));
    o.require(a.t == b.t && a.f_ip == b.f_ip && a.f_ce == b.f_ce && a.p_tie == b.p_tie, "traces differ");
    if (o.pass) {
        o.detail = "every field within 1e-12, traces identical";
    }
    return o;
}

double mean_over_year(const std::vector<SweepRow>& rows, int year, const std::function<double(const SweepRow&)>& f) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : rows) {
        if (r.year == year && r.ok()) {
            sum += f(r);
            ++n;
        }
    }
    return n ? sum / n : std::nan("");
}

const SweepRow* row_of(const std::vector<SweepRow>& rows, int year) {
    for (const auto& r : rows) {
        if (r.year == year && r.ok()) return &r;
    }
    return nullptr;
}

Outcome trends() {
    Outcome o;
    const auto start = Clock::now();
    const auto anchor = test::reference_anchor();
    const SimConfig cfg = horizon(60.0);
    auto run = [&](const ScenarioTrajectory& t) { return sweep(anchor, t, kReferenceOutage, cfg); };
    auto rocof100 = [](const SweepRow& r) { return r.ip->rocof.at(100); };
    auto deviation = [&](const SweepRow& r) { return anchor.params_o.base.f0 - r.ip->nadir_hz; };

    double lowest_nadir = 1e9;
    auto track = [&](const std::vector<SweepRow>& rows, const std::string& name) {
        for (const auto& r : rows) {
            o.require(r.ok(), name + " " + r.scenario_id + " failed: " + r.status);
            if (r.ok()) {
                lowest_nadir = std::min({lowest_nadir, r.ip->nadir_hz, r.ce->nadir_hz});
            }
        }
    };

    const ScenarioTrajectory monthly = load_trajectory(test::data_path("scenarios/monthly_average.json"));
    const auto m = run(monthly);
    track(m, "monthly");
    const double rocof_ratio = mean_over_year(m, 2040, rocof100) / mean_over_year(m, 2020, rocof100);
    const double dev_ratio = mean_over_year(m, 2040, deviation) / mean_over_year(m, 2020, deviation);
    o.require(rocof_ratio >= kDoublingRatio, fmt::format("(a) rocof ratio {:.3f}", rocof_ratio));
    o.require(dev_ratio >= kDoublingRatio, fmt::format("(a) nadir deviation ratio {:.3f}", dev_ratio));

    ScenarioTrajectory halved = load_trajectory(test::data_path("scenarios/winter_valley.json"));
    const auto plain = run(halved);
    track(plain, "winter-valley");
    halved.small_steam_halving = true;
    const auto h = run(halved);
    track(h, "winter-valley halved");
    ScenarioTrajectory mitigated = halved;
    mitigated.with_mitigation = true;
    const auto hm = run(mitigated);
    track(hm, "winter-valley halved+sc");

    const SweepRow* h40 = row_of(h, 2040);
    const SweepRow* hm40 = row_of(hm, 2040);
    const double rocof_h = h40 ? rocof100(*h40) : std::nan("");
    const double rocof_hm = hm40 ? rocof100(*hm40) : std::nan("");
    o.require(rocof_h > kRocofLimit, fmt::format("(b) halved 2040 rocof100 {:.4f}", rocof_h));
    o.require(rocof_hm < kRocofLimit, fmt::format("(c) mitigated 2040 rocof100 {:.4f}", rocof_hm));
    int active_years = 0;
    for (std::size_t i = 0; i < h.size() && i < hm.size(); ++i) {
        if (h[i].year >= mitigated.mitigation.online_from && h[i].ok() && hm[i].ok()) {
            ++active_years;
            o.require(hm[i].ip->nadir_hz > h[i].ip->nadir_hz, "(c) nadir not raised in " + h[i].scenario_id);
        }
    }
    o.require(active_years > 0, "(c) no active mitigation year");

    ScenarioTrajectory pv = load_trajectory(test::data_path("scenarios/peak_pv.json"));
    track(run(pv), "peak-pv");
    pv.with_mitigation = true;
    track(run(pv), "peak-pv+sc");
    mitigated.small_steam_halving = false;
    track(run(mitigated), "winter-valley+sc");
    o.require(lowest_nadir > kSheddingLimit, fmt::format("(d) lowest nadir {:.4f}", lowest_nadir));

    const double runtime = seconds_since(start);
    o.require(runtime < kSweepRuntime, fmt::format("sweeps took {:.0f} s", runtime));
    const std::string summary =
        fmt::format("(a) rocof x{:.2f}, nadir deviation x{:.2f}; (b) {:.4f} Hz/s; (c) {:.4f} Hz/s over {} active "
                    "years; (d) lowest nadir {:.4f} Hz; {:.1f} s",
                    rocof_ratio, dev_ratio, rocof_h, rocof_hm, active_years, lowest_nadir, runtime);
    o.detail = o.detail.empty() ? summary : o.detail + " | " + summary;
    return o;
}

Outcome metric_oracles() {
    Outcome o;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> step(-0.02, 0.02);
    std::uniform_int_distribution<int> length(60, 3000);
    std::size_t checks = 0;
    for (int n = 0; n < kRandomTraces; ++n) {
        FrequencyTrace tr;
        tr.sample_dt = 0.01;
        const int len = length(rng);
        double f = 50.0;
        for (int k = 0; k < len; ++k) {
            tr.t.push_back(k * tr.sample_dt);
            tr.f_ip.push_back(f);
            tr.f_ce.push_back(100.0 - f);
            f += step(rng);
        }
        for (AreaId id : {AreaId::IP, AreaId::CE}) {
            const auto& series = id == AreaId::IP ? tr.f_ip : tr.f_ce;
            const NadirResult nr = nadir(tr, id);
            o.require(nr.nadir_hz == test::brute_nadir(series), fmt::format("trace {} nadir", n));
            o.require(nr.t_nadir == test::brute_t_nadir(tr.t, series), fmt::format("trace {} t_nadir", n));
            for (std::size_t lag : {10u, 50u}) {
                const double got = rocof_sliding(tr, id, milliseconds(lag * 10));
                o.require(got == test::brute_rocof(series, tr.sample_dt, lag), fmt::format("trace {} rocof", n));
            }
            checks += 4;
        }
    }
    if (o.pass) {
        o.detail = fmt::format("{} exact comparisons on {} random traces", checks, kRandomTraces);
    }
    return o;
}

Outcome properties() {
    Outcome o;

    // Power balance and tie antisymmetry at every sample.
    const auto anchor = test::reference_anchor();
    SimConfig cfg = horizon(30.0);
    cfg.record_states = true;
    const auto tr = simulate(anchor.params_o, kReferenceOutage, cfg);
    const TwoAreaDynamics dyn(anchor.params_o);
    double worst_residual = 0.0;
    bool antisymmetric = true;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const double load = tr.t[k] >= kReferenceOutage.t_start ? kReferenceOutage.dp : 0.0;
        const AreaBalance ip = dyn.balance(tr.states[k], AreaId::IP, load);
        const AreaBalance ce = dyn.balance(tr.states[k], AreaId::CE, 0.0);
        worst_residual = std::max({worst_residual, std::abs(ip.accel - ip.net()), std::abs(ce.accel - ce.net())});
        antisymmetric = antisymmetric && ip.tie_out == -ce.tie_out && tr.p_tie[k] == -ip.tie_out;
    }
    o.require(worst_residual < kResidualTol, fmt::format("power balance residual {:.3g}", worst_residual));
    o.require(antisymmetric, "tie flow not antisymmetric");

    // Optimizer bound respect.
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::uniform_int_distribution<int> dims(1, 6);
    int escapes = 0;
    for (int run = 0; run < kBoundRuns; ++run) {
        ParamSpace space;
        const int dim = dims(rng);
        std::vector<double> target;
        for (int d = 0; d < dim; ++d) {
            const double a = u(rng), b = u(rng);
            space.entries.push_back({fmt::format("x{}", d), std::min(a, b) - 1e-3, std::max(a, b) + 1e-3});
            target.push_back(3.0 * u(rng));
        }
        PsoConfig pc;
        pc.swarm_size = 10;
        pc.max_iters = 10;
        pc.threads = 1;
        pc.rng_seed = static_cast<std::uint64_t>(run) + 1;
        auto cost = [&](std::span<const double> x) {
            double s = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - target[i]);
            return s;
        };
        const auto r = pso_optimize(space, pc, cost);
        if (!space.contains(r.best_params.values)) {
            ++escapes;
        }
    }
    o.require(escapes == 0, fmt::format("{} optimizer results outside bounds", escapes));

    // Scaling identities and proportionality.
    std::uniform_real_distribution<double> pos(0.05, 20.0);
    int scaling_failures = 0;
    for (int n = 0; n < kScalingTrials; ++n) {
        const double r = pos(rng) / 40.0, h = pos(rng), d = pos(rng) / 5.0;
        const double pg_o = pos(rng), pg_t = pos(rng), pd_o = pos(rng), pd_t = pos(rng);
        const bool ok = scale_droop(r, pg_o, pg_o) == r && scale_damping(d, pd_o, pd_o) == d &&
                        scale_inertia(h, pg_o, pg_o) == h &&
                        rel_err(1.0 / *scale_droop(r, pg_o, pg_t), (1.0 / r) * pg_t / pg_o) < kScalingRelTol &&
                        rel_err(scale_damping(d, pd_o, pd_t), d * pd_t / pd_o) < kScalingRelTol &&
                        rel_err(scale_inertia(h, pg_o, pg_t), h * pg_t / pg_o) < kScalingRelTol;
        scaling_failures += ok ? 0 : 1;
    }
    o.require(scaling_failures == 0, fmt::format("{} scaling trials failed", scaling_failures));

    if (o.pass) {
        o.detail = fmt::format("residual {:.2g}, tie exact, {} optimizer runs in bounds, {} scaling trials",
                               worst_residual, kBoundRuns, kScalingTrials);
    }
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {1, "analytic initial rocof", analytic_rocof},
        {2, "final-value theorem", final_value},
        {3, "solver convergence", solver_convergence},
        {4, "estimation recovery", estimation_recovery},
        {5, "pso benchmark", pso_benchmark},
        {6, "fixed point", fixed_point},
        {7, "scenario trends", trends},
        {8, "metric oracles", metric_oracles},
        {9, "property suites", properties},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += o.pass ? 0 : 1;
        fmt::print("{} {} {}: {}\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
