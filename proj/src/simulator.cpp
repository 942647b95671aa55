#include "freqstab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "freqstab/governors.hpp"

namespace freqstab {

namespace {

constexpr double kGridTol = 1e-9;

std::size_t whole_ratio(double num, double den, const char* field) {
    const double ratio = num / den;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > kGridTol * std::max(1.0, ratio)) {
        throw ConfigError(field, fmt::format("{} is not an integer multiple of {}", num, den));
    }
    return static_cast<std::size_t>(rounded);
}

}  // namespace

void validate(const SimConfig& cfg) {
    if (!(cfg.dt > 0.0)) {
        throw ConfigError("sim.dt", "integration step must be positive");
    }
    if (!(cfg.sample_dt >= cfg.dt)) {
        throw ConfigError("sim.sample_dt", "sampling interval must not be shorter than the integration step");
    }
    if (!(cfg.t_end >= cfg.sample_dt)) {
        throw ConfigError("sim.t_end", "horizon must cover at least one sampling interval");
    }
    (void)whole_ratio(cfg.sample_dt, cfg.dt, "sim.sample_dt");
    (void)whole_ratio(cfg.t_end, cfg.sample_dt, "sim.t_end");
}

TwoAreaDynamics::TwoAreaDynamics(const TwoAreaSystem& system)
    : system_(system), omega0_(2.0 * std::numbers::pi * system.base.f0) {
    for (AreaId id : {AreaId::IP, AreaId::CE}) {
        for (const auto& block : system_.area(id).blocks) {
            if (!block.provides_fcr()) {
                continue;
            }
            const std::size_t n = governor_state_count(block.governor->kind());
            governed_.push_back({id, &*block.governor, dimension_, n});
            dimension_ += n;
        }
    }
}

double TwoAreaDynamics::tie_export(std::span<const double> x) const {
    return system_.tie.t_coeff * (x[kDeltaIp] - x[kDeltaCe]);
}

double TwoAreaDynamics::mechanical_power(std::span<const double> x, AreaId area) const {
    const double dw = area == AreaId::IP ? x[kDwIp] : x[kDwCe];
    double pm = 0.0;
    for (const auto& g : governed_) {
        if (g.area == area) {
            pm += governor_output(*g.gov, x.subspan(g.offset, g.count), dw);
        }
    }
    return pm;
}

void TwoAreaDynamics::derivative(std::span<const double> x, double load_ip, double load_ce,
                                 std::span<double> dx) const {
    const double tie = tie_export(x);
    const double dw_ip = x[kDwIp];
    const double dw_ce = x[kDwCe];

    const double net_ip = mechanical_power(x, AreaId::IP) - load_ip - system_.area_ip.d * dw_ip - tie;
    const double net_ce = mechanical_power(x, AreaId::CE) - load_ce - system_.area_ce.d * dw_ce + tie;

    dx[kDwIp] = net_ip / (2.0 * system_.area_ip.h);
    dx[kDeltaIp] = omega0_ * dw_ip;
    dx[kDwCe] = net_ce / (2.0 * system_.area_ce.h);
    dx[kDeltaCe] = omega0_ * dw_ce;

    for (const auto& g : governed_) {
        const double dw = g.area == AreaId::IP ? dw_ip : dw_ce;
        governor_derivative(*g.gov, x.subspan(g.offset, g.count), dw, dx.subspan(g.offset, g.count));
    }
}

AreaBalance TwoAreaDynamics::balance(std::span<const double> x, AreaId area, double load) const {
    const std::size_t dw_index = area == AreaId::IP ? kDwIp : kDwCe;
    const AreaModel& a = system_.area(area);
    AreaBalance b;
    b.mechanical = mechanical_power(x, area);
    b.load = load;
    b.damping = a.d * x[dw_index];
    const double tie = tie_export(x);
    b.tie_out = area == AreaId::IP ? tie : -tie;

    std::vector<double> dx(dimension_);
    const double load_ip = area == AreaId::IP ? load : 0.0;
    const double load_ce = area == AreaId::CE ? load : 0.0;
    derivative(x, load_ip, load_ce, dx);
    b.accel = 2.0 * a.h * dx[dw_index];
    return b;
}

void TwoAreaDynamics::clamp(std::span<double> x) const {
    for (const auto& g : governed_) {
        governor_clamp(*g.gov, x.subspan(g.offset, g.count));
    }
}

double TwoAreaDynamics::min_time_constant() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& g : governed_) {
        for (double tc : governor_time_constants(*g.gov)) {
            m = std::min(m, tc);
        }
    }
    return m;
}

FrequencyTrace simulate(const TwoAreaSystem& system, const Disturbance& dist, const SimConfig& cfg) {
    validate(cfg);
    validate(dist);
    validate(system, Validation::Relaxed);

    const TwoAreaDynamics dyn(system);
    const std::size_t n = dyn.dimension();
    const std::size_t steps_per_sample = whole_ratio(cfg.sample_dt, cfg.dt, "sim.sample_dt");
    const std::size_t samples = whole_ratio(cfg.t_end, cfg.sample_dt, "sim.t_end") + 1;
    const double dt = cfg.sample_dt / static_cast<double>(steps_per_sample);
    // The load step is constant over each integration step; it is on for
    // steps starting at or after t_start.
    const auto first_loaded_step = static_cast<std::size_t>(std::ceil(dist.t_start / dt - kGridTol));

    FrequencyTrace trace;
    trace.f0 = system.base.f0;
    trace.sample_dt = cfg.sample_dt;
    trace.t.reserve(samples);
    trace.f_ip.reserve(samples);
    trace.f_ce.reserve(samples);
    trace.p_tie.reserve(samples);

    if (dt > 0.2 * dyn.min_time_constant()) {
        trace.warnings.push_back(fmt::format("integration step {} s exceeds 0.2 x smallest time constant {} s", dt,
                                             dyn.min_time_constant()));
    }

    std::vector<double> x(n, 0.0), k1(n), k2(n), k3(n), k4(n), tmp(n);
    const double f0 = system.base.f0;

    auto record = [&](std::size_t k) {
        trace.t.push_back(static_cast<double>(k) * cfg.sample_dt);
        trace.f_ip.push_back(f0 * (1.0 + x[TwoAreaDynamics::kDwIp]));
        trace.f_ce.push_back(f0 * (1.0 + x[TwoAreaDynamics::kDwCe]));
        trace.p_tie.push_back(-dyn.tie_export(x));
        if (cfg.record_states) {
            trace.states.push_back(x);
        }
    };

    record(0);
    std::size_t step = 0;
    for (std::size_t k = 1; k < samples; ++k) {
        for (std::size_t s = 0; s < steps_per_sample; ++s, ++step) {
            const double load = step >= first_loaded_step ? dist.dp : 0.0;
            const double load_ip = dist.area == AreaId::IP ? load : 0.0;
            const double load_ce = dist.area == AreaId::CE ? load : 0.0;

            dyn.derivative(x, load_ip, load_ce, k1);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
            dyn.derivative(tmp, load_ip, load_ce, k2);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
            dyn.derivative(tmp, load_ip, load_ce, k3);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
            dyn.derivative(tmp, load_ip, load_ce, k4);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            dyn.clamp(x);

            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(x[i])) {
                    const double t = static_cast<double>(step + 1) * dt;
                    throw SimulationError(step + 1, t,
                                          fmt::format("state became non-finite at step {} (t = {} s)", step + 1, t));
                }
            }
        }
        record(k);
    }
    return trace;
}

}  // namespace freqstab
