#include "freqstab/governors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace freqstab {

namespace {

// (1 + a s) / (1 + b s) realized as z' = (x - z) / b, y = z + (a / b)(x - z).
inline double lead_lag_output(double x, double z, double a, double b) { return z + (a / b) * (x - z); }

}  // namespace

std::size_t governor_state_count(TechnologyKind kind) {
    switch (kind) {
    case TechnologyKind::SteamTgov1: return 2;
    case TechnologyKind::GasGast: return 3;
    case TechnologyKind::HydroClassic: return 3;
    case TechnologyKind::SyncCondenser: return 0;
    }
    return 0;
}

void governor_derivative(const GovernorParams& gov, std::span<const double> s, double dw, std::span<double> ds) {
    const double demand = -dw / gov.r;
    std::visit(
        [&](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, SteamTgov1Params>) {
                ds[0] = (demand - s[0]) / gov.tg;
                ds[1] = (s[0] - s[1]) / t.t3;
            } else if constexpr (std::is_same_v<T, GasGastParams>) {
                const double temperature_limit = t.lmax + t.kt * (t.lmax - s[2]);
                const double valve_input = std::min(demand, temperature_limit);
                double dvalve = (valve_input - s[0]) / gov.tg;
                if (s[0] >= t.lmax && dvalve > 0.0) {
                    dvalve = 0.0;
                }
                ds[0] = dvalve;
                ds[1] = (s[0] - s[1]) / t.t2;
                ds[2] = (s[1] - s[2]) / t.t3;
            } else {
                const double droop_lag = (t.rt / gov.r) * t.tr;
                const double gate = lead_lag_output(s[0], s[1], t.tr, droop_lag);
                const double penstock_lag = 0.5 * t.tw;
                ds[0] = (demand - s[0]) / gov.tg;
                ds[1] = (s[0] - s[1]) / droop_lag;
                ds[2] = (gate - s[2]) / penstock_lag;
            }
        },
        gov.turbine);
}

double governor_output(const GovernorParams& gov, std::span<const double> s, double dw) {
    return std::visit(
        [&](const auto& t) -> double {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, SteamTgov1Params>) {
                return lead_lag_output(s[0], s[1], t.t2, t.t3) - t.dt * dw;
            } else if constexpr (std::is_same_v<T, GasGastParams>) {
                return s[1];
            } else {
                const double droop_lag = (t.rt / gov.r) * t.tr;
                const double gate = lead_lag_output(s[0], s[1], t.tr, droop_lag);
                return lead_lag_output(gate, s[2], -t.tw, 0.5 * t.tw);
            }
        },
        gov.turbine);
}

void governor_clamp(const GovernorParams& gov, std::span<double> s) {
    if (const auto* gast = std::get_if<GasGastParams>(&gov.turbine)) {
        s[0] = std::min(s[0], gast->lmax);
    }
}

std::vector<double> governor_time_constants(const GovernorParams& gov) {
    std::vector<double> out{gov.tg};
    std::visit(
        [&](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, SteamTgov1Params>) {
                out.push_back(t.t3);
            } else if constexpr (std::is_same_v<T, GasGastParams>) {
                out.push_back(t.t2);
                out.push_back(t.t3);
            } else {
                out.push_back((t.rt / gov.r) * t.tr);
                out.push_back(0.5 * t.tw);
            }
        },
        gov.turbine);
    return out;
}

std::vector<double> block_response(const GenerationBlock& block, const std::function<double(double)>& dw,
                                   double dt, double t_end) {
    if (!block.governor) {
        throw std::invalid_argument("block has no governor");
    }
    if (!(dt > 0.0) || !(t_end >= 0.0)) {
        throw std::invalid_argument("block_response needs dt > 0 and t_end >= 0");
    }
    const GovernorParams& gov = *block.governor;
    const std::size_t n = governor_state_count(gov.kind());
    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));

    std::vector<double> x(n, 0.0), k1(n), k2(n), k3(n), k4(n), tmp(n);
    std::vector<double> out;
    out.reserve(steps + 1);
    out.push_back(governor_output(gov, x, dw(0.0)));

    for (std::size_t step = 0; step < steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        governor_derivative(gov, x, dw(t), k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
        governor_derivative(gov, tmp, dw(t + 0.5 * dt), k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
        governor_derivative(gov, tmp, dw(t + 0.5 * dt), k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
        governor_derivative(gov, tmp, dw(t + dt), k4);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        governor_clamp(gov, x);
        out.push_back(governor_output(gov, x, dw(static_cast<double>(step + 1) * dt)));
    }
    return out;
}

}  // namespace freqstab
