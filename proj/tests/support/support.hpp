#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "freqstab/estimation.hpp"
#include "freqstab/model.hpp"
#include "freqstab/scenarios.hpp"
#include "freqstab/simulator.hpp"

namespace freqstab::test {

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(FREQSTAB_DATA_DIR) / name;
}

inline TwoAreaSystem reference_system() { return load_system(data_path("reference_model.json")); }

inline ReferenceAnchor reference_anchor() { return load_anchor(data_path("reference_anchor.json")); }

inline GenerationBlock steam_block(std::string name, double r, double tg = 0.4, double t2 = 2.1, double t3 = 7.0) {
    GenerationBlock b;
    b.name = name;
    b.kind = TechnologyKind::SteamTgov1;
    b.fcr_enabled = true;
    b.governor = GovernorParams{r, tg, SteamTgov1Params{t2, t3, 0.0}};
    b.technologies = {std::move(name)};
    return b;
}

inline GenerationBlock gas_block(std::string name, double r, double tg = 0.4) {
    GenerationBlock b;
    b.name = name;
    b.kind = TechnologyKind::GasGast;
    b.fcr_enabled = true;
    b.governor = GovernorParams{r, tg, GasGastParams{}};
    b.technologies = {std::move(name)};
    return b;
}

inline GenerationBlock hydro_block(std::string name, double r, double rt = 0.6, double tg = 0.4) {
    GenerationBlock b;
    b.name = name;
    b.kind = TechnologyKind::HydroClassic;
    b.fcr_enabled = true;
    b.governor = GovernorParams{r, tg, HydroClassicParams{rt, 5.0, 1.0}};
    b.technologies = {std::move(name)};
    return b;
}

inline GenerationBlock inertia_block(std::string name) {
    GenerationBlock b;
    b.name = name;
    b.kind = TechnologyKind::SteamTgov1;
    b.fcr_enabled = false;
    b.technologies = {std::move(name)};
    return b;
}

inline TwoAreaSystem islanded(TwoAreaSystem sys) {
    sys.tie.t_coeff = 0.0;
    return sys;
}

/// Sum of 1/R over the reserve-providing blocks of an area.
inline double droop_gain(const AreaModel& area) {
    double g = 0.0;
    for (const auto& b : area.blocks) {
        if (b.provides_fcr()) {
            g += 1.0 / b.governor->r;
        }
    }
    return g;
}

// Brute-force metric oracles: direct double loops over the samples.

inline double brute_nadir(const std::vector<double>& f) {
    double m = std::numeric_limits<double>::infinity();
    for (double v : f) {
        if (v < m) {
            m = v;
        }
    }
    return m;
}

inline double brute_t_nadir(const std::vector<double>& t, const std::vector<double>& f) {
    const double m = brute_nadir(f);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] == m) {
            return t[i];
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

inline double brute_rocof(const std::vector<double>& f, double sample_dt, std::size_t window_samples) {
    double best = 0.0;
    const double w = static_cast<double>(window_samples) * sample_dt;
    for (std::size_t i = 0; i < f.size(); ++i) {
        for (std::size_t j = i; j < f.size(); ++j) {
            if (j - i == window_samples) {
                const double r = std::abs(f[j] - f[i]) / w;
                if (r > best) {
                    best = r;
                }
            }
        }
    }
    return best;
}

/// Gaussian samples from mt19937_64 through Box-Muller, independent of the
/// standard library's distribution implementations.
class Noise {
public:
    explicit Noise(std::uint64_t seed) : engine_(seed) {}

    double operator()(double sigma) {
        double u1 = 0.0;
        while (u1 <= 0.0) {
            u1 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        }
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

inline RecordedEvent synthetic_event(const TwoAreaSystem& truth, const Disturbance& dist, const DispatchPair& mix,
                                     double sigma_hz, std::uint64_t seed, double t_end = 30.0) {
    SimConfig cfg;
    cfg.t_end = t_end;
    RecordedEvent ev;
    ev.trace = simulate(truth, dist, cfg);
    ev.trace.p_tie.clear();
    Noise noise(seed);
    for (std::size_t k = 0; k < ev.trace.size(); ++k) {
        ev.trace.f_ip[k] += noise(sigma_hz);
        ev.trace.f_ce[k] += noise(sigma_hz);
    }
    ev.dist = dist;
    ev.mix = mix;
    return ev;
}

}  // namespace freqstab::test
