#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "freqstab/model.hpp"

namespace freqstab {

struct SimConfig {
    double dt = 0.005;         // integration step, s
    double t_end = 60.0;       // horizon, s
    double sample_dt = 0.01;   // output sampling interval, s
    bool record_states = false;
};

void validate(const SimConfig& cfg);

/// Uniformly sampled frequency (Hz) and tie-line flow per area.
/// `p_tie` is the flow from CE into IP in p.u.; it is empty for ingested
/// recordings that carry no tie-line channel.
struct FrequencyTrace {
    double f0 = 50.0;
    double sample_dt = 0.01;
    std::vector<double> t;
    std::vector<double> f_ip;
    std::vector<double> f_ce;
    std::vector<double> p_tie;
    std::vector<std::string> warnings;
    std::vector<std::vector<double>> states;  // one per sample when requested

    [[nodiscard]] std::size_t size() const { return t.size(); }
    [[nodiscard]] bool empty() const { return t.empty(); }
    [[nodiscard]] std::span<const double> frequency(AreaId id) const {
        return id == AreaId::IP ? std::span<const double>(f_ip) : std::span<const double>(f_ce);
    }
};

/// Raised when the integrated state becomes non-finite.
class SimulationError : public std::runtime_error {
public:
    SimulationError(std::size_t step, double time, const std::string& message)
        : std::runtime_error(message), step_(step), time_(time) {}

    [[nodiscard]] std::size_t step() const noexcept { return step_; }
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    std::size_t step_;
    double time_;
};

/// Swing-equation terms of one area evaluated at a state, all in p.u.
struct AreaBalance {
    double mechanical = 0.0;  // sum of governor outputs
    double load = 0.0;        // load step (generation loss)
    double damping = 0.0;     // D * dw
    double tie_out = 0.0;     // power leaving the area through the tie line
    double accel = 0.0;       // 2 H d(dw)/dt

    [[nodiscard]] double net() const { return mechanical - load - damping - tie_out; }
};

/// Compiled state-space form of a TwoAreaSystem.
///
/// State layout: [dw_ip, ddelta_ip, dw_ce, ddelta_ce, governor states...],
/// governor states ordered IP blocks first, then CE, in block order. Only
/// blocks that provide containment reserve own states.
class TwoAreaDynamics {
public:
    static constexpr std::size_t kDwIp = 0;
    static constexpr std::size_t kDeltaIp = 1;
    static constexpr std::size_t kDwCe = 2;
    static constexpr std::size_t kDeltaCe = 3;

    explicit TwoAreaDynamics(const TwoAreaSystem& system);
    // Holds pointers into its own copy of the system.
    TwoAreaDynamics(const TwoAreaDynamics&) = delete;
    TwoAreaDynamics& operator=(const TwoAreaDynamics&) = delete;

    [[nodiscard]] std::size_t dimension() const { return dimension_; }
    [[nodiscard]] const TwoAreaSystem& system() const { return system_; }

    void derivative(std::span<const double> x, double load_ip, double load_ce, std::span<double> dx) const;

    /// Active power exported from IP to CE, T (ddelta_ip - ddelta_ce).
    [[nodiscard]] double tie_export(std::span<const double> x) const;

    [[nodiscard]] AreaBalance balance(std::span<const double> x, AreaId area, double load) const;

    void clamp(std::span<double> x) const;

    [[nodiscard]] double min_time_constant() const;

private:
    struct Governed {
        AreaId area;
        const GovernorParams* gov;
        std::size_t offset;
        std::size_t count;
    };

    [[nodiscard]] double mechanical_power(std::span<const double> x, AreaId area) const;

    TwoAreaSystem system_;
    std::vector<Governed> governed_;
    std::size_t dimension_ = 4;
    double omega0_ = 0.0;
};

/// Integrates the two-area model under a step disturbance with fixed-step RK4
/// starting from the zero (nominal) state.
[[nodiscard]] FrequencyTrace simulate(const TwoAreaSystem& system, const Disturbance& dist, const SimConfig& cfg);

}  // namespace freqstab
