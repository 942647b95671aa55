#pragma once

// Grey-box calibration of the two-area model from a recorded outage.
//
// A ModelTemplate binds named scalar parameters onto a model structure. Two
// templates are provided: the reduced one (one TGOV1 equivalent loop per area,
// eight parameters) and the full one (one loop per technology, fourteen
// parameters with a shared governor time constant). The cost is the sum of
// squared frequency errors over both areas on the recorded sample grid.

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "freqstab/dispatch.hpp"
#include "freqstab/model.hpp"
#include "freqstab/pso.hpp"
#include "freqstab/simulator.hpp"

namespace freqstab {

/// Cost assigned to candidates that cannot be simulated.
inline constexpr double kDivergenceCost = 1e9;

struct RecordedEvent {
    FrequencyTrace trace;  // both areas on one uniform grid, Hz
    Disturbance dist;
    DispatchPair mix;
};

enum class ParamCategory { Inertia, Damping, Droop, TransientDroop, GovernorTime, Synchronizing };

struct Range {
    double lower;
    double upper;
};

struct BoundsConfig {
    Range h{1.0, 10.0};
    Range d{0.1, 3.0};
    Range r{0.01, 0.5};
    Range rt{0.05, 1.5};
    Range tg{0.05, 1.0};
    Range t{0.1, 5.0};

    [[nodiscard]] Range of(ParamCategory c) const;
};

struct PenaltyConfig {
    double weight = 100.0;
    Range h_band{1.0, 10.0};
    Range t_band{0.1, 5.0};
    bool transient_droop = true;  // Rt_hydro >= R_hydro
};

class ModelTemplate {
public:
    enum class TgMode { Shared, PerTechnology };

    struct Binding {
        std::string name;
        ParamCategory category;
        std::function<void(TwoAreaSystem&, double)> set;
        std::function<double(const TwoAreaSystem&)> get;
    };

    /// One parameter per inertia, damping, droop of every reserve-providing
    /// block, transient droop of every hydro block, the synchronizing
    /// coefficient and the governor time constant(s).
    [[nodiscard]] static ModelTemplate full(const TwoAreaSystem& structure, TgMode tg_mode = TgMode::Shared);

    /// Each area collapsed to a single TGOV1 loop whose lead/lag constants are
    /// taken from the structure's first steam loop.
    [[nodiscard]] static ModelTemplate reduced(const TwoAreaSystem& structure);

    [[nodiscard]] std::vector<std::string> names() const;
    [[nodiscard]] std::size_t size() const { return bindings_.size(); }
    [[nodiscard]] const std::vector<Binding>& bindings() const { return bindings_; }
    [[nodiscard]] const TwoAreaSystem& structure() const { return structure_; }

    /// Structure with the parameters applied; relaxed validation.
    [[nodiscard]] TwoAreaSystem instantiate(std::span<const double> params) const;
    [[nodiscard]] std::vector<double> extract(const TwoAreaSystem& system) const;

    [[nodiscard]] ParamSpace space(const BoundsConfig& bounds = {}, const PenaltyConfig& penalties = {}) const;

    [[nodiscard]] static std::string droop_name(std::string_view block, AreaId area);
    [[nodiscard]] static std::string transient_droop_name(std::string_view block, AreaId area);

private:
    ModelTemplate(TwoAreaSystem structure, std::vector<Binding> bindings)
        : structure_(std::move(structure)), bindings_(std::move(bindings)) {}

    TwoAreaSystem structure_;
    std::vector<Binding> bindings_;
};

/// Simulation settings used inside the cost: integration step from `base`,
/// sampling and horizon from the recorded grid.
[[nodiscard]] SimConfig objective_sim_config(const RecordedEvent& event, const SimConfig& base = {});

/// Sum over both areas of squared frequency error (Hz^2) on the recorded grid.
/// Unsimulatable candidates cost kDivergenceCost.
[[nodiscard]] double objective(std::span<const double> params, const RecordedEvent& event,
                               const ModelTemplate& tmpl, const SimConfig& sim = {});

[[nodiscard]] double penalized_cost(std::span<const double> params, const RecordedEvent& event,
                                    const ModelTemplate& tmpl, const ParamSpace& space, const SimConfig& sim = {});

struct EstimationOptions {
    BoundsConfig bounds;
    PenaltyConfig penalties;
    SimConfig sim;  // only dt is used
    ModelTemplate::TgMode tg_mode = ModelTemplate::TgMode::Shared;
    double seed_fraction = 0.5;
    double seed_jitter = 0.05;
    double transient_droop_ratio = 5.0;
};

/// True when the event carries no information: no disturbance, or recorded
/// frequencies that never leave their initial value.
[[nodiscard]] bool is_flat_event(const RecordedEvent& event);

[[nodiscard]] EstimationResult estimate_reduced(const RecordedEvent& event, const TwoAreaSystem& structure,
                                                const PsoConfig& cfg, const EstimationOptions& options = {});

/// Splits an area droop across technologies so that sum(1/R_i) = 1/R_area
/// with 1/R_i proportional to each technology's dispatch.
[[nodiscard]] std::vector<double> split_droop(double r_area, std::span<const double> dispatch);

/// Initial full-model parameters from a reduced fit: shared quantities copied,
/// area droops split by the event-time dispatch of reserve-providing blocks,
/// transient droops set to `transient_droop_ratio` x the hydro droop. Values
/// are clamped into the full-model bounds.
[[nodiscard]] std::vector<double> allocate_droops(const EstimationResult& reduced, const DispatchPair& mix,
                                                  const ModelTemplate& full, const EstimationOptions& options = {});

[[nodiscard]] EstimationResult estimate_full(const RecordedEvent& event, const ModelTemplate& full,
                                             std::span<const double> init, const PsoConfig& cfg,
                                             const EstimationOptions& options = {});

}  // namespace freqstab
