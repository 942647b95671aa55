#pragma once

// Rescaling of the calibrated reference model to other dispatch situations,
// multi-year scenario trajectories, synchronous-condenser mitigation and
// disturbance sweeps.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "freqstab/dispatch.hpp"
#include "freqstab/metrics.hpp"
#include "freqstab/model.hpp"
#include "freqstab/simulator.hpp"

namespace freqstab {

/// Droop of a block at dispatch pg_ti. Empty when the block is not dispatched.
[[nodiscard]] std::optional<double> scale_droop(double r_oi, double pg_oi, double pg_ti);

[[nodiscard]] double scale_damping(double d_o, double pd_o, double pd_t);

[[nodiscard]] double scale_inertia(double h_oi, double pg_oi, double pg_ti);

/// Typical inertia constant (s, on the machine rating) of each synchronous
/// technology. Technologies not listed are treated as converter-connected.
using TypicalInertia = std::map<std::string, double, std::less<>>;

struct InertiaSplit {
    std::map<std::string, double, std::less<>> h_tech;  // s on common base
    double h_load = 0.0;
};

/// h_oi = typical_i * pg_oi / s_base, h_load = h_o - sum(h_oi).
[[nodiscard]] InertiaSplit split_inertia(double h_o, const DispatchSnapshot& mix_o, const TypicalInertia& typical,
                                         double s_base);

/// Calibrated model together with the dispatch it was calibrated on.
struct ReferenceAnchor {
    TwoAreaSystem params_o;  // inertia decomposition populated
    DispatchPair mix_o;
    InertiaSplit split_ip;
    InertiaSplit split_ce;
    TypicalInertia typical_h;
    bool scale_load_inertia = false;

    [[nodiscard]] const InertiaSplit& split(AreaId id) const { return id == AreaId::IP ? split_ip : split_ce; }
};

/// Decomposes the reference inertia and checks that every block can be scaled.
[[nodiscard]] ReferenceAnchor make_anchor(TwoAreaSystem reference, DispatchPair mix_o, TypicalInertia typical_h,
                                          bool scale_load_inertia = false);

/// Model of the system at another dispatch: droops and inertia per block,
/// damping per area; blocks without dispatch are removed.
[[nodiscard]] TwoAreaSystem apply_snapshot(const ReferenceAnchor& anchor, const DispatchPair& snap);

struct MitigationSpec {
    int count = 3;
    double h_each = 4.0;        // s on own rating
    double rating_each = 0.25;  // GVA
    int online_from = 2025;
    AreaId area = AreaId::IP;

    [[nodiscard]] double inertia(double s_base) const { return count * h_each * rating_each / s_base; }
};

void validate(const MitigationSpec& spec);

/// Adds the condensers as an inertia-only block once they are online.
[[nodiscard]] TwoAreaSystem apply_mitigation(const TwoAreaSystem& sys, const MitigationSpec& spec, int year);

/// Gradual reduction of one technology in the IP area, reaching
/// `final_factor` in `to_year`.
struct HalvingSpec {
    std::string technology = "small_steam";
    int from_year = 2030;
    int to_year = 2040;
    double final_factor = 0.5;

    [[nodiscard]] double factor(int year) const;
};

struct TrajectoryPoint {
    int year = 2020;
    std::optional<int> month;  // 1..12
    DispatchPair mix;

    [[nodiscard]] bool operator<(const TrajectoryPoint& other) const;
};

struct ScenarioTrajectory {
    std::string name;
    std::string note;
    std::vector<TrajectoryPoint> snapshots;
    bool small_steam_halving = false;
    HalvingSpec halving;
    bool with_mitigation = false;
    MitigationSpec mitigation;

    /// Dispatch of a point after the enabled variants are applied.
    [[nodiscard]] DispatchPair dispatch(std::size_t index) const;
    /// e.g. "winter-valley/2035" or "monthly-average/2030-07".
    [[nodiscard]] std::string label(std::size_t index) const;
    /// Name with the enabled variants appended.
    [[nodiscard]] std::string variant_name() const;
};

void validate(const ScenarioTrajectory& trajectory);

/// Model of one trajectory point with variants and mitigation applied.
[[nodiscard]] TwoAreaSystem scenario_system(const ReferenceAnchor& anchor, const ScenarioTrajectory& trajectory,
                                            std::size_t index);

struct SweepRow {
    std::string scenario_id;
    int year = 0;
    std::optional<int> month;
    double h_ip = 0.0;
    double h_ce = 0.0;
    std::optional<MetricsReport> ip;
    std::optional<MetricsReport> ce;
    std::string status = "ok";

    [[nodiscard]] bool ok() const { return status == "ok"; }
};

struct SweepOptions {
    MetricsOptions metrics;
    std::size_t threads = 0;  // 0 picks the hardware concurrency
};

/// One row per trajectory point in trajectory order. Failures are recorded in
/// the row status and do not stop the sweep.
[[nodiscard]] std::vector<SweepRow> sweep(const ReferenceAnchor& anchor, const ScenarioTrajectory& trajectory,
                                          const Disturbance& dist, const SimConfig& cfg,
                                          const SweepOptions& options = {});

// File formats.

/// `{"model": path or object, "typical_h": {...}, "mix": {"ip": ..., "ce": ...},
///   "scale_load_inertia": false}`; relative model paths resolve against the
/// anchor file.
[[nodiscard]] ReferenceAnchor load_anchor(const std::filesystem::path& path);
[[nodiscard]] ReferenceAnchor parse_anchor(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// Either explicit `snapshots` or `keyframes` expanded over `years` (and
/// `months`) by piecewise-linear interpolation of technology shares and load.
[[nodiscard]] ScenarioTrajectory parse_trajectory(const nlohmann::json& j);
[[nodiscard]] ScenarioTrajectory load_trajectory(const std::filesystem::path& path);

}  // namespace freqstab
