#pragma once

// Domain types for the two-area electromechanical frequency model.
//
// All powers and inertia constants are expressed on one common base
// (SystemBase::s_base). Frequencies are per-unit of SystemBase::f0 inside the
// dynamics and Hz at the IO boundary.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace freqstab {

enum class AreaId { IP, CE };

[[nodiscard]] std::string_view to_string(AreaId id);
[[nodiscard]] AreaId parse_area(std::string_view text);

enum class TechnologyKind { SteamTgov1, GasGast, HydroClassic, SyncCondenser };

[[nodiscard]] std::string_view to_string(TechnologyKind kind);
[[nodiscard]] std::optional<TechnologyKind> parse_kind(std::string_view text);

/// Raised for malformed or physically invalid model descriptions. `field()`
/// holds the dotted path of the offending entry, e.g. `area_ip.blocks[2].governor.tw`.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message),
          field_(std::move(field)),
          message_(message) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

private:
    std::string field_;
    std::string message_;
};

struct SystemBase {
    double s_base = 10.0;  // GVA
    double f0 = 50.0;      // Hz

    bool operator==(const SystemBase&) const = default;
};

struct SteamTgov1Params {
    double t2 = 2.1;  // lead, s
    double t3 = 7.0;  // lag, s
    double dt = 0.0;  // turbine damping, p.u.

    bool operator==(const SteamTgov1Params&) const = default;
};

/// GAST: valve lag is the shared governor constant `tg`; `t2` is the fuel
/// system lag and `t3` the exhaust temperature measurement lag.
struct GasGastParams {
    double t2 = 0.1;
    double t3 = 3.0;
    double lmax = 1.0;  // incremental load limit, p.u. on common base
    double kt = 2.0;

    bool operator==(const GasGastParams&) const = default;
};

struct HydroClassicParams {
    double rt = 0.6;  // transient droop
    double tr = 5.0;  // reset time, s
    double tw = 1.0;  // water starting time, s

    bool operator==(const HydroClassicParams&) const = default;
};

using TurbineParams = std::variant<SteamTgov1Params, GasGastParams, HydroClassicParams>;

struct GovernorParams {
    double r = 0.05;   // droop, p.u. frequency / p.u. power
    double tg = 0.4;   // governor time constant, s
    TurbineParams turbine;

    [[nodiscard]] TechnologyKind kind() const;

    bool operator==(const GovernorParams&) const = default;
};

struct GenerationBlock {
    std::string name;
    TechnologyKind kind = TechnologyKind::SteamTgov1;
    std::optional<GovernorParams> governor;  // absent: inertia-only block
    double pg = 0.0;                         // dispatch, p.u. on common base
    double h_contrib = 0.0;                  // s on common base
    bool fcr_enabled = false;
    // Dispatch technologies aggregated by this block; defaults to {name}.
    std::vector<std::string> technologies;

    [[nodiscard]] bool provides_fcr() const { return fcr_enabled && governor.has_value(); }

    bool operator==(const GenerationBlock&) const = default;
};

struct AreaModel {
    AreaId id = AreaId::IP;
    double h = 5.0;                 // total inertia constant, s
    std::optional<double> h_load;   // present iff the per-block decomposition is populated
    double d = 1.0;                 // load damping
    std::vector<GenerationBlock> blocks;

    [[nodiscard]] const GenerationBlock* find_block(std::string_view name) const;
    [[nodiscard]] GenerationBlock* find_block(std::string_view name);

    bool operator==(const AreaModel&) const = default;
};

struct TieLine {
    double t_coeff = 0.0;  // p.u. power / rad; zero means islanded

    bool operator==(const TieLine&) const = default;
};

struct TwoAreaSystem {
    SystemBase base;
    AreaModel area_ip{.id = AreaId::IP, .h = 5.0, .h_load = {}, .d = 1.0, .blocks = {}};
    AreaModel area_ce{.id = AreaId::CE, .h = 5.0, .h_load = {}, .d = 1.0, .blocks = {}};
    TieLine tie;

    [[nodiscard]] const AreaModel& area(AreaId id) const { return id == AreaId::IP ? area_ip : area_ce; }
    [[nodiscard]] AreaModel& area(AreaId id) { return id == AreaId::IP ? area_ip : area_ce; }

    bool operator==(const TwoAreaSystem&) const = default;
};

struct Disturbance {
    AreaId area = AreaId::IP;
    double dp = 0.1;       // p.u. on common base, positive = generation loss
    double t_start = 1.0;  // s
};

/// Strict validation enforces every plausibility relation (rt >= r for hydro).
/// Relaxed validation keeps only what the integrator needs; estimation
/// templates use it so that implausible candidates reach the penalty terms.
enum class Validation { Strict, Relaxed };

void validate(const TwoAreaSystem& system, Validation level = Validation::Strict);
void validate(const Disturbance& dist);

/// True iff |h - h_load - sum(h_contrib)| <= 1e-9. Areas without a populated
/// decomposition (no h_load) use h_load = 0.
[[nodiscard]] bool validate_decomposition(const AreaModel& area);

/// Parses and validates a model description (sections base/area_ip/area_ce/tie).
[[nodiscard]] TwoAreaSystem build_system(const nlohmann::json& config);
[[nodiscard]] nlohmann::json to_json(const TwoAreaSystem& system);
[[nodiscard]] TwoAreaSystem load_system(const std::filesystem::path& path);
void save_system(const TwoAreaSystem& system, const std::filesystem::path& path);

/// Reads a JSON document, reporting parse errors with the file name.
[[nodiscard]] nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace freqstab
