#include "freqstab/model.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

namespace freqstab {

namespace {

using nlohmann::json;

constexpr double kDecompositionTol = 1e-9;

std::string join(std::string_view path, std::string_view key) {
    return path.empty() ? std::string(key) : fmt::format("{}.{}", path, key);
}

const json& require(const json& j, std::string_view key, std::string_view path) {
    if (!j.is_object()) {
        throw ConfigError(std::string(path), "expected an object");
    }
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        throw ConfigError(join(path, key), "missing required field");
    }
    return *it;
}

double require_number(const json& j, std::string_view key, std::string_view path) {
    const json& v = require(j, key, path);
    if (!v.is_number()) {
        throw ConfigError(join(path, key), "expected a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        throw ConfigError(join(path, key), "must be finite");
    }
    return x;
}

double optional_number(const json& j, std::string_view key, std::string_view path, double fallback) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return fallback;
    }
    return require_number(j, key, path);
}

void check_positive(double value, const std::string& field, std::string_view what) {
    if (!(value > 0.0)) {
        throw ConfigError(field, fmt::format("{} must be positive (got {})", what, value));
    }
}

void check_nonnegative(double value, const std::string& field, std::string_view what) {
    if (!(value >= 0.0)) {
        throw ConfigError(field, fmt::format("{} must be nonnegative (got {})", what, value));
    }
}

GovernorParams parse_governor(const json& j, TechnologyKind kind, const std::string& path) {
    GovernorParams g;
    g.r = require_number(j, "r", path);
    g.tg = require_number(j, "tg", path);
    switch (kind) {
    case TechnologyKind::SteamTgov1: {
        SteamTgov1Params p;
        p.t2 = require_number(j, "t2", path);
        p.t3 = require_number(j, "t3", path);
        p.dt = optional_number(j, "dt", path, 0.0);
        g.turbine = p;
        break;
    }
    case TechnologyKind::GasGast: {
        GasGastParams p;
        p.t2 = require_number(j, "t2", path);
        p.t3 = require_number(j, "t3", path);
        p.lmax = require_number(j, "lmax", path);
        p.kt = require_number(j, "kt", path);
        g.turbine = p;
        break;
    }
    case TechnologyKind::HydroClassic: {
        HydroClassicParams p;
        p.rt = require_number(j, "rt", path);
        p.tr = require_number(j, "tr", path);
        p.tw = require_number(j, "tw", path);
        g.turbine = p;
        break;
    }
    case TechnologyKind::SyncCondenser:
        throw ConfigError(path, "synchronous condensers carry no governor");
    }
    return g;
}

GenerationBlock parse_block(const json& j, const std::string& path) {
    GenerationBlock b;
    const json& name = require(j, "name", path);
    if (!name.is_string() || name.get<std::string>().empty()) {
        throw ConfigError(join(path, "name"), "expected a nonempty string");
    }
    b.name = name.get<std::string>();

    const json& kind = require(j, "kind", path);
    auto parsed = kind.is_string() ? parse_kind(kind.get<std::string>()) : std::nullopt;
    if (!parsed) {
        throw ConfigError(join(path, "kind"), fmt::format("unknown technology kind {}", kind.dump()));
    }
    b.kind = *parsed;

    b.pg = optional_number(j, "pg", path, 0.0);
    b.h_contrib = optional_number(j, "h_contrib", path, 0.0);

    if (j.contains("fcr_enabled")) {
        if (!j.at("fcr_enabled").is_boolean()) {
            throw ConfigError(join(path, "fcr_enabled"), "expected a boolean");
        }
        b.fcr_enabled = j.at("fcr_enabled").get<bool>();
    } else {
        b.fcr_enabled = j.contains("governor") && !j.at("governor").is_null();
    }
    if (b.fcr_enabled) {
        b.governor = parse_governor(require(j, "governor", path), b.kind, join(path, "governor"));
    } else if (j.contains("governor") && !j.at("governor").is_null()) {
        throw ConfigError(join(path, "governor"), "inertia-only block (fcr_enabled = false) must not define a governor");
    }

    if (j.contains("technologies")) {
        const json& techs = j.at("technologies");
        if (!techs.is_array() || techs.empty()) {
            throw ConfigError(join(path, "technologies"), "expected a nonempty array of names");
        }
        for (const auto& t : techs) {
            if (!t.is_string()) {
                throw ConfigError(join(path, "technologies"), "expected strings");
            }
            b.technologies.push_back(t.get<std::string>());
        }
    } else {
        b.technologies = {b.name};
    }
    return b;
}

AreaModel parse_area_model(const json& j, AreaId id, const std::string& path) {
    AreaModel a;
    a.id = id;
    if (j.contains("id")) {
        const json& v = j.at("id");
        if (!v.is_string()) {
            throw ConfigError(join(path, "id"), "expected a string");
        }
        try {
            if (parse_area(v.get<std::string>()) != id) {
                throw ConfigError(join(path, "id"), "area id does not match its section");
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError(join(path, "id"), e.what());
        }
    }
    a.h = require_number(j, "h", path);
    a.d = require_number(j, "d", path);
    if (j.contains("h_load") && !j.at("h_load").is_null()) {
        a.h_load = require_number(j, "h_load", path);
    }
    if (j.contains("blocks")) {
        const json& blocks = j.at("blocks");
        if (!blocks.is_array()) {
            throw ConfigError(join(path, "blocks"), "expected an array");
        }
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            a.blocks.push_back(parse_block(blocks[i], fmt::format("{}.blocks[{}]", path, i)));
        }
    }
    return a;
}

void validate_governor(const GenerationBlock& b, const std::string& path, Validation level) {
    const GovernorParams& g = *b.governor;
    if (g.kind() != b.kind) {
        throw ConfigError(join(path, "governor"), "governor parameters do not match the block kind");
    }
    check_positive(g.r, join(path, "governor.r"), "droop");
    check_positive(g.tg, join(path, "governor.tg"), "time constant");
    const std::string gp = join(path, "governor");
    std::visit(
        [&](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, SteamTgov1Params>) {
                check_nonnegative(t.t2, join(gp, "t2"), "lead time constant");
                check_positive(t.t3, join(gp, "t3"), "time constant");
                check_nonnegative(t.dt, join(gp, "dt"), "turbine damping");
            } else if constexpr (std::is_same_v<T, GasGastParams>) {
                check_positive(t.t2, join(gp, "t2"), "time constant");
                check_positive(t.t3, join(gp, "t3"), "time constant");
                check_nonnegative(t.lmax, join(gp, "lmax"), "load limit");
                check_nonnegative(t.kt, join(gp, "kt"), "temperature gain");
            } else {
                check_positive(t.rt, join(gp, "rt"), "transient droop");
                check_positive(t.tr, join(gp, "tr"), "time constant");
                check_positive(t.tw, join(gp, "tw"), "water starting time");
                if (level == Validation::Strict && t.rt < g.r) {
                    throw ConfigError(join(gp, "rt"),
                                      fmt::format("transient droop {} must not be below droop {}", t.rt, g.r));
                }
            }
        },
        g.turbine);
}

void validate_area(const AreaModel& a, const std::string& path, Validation level) {
    if (!(a.h > 0.0)) {
        throw ConfigError(join(path, "h"), "inertia must be positive");
    }
    check_nonnegative(a.d, join(path, "d"), "damping");
    if (a.h_load) {
        check_nonnegative(*a.h_load, join(path, "h_load"), "load inertia");
        if (*a.h_load > a.h) {
            throw ConfigError(join(path, "h_load"), "load inertia exceeds total inertia");
        }
    }
    std::set<std::string, std::less<>> names;
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        const GenerationBlock& b = a.blocks[i];
        const std::string bp = fmt::format("{}.blocks[{}]", path, i);
        if (b.name.empty()) {
            throw ConfigError(join(bp, "name"), "expected a nonempty string");
        }
        if (!names.insert(b.name).second) {
            throw ConfigError(join(bp, "name"), fmt::format("duplicate block name '{}'", b.name));
        }
        check_nonnegative(b.pg, join(bp, "pg"), "dispatch");
        check_nonnegative(b.h_contrib, join(bp, "h_contrib"), "inertia contribution");
        if (b.fcr_enabled != b.governor.has_value()) {
            throw ConfigError(join(bp, "governor"),
                              b.fcr_enabled ? "fcr_enabled block needs governor parameters"
                                            : "inertia-only block must not define a governor");
        }
        if (b.kind == TechnologyKind::SyncCondenser && b.fcr_enabled) {
            throw ConfigError(join(bp, "fcr_enabled"), "synchronous condensers provide no containment reserve");
        }
        if (b.governor) {
            validate_governor(b, bp, level);
        }
    }
    if (a.h_load && !validate_decomposition(a)) {
        throw ConfigError(join(path, "h_load"), "h differs from h_load plus the block inertia contributions");
    }
}

json governor_to_json(const GovernorParams& g) {
    json j;
    j["r"] = g.r;
    j["tg"] = g.tg;
    std::visit(
        [&](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, SteamTgov1Params>) {
                j["t2"] = t.t2;
                j["t3"] = t.t3;
                j["dt"] = t.dt;
            } else if constexpr (std::is_same_v<T, GasGastParams>) {
                j["t2"] = t.t2;
                j["t3"] = t.t3;
                j["lmax"] = t.lmax;
                j["kt"] = t.kt;
            } else {
                j["rt"] = t.rt;
                j["tr"] = t.tr;
                j["tw"] = t.tw;
            }
        },
        g.turbine);
    return j;
}

json area_to_json(const AreaModel& a) {
    json j;
    j["id"] = std::string(to_string(a.id));
    j["h"] = a.h;
    if (a.h_load) {
        j["h_load"] = *a.h_load;
    }
    j["d"] = a.d;
    json blocks = json::array();
    for (const auto& b : a.blocks) {
        json jb;
        jb["name"] = b.name;
        jb["kind"] = std::string(to_string(b.kind));
        jb["technologies"] = b.technologies;
        jb["fcr_enabled"] = b.fcr_enabled;
        jb["pg"] = b.pg;
        jb["h_contrib"] = b.h_contrib;
        if (b.governor) {
            jb["governor"] = governor_to_json(*b.governor);
        }
        blocks.push_back(std::move(jb));
    }
    j["blocks"] = std::move(blocks);
    return j;
}

}  // namespace

std::string_view to_string(AreaId id) { return id == AreaId::IP ? "IP" : "CE"; }

AreaId parse_area(std::string_view text) {
    if (text == "IP" || text == "ip") {
        return AreaId::IP;
    }
    if (text == "CE" || text == "ce") {
        return AreaId::CE;
    }
    throw std::invalid_argument(fmt::format("unknown area '{}' (expected IP or CE)", text));
}

std::string_view to_string(TechnologyKind kind) {
    switch (kind) {
    case TechnologyKind::SteamTgov1: return "SteamTgov1";
    case TechnologyKind::GasGast: return "GasGast";
    case TechnologyKind::HydroClassic: return "HydroClassic";
    case TechnologyKind::SyncCondenser: return "SyncCondenser";
    }
    return "?";
}

std::optional<TechnologyKind> parse_kind(std::string_view text) {
    for (auto k : {TechnologyKind::SteamTgov1, TechnologyKind::GasGast, TechnologyKind::HydroClassic,
                   TechnologyKind::SyncCondenser}) {
        if (text == to_string(k)) {
            return k;
        }
    }
    return std::nullopt;
}

TechnologyKind GovernorParams::kind() const {
    switch (turbine.index()) {
    case 0: return TechnologyKind::SteamTgov1;
    case 1: return TechnologyKind::GasGast;
    default: return TechnologyKind::HydroClassic;
    }
}

const GenerationBlock* AreaModel::find_block(std::string_view name) const {
    for (const auto& b : blocks) {
        if (b.name == name) {
            return &b;
        }
    }
    return nullptr;
}

GenerationBlock* AreaModel::find_block(std::string_view name) {
    return const_cast<GenerationBlock*>(std::as_const(*this).find_block(name));
}

bool validate_decomposition(const AreaModel& area) {
    double sum = area.h_load.value_or(0.0);
    for (const auto& b : area.blocks) {
        sum += b.h_contrib;
    }
    return std::abs(area.h - sum) <= kDecompositionTol;
}

void validate(const TwoAreaSystem& system, Validation level) {
    check_positive(system.base.s_base, "base.s_base", "base power");
    check_positive(system.base.f0, "base.f0", "nominal frequency");
    if (system.area_ip.id != AreaId::IP) {
        throw ConfigError("area_ip.id", "expected IP");
    }
    if (system.area_ce.id != AreaId::CE) {
        throw ConfigError("area_ce.id", "expected CE");
    }
    validate_area(system.area_ip, "area_ip", level);
    validate_area(system.area_ce, "area_ce", level);
    if (!(system.tie.t_coeff >= 0.0) || !std::isfinite(system.tie.t_coeff)) {
        throw ConfigError("tie.t_coeff", "synchronizing coefficient must be nonnegative");
    }
}

void validate(const Disturbance& dist) {
    if (!std::isfinite(dist.dp)) {
        throw ConfigError("disturbance.dp", "must be finite");
    }
    if (!(dist.t_start >= 0.0)) {
        throw ConfigError("disturbance.t_start", "must be nonnegative");
    }
}

TwoAreaSystem build_system(const json& config) {
    if (!config.is_object()) {
        throw ConfigError("", "model description must be a JSON object");
    }
    TwoAreaSystem sys;
    const json& base = require(config, "base", "");
    sys.base.s_base = require_number(base, "s_base", "base");
    sys.base.f0 = require_number(base, "f0", "base");
    sys.area_ip = parse_area_model(require(config, "area_ip", ""), AreaId::IP, "area_ip");
    sys.area_ce = parse_area_model(require(config, "area_ce", ""), AreaId::CE, "area_ce");
    sys.tie.t_coeff = require_number(require(config, "tie", ""), "t_coeff", "tie");
    validate(sys, Validation::Strict);
    return sys;
}

json to_json(const TwoAreaSystem& system) {
    json j;
    j["base"] = {{"s_base", system.base.s_base}, {"f0", system.base.f0}};
    j["area_ip"] = area_to_json(system.area_ip);
    j["area_ce"] = area_to_json(system.area_ce);
    j["tie"] = {{"t_coeff", system.tie.t_coeff}};
    return j;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string(), "cannot open file");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string(), fmt::format("invalid JSON: {}", e.what()));
    }
}

TwoAreaSystem load_system(const std::filesystem::path& path) {
    const json j = read_json_file(path);
    try {
        return build_system(j);
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}:{}", path.string(), e.field()), e.message());
    }
}

void save_system(const TwoAreaSystem& system, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError(path.string(), "cannot write file");
    }
    out << to_json(system).dump(2) << '\n';
}

}  // namespace freqstab
