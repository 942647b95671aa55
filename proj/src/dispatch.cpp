#include "freqstab/dispatch.hpp"

#include <cmath>

#include <fmt/format.h>

namespace freqstab {

double DispatchSnapshot::generation(std::string_view technology) const {
    auto it = pg.find(technology);
    return it == pg.end() ? 0.0 : it->second;
}

double DispatchSnapshot::generation(const GenerationBlock& block) const {
    double sum = 0.0;
    for (const auto& tech : block.technologies) {
        sum += generation(tech);
    }
    return sum;
}

void validate(const DispatchSnapshot& snap, const std::string& path) {
    if (!(snap.pd > 0.0) || !std::isfinite(snap.pd)) {
        throw ConfigError(path + ".load", "load must be positive");
    }
    for (const auto& [tech, value] : snap.pg) {
        if (!(value >= 0.0) || !std::isfinite(value)) {
            throw ConfigError(fmt::format("{}.pg.{}", path, tech), "generation must be nonnegative");
        }
    }
}

DispatchSnapshot parse_snapshot(const nlohmann::json& j, AreaId area, std::string id, const std::string& path) {
    if (!j.is_object()) {
        throw ConfigError(path, "expected an object");
    }
    DispatchSnapshot snap;
    snap.id = std::move(id);
    snap.area = area;
    if (!j.contains("load") || !j.at("load").is_number()) {
        throw ConfigError(path + ".load", "missing required field");
    }
    snap.pd = j.at("load").get<double>();
    if (j.contains("pg")) {
        if (!j.at("pg").is_object()) {
            throw ConfigError(path + ".pg", "expected an object of technology -> GW");
        }
        for (const auto& [tech, value] : j.at("pg").items()) {
            if (!value.is_number()) {
                throw ConfigError(fmt::format("{}.pg.{}", path, tech), "expected a number");
            }
            snap.pg.emplace(tech, value.get<double>());
        }
    }
    validate(snap, path);
    return snap;
}

nlohmann::json to_json(const DispatchSnapshot& snap) {
    nlohmann::json pg = nlohmann::json::object();
    for (const auto& [tech, value] : snap.pg) {
        pg[tech] = value;
    }
    return {{"load", snap.pd}, {"pg", pg}};
}

DispatchPair parse_dispatch_pair(const nlohmann::json& j, const std::string& id, const std::string& path) {
    if (!j.is_object() || !j.contains("ip") || !j.contains("ce")) {
        throw ConfigError(path, "expected an object with 'ip' and 'ce' dispatch");
    }
    return {parse_snapshot(j.at("ip"), AreaId::IP, id, path + ".ip"),
            parse_snapshot(j.at("ce"), AreaId::CE, id, path + ".ce")};
}

}  // namespace freqstab
