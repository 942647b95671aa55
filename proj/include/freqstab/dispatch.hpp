#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "freqstab/model.hpp"

namespace freqstab {

/// Generation per technology and load of one area at one instant, GW.
struct DispatchSnapshot {
    std::string id;
    AreaId area = AreaId::IP;
    std::map<std::string, double, std::less<>> pg;
    double pd = 0.0;

    /// Dispatch of a technology, zero when absent.
    [[nodiscard]] double generation(std::string_view technology) const;
    /// Summed dispatch of the technologies aggregated by a block.
    [[nodiscard]] double generation(const GenerationBlock& block) const;
};

struct DispatchPair {
    DispatchSnapshot ip;
    DispatchSnapshot ce;

    [[nodiscard]] const DispatchSnapshot& area(AreaId id) const { return id == AreaId::IP ? ip : ce; }
    [[nodiscard]] DispatchSnapshot& area(AreaId id) { return id == AreaId::IP ? ip : ce; }
};

void validate(const DispatchSnapshot& snap, const std::string& path);

/// `{"load": GW, "pg": {"coal": GW, ...}}`
[[nodiscard]] DispatchSnapshot parse_snapshot(const nlohmann::json& j, AreaId area, std::string id,
                                              const std::string& path);
[[nodiscard]] nlohmann::json to_json(const DispatchSnapshot& snap);

/// `{"ip": {...}, "ce": {...}}`
[[nodiscard]] DispatchPair parse_dispatch_pair(const nlohmann::json& j, const std::string& id,
                                               const std::string& path);

}  // namespace freqstab
