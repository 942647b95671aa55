#include "freqstab/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

#include <fmt/format.h>

namespace freqstab {

std::optional<double> scale_droop(double r_oi, double pg_oi, double pg_ti) {
    if (!(pg_oi > 0.0)) {
        throw std::invalid_argument("reference dispatch must be positive to scale a droop");
    }
    if (!(pg_ti >= 0.0)) {
        throw std::invalid_argument("dispatch must be nonnegative");
    }
    if (pg_ti == 0.0) {
        return std::nullopt;
    }
    return r_oi * (pg_oi / pg_ti);
}

double scale_damping(double d_o, double pd_o, double pd_t) {
    if (!(pd_o > 0.0)) {
        throw std::invalid_argument("reference load must be positive");
    }
    if (!(pd_t > 0.0)) {
        throw std::invalid_argument("load must be positive to scale damping");
    }
    return d_o * (pd_t / pd_o);
}

double scale_inertia(double h_oi, double pg_oi, double pg_ti) {
    if (!(pg_oi > 0.0)) {
        throw std::invalid_argument("reference dispatch must be positive to scale inertia");
    }
    if (!(pg_ti >= 0.0)) {
        throw std::invalid_argument("dispatch must be nonnegative");
    }
    return h_oi * (pg_ti / pg_oi);
}

InertiaSplit split_inertia(double h_o, const DispatchSnapshot& mix_o, const TypicalInertia& typical, double s_base) {
    if (!(s_base > 0.0)) {
        throw std::invalid_argument("system base must be positive");
    }
    InertiaSplit out;
    double sum = 0.0;
    for (const auto& [tech, pg] : mix_o.pg) {
        auto it = typical.find(tech);
        if (it == typical.end()) {
            continue;
        }
        const double h = it->second * pg / s_base;
        out.h_tech.emplace(tech, h);
        sum += h;
    }
    out.h_load = h_o - sum;
    if (out.h_load < 0.0) {
        throw std::invalid_argument("typical inertia table inconsistent with estimated H");
    }
    return out;
}

ReferenceAnchor make_anchor(TwoAreaSystem reference, DispatchPair mix_o, TypicalInertia typical_h,
                            bool scale_load_inertia) {
    for (const auto& [tech, h] : typical_h) {
        if (!(h >= 0.0)) {
            throw ConfigError(fmt::format("typical_h.{}", tech), "inertia constant must be nonnegative");
        }
    }
    validate(reference, Validation::Strict);
    validate(mix_o.ip, "mix.ip");
    validate(mix_o.ce, "mix.ce");

    ReferenceAnchor anchor;
    for (AreaId id : {AreaId::IP, AreaId::CE}) {
        AreaModel& area = reference.area(id);
        const DispatchSnapshot& mix = mix_o.area(id);
        const std::string path = fmt::format("mix.{}", id == AreaId::IP ? "ip" : "ce");
        InertiaSplit split = split_inertia(area.h, mix, typical_h, reference.base.s_base);

        std::set<std::string, std::less<>> covered;
        double sum = 0.0;
        for (auto& block : area.blocks) {
            if (block.kind == TechnologyKind::SyncCondenser) {
                throw ConfigError(fmt::format("area_{}.blocks.{}", id == AreaId::IP ? "ip" : "ce", block.name),
                                  "reference model must not contain synchronous condensers");
            }
            if (!(mix.generation(block) > 0.0)) {
                throw ConfigError(fmt::format("{}.pg.{}", path, block.technologies.front()),
                                  fmt::format("block '{}' has no reference dispatch to scale from", block.name));
            }
            block.pg = mix.generation(block);
            block.h_contrib = 0.0;
            for (const auto& tech : block.technologies) {
                auto it = split.h_tech.find(tech);
                if (it != split.h_tech.end()) {
                    block.h_contrib += it->second;
                }
                covered.insert(tech);
            }
            sum += block.h_contrib;
        }
        for (const auto& [tech, h] : split.h_tech) {
            if (h > 0.0 && !covered.contains(tech)) {
                throw ConfigError(fmt::format("{}.pg.{}", path, tech),
                                  "synchronous technology has no block in the reference model");
            }
        }
        area.h_load = area.h - sum;
        split.h_load = *area.h_load;
        (id == AreaId::IP ? anchor.split_ip : anchor.split_ce) = std::move(split);
    }
    anchor.params_o = std::move(reference);
    anchor.mix_o = std::move(mix_o);
    anchor.typical_h = std::move(typical_h);
    anchor.scale_load_inertia = scale_load_inertia;
    return anchor;
}

TwoAreaSystem apply_snapshot(const ReferenceAnchor& anchor, const DispatchPair& snap) {
    TwoAreaSystem out = anchor.params_o;
    const double s_base = out.base.s_base;
    for (AreaId id : {AreaId::IP, AreaId::CE}) {
        const AreaModel& ref = anchor.params_o.area(id);
        const DispatchSnapshot& mix_o = anchor.mix_o.area(id);
        const DispatchSnapshot& mix_t = snap.area(id);
        const InertiaSplit& split = anchor.split(id);
        const std::string path = fmt::format("{}.{}", mix_t.id.empty() ? "snapshot" : mix_t.id, to_string(id));
        validate(mix_t, path);

        AreaModel& area = out.area(id);
        area.d = scale_damping(ref.d, mix_o.pd, mix_t.pd);
        area.blocks.clear();

        // H_t = H_o + sum_i (H_ti - H_oi), which equals h_load + sum_i H_ti.
        double delta_h = 0.0;
        std::set<std::string, std::less<>> covered;
        for (const auto& block : ref.blocks) {
            covered.insert(block.technologies.begin(), block.technologies.end());
            const double pg_o = mix_o.generation(block);
            const double pg_t = mix_t.generation(block);
            if (pg_t == 0.0) {
                delta_h -= block.h_contrib;
                continue;
            }
            GenerationBlock b = block;
            b.pg = pg_t;
            if (b.governor) {
                b.governor->r = *scale_droop(block.governor->r, pg_o, pg_t);
                if (auto* hydro = std::get_if<HydroClassicParams>(&b.governor->turbine)) {
                    hydro->rt = *scale_droop(hydro->rt, pg_o, pg_t);
                }
            }
            b.h_contrib = 0.0;
            for (const auto& tech : block.technologies) {
                const double t_o = mix_o.generation(tech);
                const double t_t = mix_t.generation(tech);
                if (auto it = split.h_tech.find(tech); it != split.h_tech.end() && t_o > 0.0) {
                    b.h_contrib += scale_inertia(it->second, t_o, t_t);
                } else if (auto typ = anchor.typical_h.find(tech); typ != anchor.typical_h.end()) {
                    b.h_contrib += typ->second * t_t / s_base;
                }
            }
            delta_h += b.h_contrib - block.h_contrib;
            area.blocks.push_back(std::move(b));
        }
        for (const auto& [tech, pg] : mix_t.pg) {
            auto typ = anchor.typical_h.find(tech);
            if (pg > 0.0 && typ != anchor.typical_h.end() && typ->second > 0.0 && !covered.contains(tech)) {
                throw ConfigError(fmt::format("{}.pg.{}", path, tech),
                                  "synchronous technology has no block in the reference model");
            }
        }

        double h_load = ref.h_load.value_or(split.h_load);
        if (anchor.scale_load_inertia) {
            const double scaled = h_load * (mix_t.pd / mix_o.pd);
            delta_h += scaled - h_load;
            h_load = scaled;
        }
        area.h = ref.h + delta_h;
        area.h_load = h_load;
        if (!(area.h > 0.0)) {
            throw ConfigError(path, "scaled area inertia is not positive");
        }
    }
    return out;
}

void validate(const MitigationSpec& spec) {
    if (spec.count < 0) {
        throw ConfigError("mitigation.count", "must be nonnegative");
    }
    if (!(spec.h_each >= 0.0)) {
        throw ConfigError("mitigation.h_each", "must be nonnegative");
    }
    if (!(spec.rating_each >= 0.0)) {
        throw ConfigError("mitigation.rating_each", "must be nonnegative");
    }
}

TwoAreaSystem apply_mitigation(const TwoAreaSystem& sys, const MitigationSpec& spec, int year) {
    validate(spec);
    TwoAreaSystem out = sys;
    if (spec.count == 0 || year < spec.online_from) {
        return out;
    }
    const double h = spec.inertia(sys.base.s_base);
    AreaModel& area = out.area(spec.area);
    GenerationBlock sc;
    sc.name = "sync_condenser";
    sc.kind = TechnologyKind::SyncCondenser;
    sc.fcr_enabled = false;
    sc.pg = 0.0;
    sc.h_contrib = area.h_load ? h : 0.0;
    sc.technologies = {"sync_condenser"};
    area.blocks.push_back(std::move(sc));
    area.h += h;
    return out;
}

double HalvingSpec::factor(int year) const {
    if (year <= from_year) {
        return 1.0;
    }
    if (year >= to_year) {
        return final_factor;
    }
    const double progress = static_cast<double>(year - from_year) / static_cast<double>(to_year - from_year);
    return 1.0 - (1.0 - final_factor) * progress;
}

bool TrajectoryPoint::operator<(const TrajectoryPoint& other) const {
    if (year != other.year) {
        return year < other.year;
    }
    return month.value_or(0) < other.month.value_or(0);
}

DispatchPair ScenarioTrajectory::dispatch(std::size_t index) const {
    DispatchPair mix = snapshots.at(index).mix;
    if (small_steam_halving) {
        auto it = mix.ip.pg.find(halving.technology);
        if (it != mix.ip.pg.end()) {
            it->second *= halving.factor(snapshots[index].year);
        }
    }
    return mix;
}

std::string ScenarioTrajectory::label(std::size_t index) const {
    const TrajectoryPoint& p = snapshots.at(index);
    if (p.month) {
        return fmt::format("{}/{}-{:02d}", name, p.year, *p.month);
    }
    return fmt::format("{}/{}", name, p.year);
}

std::string ScenarioTrajectory::variant_name() const {
    std::string out = name;
    if (small_steam_halving) {
        out += "+halved-small-steam";
    }
    if (with_mitigation) {
        out += "+sc";
    }
    return out;
}

void validate(const ScenarioTrajectory& trajectory) {
    for (std::size_t i = 0; i < trajectory.snapshots.size(); ++i) {
        const TrajectoryPoint& p = trajectory.snapshots[i];
        const std::string path = fmt::format("snapshots[{}]", i);
        if (p.month && (*p.month < 1 || *p.month > 12)) {
            throw ConfigError(path + ".month", "must lie in 1..12");
        }
        if (i > 0 && !(trajectory.snapshots[i - 1] < p)) {
            throw ConfigError(path, "snapshots must be strictly ordered in time");
        }
        validate(p.mix.ip, path + ".ip");
        validate(p.mix.ce, path + ".ce");
    }
    if (!(trajectory.halving.final_factor >= 0.0) || trajectory.halving.to_year <= trajectory.halving.from_year) {
        throw ConfigError("variants.halving", "needs final_factor >= 0 and to_year > from_year");
    }
    validate(trajectory.mitigation);
}

TwoAreaSystem scenario_system(const ReferenceAnchor& anchor, const ScenarioTrajectory& trajectory,
                              std::size_t index) {
    DispatchPair mix = trajectory.dispatch(index);
    mix.ip.id = mix.ce.id = trajectory.label(index);
    TwoAreaSystem sys = apply_snapshot(anchor, mix);
    if (trajectory.with_mitigation) {
        sys = apply_mitigation(sys, trajectory.mitigation, trajectory.snapshots[index].year);
    }
    return sys;
}

std::vector<SweepRow> sweep(const ReferenceAnchor& anchor, const ScenarioTrajectory& trajectory,
                            const Disturbance& dist, const SimConfig& cfg, const SweepOptions& options) {
    validate(dist);
    validate(cfg);
    const std::size_t n = trajectory.snapshots.size();
    std::vector<SweepRow> rows(n);

    auto run_one = [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.scenario_id = trajectory.label(i);
        row.year = trajectory.snapshots[i].year;
        row.month = trajectory.snapshots[i].month;
        try {
            const TwoAreaSystem sys = scenario_system(anchor, trajectory, i);
            row.h_ip = sys.area_ip.h;
            row.h_ce = sys.area_ce.h;
            const FrequencyTrace trace = simulate(sys, dist, cfg);
            row.ip = compute_metrics(trace, AreaId::IP, options.metrics);
            row.ce = compute_metrics(trace, AreaId::CE, options.metrics);
        } catch (const std::exception& e) {
            row.status = fmt::format("error: {}", e.what());
        }
    };

    std::size_t threads =
        options.threads == 0 ? std::max<std::size_t>(1, std::thread::hardware_concurrency()) : options.threads;
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            run_one(i);
        }
        return rows;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    run_one(i);
                }
            });
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// File formats

namespace {

double number_at(const nlohmann::json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) {
        throw ConfigError(path + "." + key, "missing required field");
    }
    if (!j.at(key).is_number()) {
        throw ConfigError(path + "." + key, "expected a number");
    }
    return j.at(key).get<double>();
}

int int_at(const nlohmann::json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) {
        throw ConfigError(path + "." + key, "missing required field");
    }
    if (!j.at(key).is_number_integer()) {
        throw ConfigError(path + "." + key, "expected an integer");
    }
    return j.at(key).get<int>();
}

MitigationSpec parse_mitigation(const nlohmann::json& j, const std::string& path) {
    if (!j.is_object()) {
        throw ConfigError(path, "expected an object");
    }
    MitigationSpec spec;
    spec.count = int_at(j, "count", path);
    spec.h_each = number_at(j, "h_each", path);
    spec.rating_each = number_at(j, "rating_each", path);
    spec.online_from = int_at(j, "online_from", path);
    if (j.contains("area")) {
        try {
            spec.area = parse_area(j.at("area").get<std::string>());
        } catch (const std::exception&) {
            throw ConfigError(path + ".area", "expected IP or CE");
        }
    }
    validate(spec);
    return spec;
}

struct AreaKeyframe {
    double load = 0.0;
    std::map<std::string, double, std::less<>> shares;
};

struct Keyframe {
    int year = 0;
    AreaKeyframe ip;
    AreaKeyframe ce;

    [[nodiscard]] const AreaKeyframe& area(AreaId id) const { return id == AreaId::IP ? ip : ce; }
};

struct Seasonal {
    std::vector<double> load;  // 12 factors or empty
    std::map<std::string, std::vector<double>, std::less<>> shares;
};

AreaKeyframe parse_area_keyframe(const nlohmann::json& j, const std::string& path) {
    if (!j.is_object()) {
        throw ConfigError(path, "expected an object");
    }
    AreaKeyframe k;
    k.load = number_at(j, "load", path);
    if (!(k.load > 0.0)) {
        throw ConfigError(path + ".load", "load must be positive");
    }
    if (!j.contains("shares") || !j.at("shares").is_object()) {
        throw ConfigError(path + ".shares", "missing required field");
    }
    for (const auto& [tech, v] : j.at("shares").items()) {
        if (!v.is_number() || !(v.get<double>() >= 0.0)) {
            throw ConfigError(fmt::format("{}.shares.{}", path, tech), "share must be a nonnegative number");
        }
        k.shares.emplace(tech, v.get<double>());
    }
    return k;
}

std::vector<double> parse_monthly(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 12) {
        throw ConfigError(path, "expected twelve monthly factors");
    }
    std::vector<double> out;
    for (std::size_t m = 0; m < 12; ++m) {
        if (!j[m].is_number() || !(j[m].get<double>() >= 0.0)) {
            throw ConfigError(fmt::format("{}[{}]", path, m), "factor must be a nonnegative number");
        }
        out.push_back(j[m].get<double>());
    }
    return out;
}

Seasonal parse_seasonal(const nlohmann::json& j, const std::string& path) {
    Seasonal s;
    if (!j.is_object()) {
        throw ConfigError(path, "expected an object");
    }
    if (j.contains("load")) {
        s.load = parse_monthly(j.at("load"), path + ".load");
    }
    if (j.contains("shares")) {
        for (const auto& [tech, v] : j.at("shares").items()) {
            s.shares.emplace(tech, parse_monthly(v, fmt::format("{}.shares.{}", path, tech)));
        }
    }
    return s;
}

double lerp(double a, double b, double w) { return a + (b - a) * w; }

DispatchSnapshot interpolate(const std::vector<Keyframe>& keys, AreaId id, int year, std::optional<int> month,
                             const Seasonal* seasonal) {
    auto upper = std::find_if(keys.begin(), keys.end(), [&](const Keyframe& k) { return k.year >= year; });
    const Keyframe* a = nullptr;
    const Keyframe* b = nullptr;
    double w = 0.0;
    if (upper == keys.begin()) {
        a = b = &keys.front();
    } else if (upper == keys.end()) {
        a = b = &keys.back();
    } else {
        b = &*upper;
        a = &*(upper - 1);
        w = static_cast<double>(year - a->year) / static_cast<double>(b->year - a->year);
    }
    const AreaKeyframe& ka = a->area(id);
    const AreaKeyframe& kb = b->area(id);

    DispatchSnapshot snap;
    snap.area = id;
    snap.pd = lerp(ka.load, kb.load, w);
    if (month && seasonal && !seasonal->load.empty()) {
        snap.pd *= seasonal->load[static_cast<std::size_t>(*month - 1)];
    }
    std::set<std::string, std::less<>> techs;
    for (const auto& [t, v] : ka.shares) techs.insert(t);
    for (const auto& [t, v] : kb.shares) techs.insert(t);
    for (const auto& tech : techs) {
        auto get = [&](const AreaKeyframe& k) {
            auto it = k.shares.find(tech);
            return it == k.shares.end() ? 0.0 : it->second;
        };
        double share = lerp(get(ka), get(kb), w);
        if (month && seasonal) {
            if (auto it = seasonal->shares.find(tech); it != seasonal->shares.end()) {
                share *= it->second[static_cast<std::size_t>(*month - 1)];
            }
        }
        snap.pg.emplace(tech, share * snap.pd);
    }
    return snap;
}

std::vector<int> parse_years(const nlohmann::json& j) {
    if (j.is_array()) {
        std::vector<int> out;
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number_integer()) {
                throw ConfigError(fmt::format("years[{}]", i), "expected an integer");
            }
            out.push_back(j[i].get<int>());
        }
        return out;
    }
    if (j.is_object()) {
        const int from = int_at(j, "from", "years");
        const int to = int_at(j, "to", "years");
        const int step = j.contains("step") ? int_at(j, "step", "years") : 1;
        if (step <= 0 || to < from) {
            throw ConfigError("years", "needs from <= to and a positive step");
        }
        std::vector<int> out;
        for (int y = from; y <= to; y += step) {
            out.push_back(y);
        }
        return out;
    }
    throw ConfigError("years", "expected a list or {from, to, step}");
}

}  // namespace

ScenarioTrajectory parse_trajectory(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("trajectory", "expected an object");
    }
    ScenarioTrajectory tr;
    if (!j.contains("name") || !j.at("name").is_string()) {
        throw ConfigError("name", "missing required field");
    }
    tr.name = j.at("name").get<std::string>();
    tr.note = j.value("note", std::string{});

    if (j.contains("snapshots") && j.contains("keyframes")) {
        throw ConfigError("snapshots", "give either snapshots or keyframes, not both");
    }
    if (j.contains("snapshots")) {
        const auto& arr = j.at("snapshots");
        if (!arr.is_array()) {
            throw ConfigError("snapshots", "expected a list");
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string path = fmt::format("snapshots[{}]", i);
            TrajectoryPoint p;
            p.year = int_at(arr[i], "year", path);
            if (arr[i].contains("month")) {
                p.month = int_at(arr[i], "month", path);
            }
            p.mix = parse_dispatch_pair(arr[i], std::string{}, path);
            tr.snapshots.push_back(std::move(p));
        }
    } else if (j.contains("keyframes")) {
        const auto& arr = j.at("keyframes");
        if (!arr.is_array() || arr.empty()) {
            throw ConfigError("keyframes", "expected a nonempty list");
        }
        std::vector<Keyframe> keys;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string path = fmt::format("keyframes[{}]", i);
            Keyframe k;
            k.year = int_at(arr[i], "year", path);
            if (!arr[i].contains("ip") || !arr[i].contains("ce")) {
                throw ConfigError(path, "expected 'ip' and 'ce' entries");
            }
            k.ip = parse_area_keyframe(arr[i].at("ip"), path + ".ip");
            k.ce = parse_area_keyframe(arr[i].at("ce"), path + ".ce");
            if (!keys.empty() && k.year <= keys.back().year) {
                throw ConfigError(path + ".year", "keyframes must be strictly ordered by year");
            }
            keys.push_back(std::move(k));
        }
        std::vector<int> years;
        if (j.contains("years")) {
            years = parse_years(j.at("years"));
        } else {
            for (const auto& k : keys) years.push_back(k.year);
        }
        std::vector<std::optional<int>> months{std::nullopt};
        if (j.contains("months")) {
            months.clear();
            const auto& m = j.at("months");
            if (!m.is_array()) {
                throw ConfigError("months", "expected a list");
            }
            for (std::size_t i = 0; i < m.size(); ++i) {
                if (!m[i].is_number_integer()) {
                    throw ConfigError(fmt::format("months[{}]", i), "expected an integer");
                }
                months.emplace_back(m[i].get<int>());
            }
        }
        std::optional<Seasonal> season_ip;
        std::optional<Seasonal> season_ce;
        if (j.contains("seasonal")) {
            const auto& s = j.at("seasonal");
            if (s.contains("ip")) season_ip = parse_seasonal(s.at("ip"), "seasonal.ip");
            if (s.contains("ce")) season_ce = parse_seasonal(s.at("ce"), "seasonal.ce");
        }
        for (int year : years) {
            for (const auto& month : months) {
                if (month && (*month < 1 || *month > 12)) {
                    throw ConfigError("months", "must lie in 1..12");
                }
                TrajectoryPoint p;
                p.year = year;
                p.month = month;
                p.mix.ip = interpolate(keys, AreaId::IP, year, month, season_ip ? &*season_ip : nullptr);
                p.mix.ce = interpolate(keys, AreaId::CE, year, month, season_ce ? &*season_ce : nullptr);
                tr.snapshots.push_back(std::move(p));
            }
        }
    }

    if (j.contains("variants")) {
        const auto& v = j.at("variants");
        if (!v.is_object()) {
            throw ConfigError("variants", "expected an object");
        }
        tr.small_steam_halving = v.value("small_steam_halving", false);
        tr.with_mitigation = v.value("with_sc", false);
        if (v.contains("halving")) {
            const auto& h = v.at("halving");
            tr.halving.technology = h.value("technology", tr.halving.technology);
            tr.halving.from_year = h.contains("from_year") ? int_at(h, "from_year", "variants.halving")
                                                           : tr.halving.from_year;
            tr.halving.to_year = h.contains("to_year") ? int_at(h, "to_year", "variants.halving")
                                                       : tr.halving.to_year;
            tr.halving.final_factor = h.contains("final_factor")
                                          ? number_at(h, "final_factor", "variants.halving")
                                          : tr.halving.final_factor;
        }
    }
    if (j.contains("mitigation")) {
        tr.mitigation = parse_mitigation(j.at("mitigation"), "mitigation");
    }
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
        tr.snapshots[i].mix.ip.id = tr.snapshots[i].mix.ce.id = tr.label(i);
    }
    validate(tr);
    return tr;
}

ScenarioTrajectory load_trajectory(const std::filesystem::path& path) {
    const nlohmann::json j = read_json_file(path);
    try {
        return parse_trajectory(j);
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}:{}", path.string(), e.field()), e.message());
    }
}

ReferenceAnchor parse_anchor(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) {
        throw ConfigError("anchor", "expected an object");
    }
    if (!j.contains("model")) {
        throw ConfigError("model", "missing required field");
    }
    TwoAreaSystem model;
    if (j.at("model").is_string()) {
        std::filesystem::path p = j.at("model").get<std::string>();
        if (p.is_relative()) {
            p = base_dir / p;
        }
        model = load_system(p);
    } else {
        model = build_system(j.at("model"));
    }
    if (!j.contains("typical_h") || !j.at("typical_h").is_object()) {
        throw ConfigError("typical_h", "missing required field");
    }
    TypicalInertia typical;
    for (const auto& [tech, v] : j.at("typical_h").items()) {
        if (!v.is_number()) {
            throw ConfigError("typical_h." + tech, "expected a number");
        }
        typical.emplace(tech, v.get<double>());
    }
    if (!j.contains("mix")) {
        throw ConfigError("mix", "missing required field");
    }
    DispatchPair mix = parse_dispatch_pair(j.at("mix"), j.value("id", std::string("reference")), "mix");
    const bool scale_load = j.value("scale_load_inertia", false);
    return make_anchor(std::move(model), std::move(mix), std::move(typical), scale_load);
}

ReferenceAnchor load_anchor(const std::filesystem::path& path) {
    const nlohmann::json j = read_json_file(path);
    try {
        return parse_anchor(j, path.parent_path());
    } catch (const ConfigError& e) {
        if (e.field().starts_with(path.string())) {
            throw;
        }
        throw ConfigError(fmt::format("{}:{}", path.string(), e.field()), e.message());
    }
}

}  // namespace freqstab
