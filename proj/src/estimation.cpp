#include "freqstab/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

namespace freqstab {

namespace {

constexpr std::string_view kEquivalentBlock = "equivalent";

template <typename F>
void for_each_governor(TwoAreaSystem& sys, F&& f) {
    for (AreaId id : {AreaId::IP, AreaId::CE}) {
        for (auto& b : sys.area(id).blocks) {
            if (b.governor) {
                f(*b.governor);
            }
        }
    }
}

const GovernorParams* first_governor(const TwoAreaSystem& sys, std::optional<TechnologyKind> kind = std::nullopt) {
    for (AreaId id : {AreaId::IP, AreaId::CE}) {
        for (const auto& b : sys.area(id).blocks) {
            if (b.governor && (!kind || b.governor->kind() == *kind)) {
                return &*b.governor;
            }
        }
    }
    return nullptr;
}

void strip_decomposition(TwoAreaSystem& sys) {
    for (AreaId id : {AreaId::IP, AreaId::CE}) {
        auto& area = sys.area(id);
        area.h_load.reset();
        for (auto& b : area.blocks) {
            b.h_contrib = 0.0;
        }
    }
}

std::vector<ModelTemplate::Binding> area_scalars() {
    std::vector<ModelTemplate::Binding> out;
    for (AreaId id : {AreaId::CE, AreaId::IP}) {
        out.push_back({fmt::format("H_{}", to_string(id)), ParamCategory::Inertia,
                       [id](TwoAreaSystem& s, double v) { s.area(id).h = v; },
                       [id](const TwoAreaSystem& s) { return s.area(id).h; }});
    }
    for (AreaId id : {AreaId::CE, AreaId::IP}) {
        out.push_back({fmt::format("D_{}", to_string(id)), ParamCategory::Damping,
                       [id](TwoAreaSystem& s, double v) { s.area(id).d = v; },
                       [id](const TwoAreaSystem& s) { return s.area(id).d; }});
    }
    return out;
}

ModelTemplate::Binding droop_binding(std::string name, AreaId id, std::string block) {
    return {std::move(name), ParamCategory::Droop,
            [id, block](TwoAreaSystem& s, double v) { s.area(id).find_block(block)->governor->r = v; },
            [id, block](const TwoAreaSystem& s) { return s.area(id).find_block(block)->governor->r; }};
}

ModelTemplate::Binding tie_binding() {
    return {"T", ParamCategory::Synchronizing, [](TwoAreaSystem& s, double v) { s.tie.t_coeff = v; },
            [](const TwoAreaSystem& s) { return s.tie.t_coeff; }};
}

ModelTemplate::Binding shared_tg_binding() {
    return {"Tg", ParamCategory::GovernorTime,
            [](TwoAreaSystem& s, double v) { for_each_governor(s, [v](GovernorParams& g) { g.tg = v; }); },
            [](const TwoAreaSystem& s) {
                const GovernorParams* g = first_governor(s);
                return g ? g->tg : 0.0;
            }};
}

void check_event(const RecordedEvent& event) {
    const FrequencyTrace& tr = event.trace;
    if (tr.size() < 2 || tr.f_ip.size() != tr.size() || tr.f_ce.size() != tr.size()) {
        throw std::invalid_argument("recorded event needs both area traces on a shared grid of at least two samples");
    }
    if (!(tr.sample_dt > 0.0)) {
        throw std::invalid_argument("recorded event has a nonpositive sampling interval");
    }
    const double first = tr.t.front() / tr.sample_dt;
    if (tr.t.front() < 0.0 || std::abs(first - std::round(first)) > 1e-6) {
        throw std::invalid_argument("recorded grid must start at a nonnegative multiple of its sampling interval");
    }
}

}  // namespace

Range BoundsConfig::of(ParamCategory c) const {
    switch (c) {
    case ParamCategory::Inertia: return h;
    case ParamCategory::Damping: return d;
    case ParamCategory::Droop: return r;
    case ParamCategory::TransientDroop: return rt;
    case ParamCategory::GovernorTime: return tg;
    case ParamCategory::Synchronizing: return t;
    }
    return h;
}

std::string ModelTemplate::droop_name(std::string_view block, AreaId area) {
    return fmt::format("R_{}_{}", block, to_string(area));
}

std::string ModelTemplate::transient_droop_name(std::string_view block, AreaId area) {
    return fmt::format("Rt_{}_{}", block, to_string(area));
}

ModelTemplate ModelTemplate::full(const TwoAreaSystem& structure, TgMode tg_mode) {
    TwoAreaSystem base = structure;
    strip_decomposition(base);

    std::vector<Binding> bindings = area_scalars();
    for (AreaId id : {AreaId::CE, AreaId::IP}) {
        for (const auto& b : base.area(id).blocks) {
            if (b.provides_fcr()) {
                bindings.push_back(droop_binding(droop_name(b.name, id), id, b.name));
            }
        }
    }
    for (AreaId id : {AreaId::CE, AreaId::IP}) {
        for (const auto& b : base.area(id).blocks) {
            if (b.provides_fcr() && b.kind == TechnologyKind::HydroClassic) {
                const std::string block = b.name;
                bindings.push_back(
                    {transient_droop_name(block, id), ParamCategory::TransientDroop,
                     [id, block](TwoAreaSystem& s, double v) {
                         std::get<HydroClassicParams>(s.area(id).find_block(block)->governor->turbine).rt = v;
                     },
                     [id, block](const TwoAreaSystem& s) {
                         return std::get<HydroClassicParams>(s.area(id).find_block(block)->governor->turbine).rt;
                     }});
            }
        }
    }
    bindings.push_back(tie_binding());
    if (tg_mode == TgMode::Shared) {
        bindings.push_back(shared_tg_binding());
    } else {
        for (auto kind : {TechnologyKind::SteamTgov1, TechnologyKind::GasGast, TechnologyKind::HydroClassic}) {
            if (!first_governor(base, kind)) {
                continue;
            }
            bindings.push_back({fmt::format("Tg_{}", to_string(kind)), ParamCategory::GovernorTime,
                                [kind](TwoAreaSystem& s, double v) {
                                    for_each_governor(s, [&](GovernorParams& g) {
                                        if (g.kind() == kind) g.tg = v;
                                    });
                                },
                                [kind](const TwoAreaSystem& s) { return first_governor(s, kind)->tg; }});
        }
    }
    return ModelTemplate(std::move(base), std::move(bindings));
}

ModelTemplate ModelTemplate::reduced(const TwoAreaSystem& structure) {
    TwoAreaSystem base = structure;
    strip_decomposition(base);

    SteamTgov1Params steam;
    if (const GovernorParams* g = first_governor(structure, TechnologyKind::SteamTgov1)) {
        steam = std::get<SteamTgov1Params>(g->turbine);
    }
    const GovernorParams* any = first_governor(structure);
    const double tg = any ? any->tg : 0.4;

    for (AreaId id : {AreaId::IP, AreaId::CE}) {
        auto& area = base.area(id);
        GenerationBlock eq;
        eq.name = std::string(kEquivalentBlock);
        eq.kind = TechnologyKind::SteamTgov1;
        eq.fcr_enabled = true;
        double gain = 0.0;
        std::set<std::string> techs;
        for (const auto& b : area.blocks) {
            if (b.provides_fcr()) {
                gain += 1.0 / b.governor->r;
                eq.pg += b.pg;
                techs.insert(b.technologies.begin(), b.technologies.end());
            }
        }
        eq.technologies.assign(techs.begin(), techs.end());
        if (eq.technologies.empty()) {
            eq.technologies = {eq.name};
        }
        eq.governor = GovernorParams{gain > 0.0 ? 1.0 / gain : 0.05, tg, steam};
        area.blocks = {eq};
    }

    std::vector<Binding> bindings = area_scalars();
    for (AreaId id : {AreaId::CE, AreaId::IP}) {
        bindings.push_back(
            droop_binding(fmt::format("R_{}", to_string(id)), id, std::string(kEquivalentBlock)));
    }
    bindings.push_back(shared_tg_binding());
    bindings.push_back(tie_binding());
    return ModelTemplate(std::move(base), std::move(bindings));
}

std::vector<std::string> ModelTemplate::names() const {
    std::vector<std::string> out;
    out.reserve(bindings_.size());
    for (const auto& b : bindings_) {
        out.push_back(b.name);
    }
    return out;
}

TwoAreaSystem ModelTemplate::instantiate(std::span<const double> params) const {
    if (params.size() != bindings_.size()) {
        throw std::invalid_argument(
            fmt::format("template expects {} parameters, got {}", bindings_.size(), params.size()));
    }
    TwoAreaSystem sys = structure_;
    for (std::size_t i = 0; i < params.size(); ++i) {
        bindings_[i].set(sys, params[i]);
    }
    validate(sys, Validation::Relaxed);
    return sys;
}

std::vector<double> ModelTemplate::extract(const TwoAreaSystem& system) const {
    std::vector<double> out;
    out.reserve(bindings_.size());
    for (const auto& b : bindings_) {
        out.push_back(b.get(system));
    }
    return out;
}

ParamSpace ModelTemplate::space(const BoundsConfig& bounds, const PenaltyConfig& penalties) const {
    ParamSpace space;
    for (const auto& b : bindings_) {
        const Range r = bounds.of(b.category);
        space.entries.push_back({b.name, r.lower, r.upper});
    }
    auto band = [](double value, Range r) { return value < r.lower ? r.lower - value : std::max(0.0, value - r.upper); };

    for (std::size_t i = 0; i < bindings_.size(); ++i) {
        const Binding& b = bindings_[i];
        if (b.category == ParamCategory::Inertia) {
            space.penalties.push_back({b.name + " within plausible band", penalties.weight,
                                       [i, band, r = penalties.h_band](std::span<const double> x) {
                                           return band(x[i], r);
                                       }});
        } else if (b.category == ParamCategory::Synchronizing) {
            space.penalties.push_back({b.name + " within plausible band", penalties.weight,
                                       [i, band, r = penalties.t_band](std::span<const double> x) {
                                           return band(x[i], r);
                                       }});
        } else if (b.category == ParamCategory::TransientDroop && penalties.transient_droop) {
            // Rt_<block>_<AREA> pairs with R_<block>_<AREA>.
            const std::string droop = "R" + b.name.substr(2);
            for (std::size_t j = 0; j < bindings_.size(); ++j) {
                if (bindings_[j].name == droop) {
                    space.penalties.push_back({b.name + " >= " + droop, penalties.weight,
                                               [i, j](std::span<const double> x) { return std::max(0.0, x[j] - x[i]); }});
                }
            }
        }
    }
    return space;
}

SimConfig objective_sim_config(const RecordedEvent& event, const SimConfig& base) {
    check_event(event);
    SimConfig cfg;
    cfg.sample_dt = event.trace.sample_dt;
    const double substeps = std::max(1.0, std::ceil(cfg.sample_dt / base.dt - 1e-9));
    cfg.dt = cfg.sample_dt / substeps;
    cfg.t_end = std::round(event.trace.t.back() / cfg.sample_dt) * cfg.sample_dt;
    return cfg;
}

double objective(std::span<const double> params, const RecordedEvent& event, const ModelTemplate& tmpl,
                 const SimConfig& sim) {
    const SimConfig cfg = objective_sim_config(event, sim);
    FrequencyTrace model;
    try {
        model = simulate(tmpl.instantiate(params), event.dist, cfg);
    } catch (const SimulationError&) {
        return kDivergenceCost;
    } catch (const ConfigError&) {
        return kDivergenceCost;
    }
    const auto offset = static_cast<std::size_t>(std::llround(event.trace.t.front() / cfg.sample_dt));
    const std::size_t n = event.trace.size();
    if (offset + n > model.size()) {
        throw std::logic_error("model trace shorter than the recorded grid");
    }
    double sum_ip = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double e = event.trace.f_ip[k] - model.f_ip[offset + k];
        sum_ip += e * e;
    }
    double sum_ce = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double e = event.trace.f_ce[k] - model.f_ce[offset + k];
        sum_ce += e * e;
    }
    const double cost = sum_ip + sum_ce;
    return std::isfinite(cost) ? std::min(cost, kDivergenceCost) : kDivergenceCost;
}

double penalized_cost(std::span<const double> params, const RecordedEvent& event, const ModelTemplate& tmpl,
                      const ParamSpace& space, const SimConfig& sim) {
    return objective(params, event, tmpl, sim) + space.penalty(params);
}

bool is_flat_event(const RecordedEvent& event) {
    if (event.dist.dp == 0.0) {
        return true;
    }
    const FrequencyTrace& tr = event.trace;
    if (tr.empty()) {
        return true;
    }
    double spread = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        spread = std::max({spread, std::abs(tr.f_ip[k] - tr.f_ip[0]), std::abs(tr.f_ce[k] - tr.f_ce[0])});
    }
    return spread <= 1e-6;
}

namespace {

EstimationResult run_stage(const RecordedEvent& event, const ModelTemplate& tmpl, const PsoConfig& cfg,
                           const EstimationOptions& options, const std::optional<SwarmSeed>& seed) {
    check_event(event);
    const ParamSpace space = tmpl.space(options.bounds, options.penalties);
    if (seed && !space.contains(seed->center)) {
        throw std::invalid_argument("initial parameters lie outside the parameter bounds");
    }
    const SimConfig sim = options.sim;
    auto cost = [&](std::span<const double> x) { return penalized_cost(x, event, tmpl, space, sim); };
    EstimationResult result = pso_optimize(space, cfg, cost, seed);
    const double spread = result.initial_cost_max - result.initial_cost_min;
    result.unidentifiable =
        is_flat_event(event) || spread <= 1e-12 * std::max(1.0, std::abs(result.initial_cost_max));
    return result;
}

}  // namespace

EstimationResult estimate_reduced(const RecordedEvent& event, const TwoAreaSystem& structure, const PsoConfig& cfg,
                                  const EstimationOptions& options) {
    return run_stage(event, ModelTemplate::reduced(structure), cfg, options, std::nullopt);
}

std::vector<double> split_droop(double r_area, std::span<const double> dispatch) {
    if (!(r_area > 0.0)) {
        throw std::invalid_argument("area droop must be positive");
    }
    double total = 0.0;
    for (double p : dispatch) {
        if (!(p >= 0.0)) {
            throw std::invalid_argument("dispatch must be nonnegative");
        }
        total += p;
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument("zero reserve-providing dispatch in area");
    }
    std::vector<double> out;
    out.reserve(dispatch.size());
    for (double p : dispatch) {
        out.push_back(p > 0.0 ? r_area * total / p : std::numeric_limits<double>::infinity());
    }
    return out;
}

std::vector<double> allocate_droops(const EstimationResult& reduced, const DispatchPair& mix, const ModelTemplate& full,
                                    const EstimationOptions& options) {
    const std::vector<std::string> names = full.names();
    std::vector<double> init(names.size(), std::numeric_limits<double>::quiet_NaN());
    auto set = [&](const std::string& name, double value) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == name) {
                init[i] = value;
                return;
            }
        }
    };

    for (std::string_view shared : {"H_CE", "H_IP", "D_CE", "D_IP", "T"}) {
        set(std::string(shared), reduced.best_params.at(shared));
    }
    const double tg = reduced.best_params.at("Tg");
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == "Tg" || names[i].starts_with("Tg_")) {
            init[i] = tg;
        }
    }

    for (AreaId id : {AreaId::IP, AreaId::CE}) {
        const double r_area = reduced.best_params.at(fmt::format("R_{}", to_string(id)));
        std::vector<const GenerationBlock*> blocks;
        std::vector<double> dispatch;
        for (const auto& b : full.structure().area(id).blocks) {
            if (b.provides_fcr()) {
                blocks.push_back(&b);
                dispatch.push_back(mix.area(id).generation(b));
            }
        }
        std::vector<double> droops;
        try {
            droops = split_droop(r_area, dispatch);
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument(
                fmt::format("zero reserve-providing dispatch in area {} at the event", to_string(id)));
        }
        for (std::size_t k = 0; k < blocks.size(); ++k) {
            set(ModelTemplate::droop_name(blocks[k]->name, id), droops[k]);
            if (blocks[k]->kind == TechnologyKind::HydroClassic) {
                set(ModelTemplate::transient_droop_name(blocks[k]->name, id),
                    options.transient_droop_ratio * droops[k]);
            }
        }
    }

    for (std::size_t i = 0; i < names.size(); ++i) {
        const Range r = options.bounds.of(full.bindings()[i].category);
        if (std::isnan(init[i])) {
            throw std::logic_error(fmt::format("no initial value for parameter '{}'", names[i]));
        }
        init[i] = std::clamp(init[i], r.lower, r.upper);
    }
    return init;
}

EstimationResult estimate_full(const RecordedEvent& event, const ModelTemplate& full, std::span<const double> init,
                               const PsoConfig& cfg, const EstimationOptions& options) {
    SwarmSeed seed{std::vector<double>(init.begin(), init.end()), options.seed_fraction, options.seed_jitter};
    return run_stage(event, full, cfg, options, seed);
}

}  // namespace freqstab
