// freqstab: simulate, metrics, estimate, sweep.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "freqstab/estimation.hpp"
#include "freqstab/io.hpp"
#include "freqstab/metrics.hpp"
#include "freqstab/scenarios.hpp"
#include "freqstab/simulator.hpp"

namespace fs = std::filesystem;
using namespace freqstab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

fs::path default_out_dir() {
    if (const char* env = std::getenv("FREQSTAB_OUT_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return "freqstab-out";
}

struct DisturbanceFlags {
    double dp_gw = 1.0;
    std::string area = "ip";
    double t_start = 1.0;

    [[nodiscard]] Disturbance resolve(const SystemBase& base) const {
        Disturbance d;
        d.area = parse_area(area);
        d.dp = dp_gw / base.s_base;
        d.t_start = t_start;
        return d;
    }
    [[nodiscard]] nlohmann::json echo() const { return {{"dp_gw", dp_gw}, {"area", area}, {"t_start", t_start}}; }
};

struct SimFlags {
    SimConfig cfg;

    [[nodiscard]] nlohmann::json echo() const {
        return {{"dt", cfg.dt}, {"t_end", cfg.t_end}, {"sample_dt", cfg.sample_dt}};
    }
};

void add_disturbance_flags(CLI::App* app, DisturbanceFlags& f) {
    app->add_option("--dp-gw", f.dp_gw, "Lost generation, GW")->capture_default_str();
    app->add_option("--area", f.area, "Area of the outage (ip|ce)")->capture_default_str();
    app->add_option("--t-start", f.t_start, "Outage time, s")->capture_default_str();
}

void add_sim_flags(CLI::App* app, SimFlags& f) {
    app->add_option("--dt", f.cfg.dt, "Integration step, s")->capture_default_str();
    app->add_option("--t-end", f.cfg.t_end, "Horizon, s")->capture_default_str();
    app->add_option("--sample-dt", f.cfg.sample_dt, "Output sampling interval, s")->capture_default_str();
}

std::vector<MetricsRow> trace_metrics(const std::string& id, const FrequencyTrace& trace) {
    MetricsOptions opts;
    const double span = trace.empty() ? 0.0 : trace.t.back() - trace.t.front();
    opts.tail = std::chrono::duration<double>(std::min(opts.tail.count(), span));
    std::erase_if(opts.windows, [&](auto w) { return std::chrono::duration<double>(w).count() > span; });
    return {{id, AreaId::IP, compute_metrics(trace, AreaId::IP, opts), "ok"},
            {id, AreaId::CE, compute_metrics(trace, AreaId::CE, opts), "ok"}};
}

void print_metrics(const std::vector<MetricsRow>& rows) {
    for (const auto& r : rows) {
        if (!r.report) {
            fmt::print("{} {}: {}\n", r.scenario_id, to_string(r.area), r.status);
            continue;
        }
        const auto& m = *r.report;
        auto rocof = [&](int w) { return m.rocof.contains(w) ? format_number(m.rocof.at(w)) : std::string("-"); };
        fmt::print("{} {}: nadir {} Hz at {} s, rocof100 {} Hz/s, rocof500 {} Hz/s, f_ss {} Hz\n", r.scenario_id,
                   to_string(r.area), format_number(m.nadir_hz), format_number(m.t_nadir), rocof(100), rocof(500),
                   format_number(m.f_ss));
    }
}

FrequencyTrace checked_simulate(const TwoAreaSystem& sys, const Disturbance& dist, const SimConfig& cfg) {
    try {
        return simulate(sys, dist, cfg);
    } catch (const SimulationError& e) {
        throw NumericalFailure(fmt::format("simulation failed at t = {} s: {}", e.time(), e.what()));
    }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

struct SimulateCmd {
    fs::path model;
    fs::path out;
    std::string id = "reference";
    bool svg = false;
    DisturbanceFlags dist;
    SimFlags sim;

    int run() const {
        const auto t0 = std::chrono::steady_clock::now();
        const TwoAreaSystem sys = load_system(model);
        const Disturbance d = dist.resolve(sys.base);
        const FrequencyTrace trace = checked_simulate(sys, d, sim.cfg);
        for (const auto& w : trace.warnings) {
            fmt::print(stderr, "warning: {}\n", w);
        }
        const auto rows = trace_metrics(id, trace);
        write_trace_csv(out / "trace.csv", trace);
        write_metrics_csv(out / "metrics.csv", rows, false);
        std::vector<std::string> outputs{"trace.csv", "metrics.csv"};
        if (svg) {
            SvgChart chart{fmt::format("{} GW outage in {}", dist.dp_gw, to_string(d.area)), "t [s]", "f [Hz]",
                           {{"IP", trace.t, trace.f_ip}, {"CE", trace.t, trace.f_ce}}, 49.2};
            write_svg(out / "trace.svg", chart);
            outputs.emplace_back("trace.svg");
        }
        print_metrics(rows);
        RunManifest m;
        m.command = "simulate";
        m.inputs = {model};
        m.config = {{"disturbance", dist.echo()}, {"sim", sim.echo()}, {"id", id}};
        m.outputs = outputs;
        m.wall_clock_s = seconds_since(t0);
        write_manifest(out, m);
        return kExitOk;
    }
};

struct MetricsCmd {
    fs::path trace;
    fs::path out;
    std::string id = "trace";
    double f0 = 50.0;

    int run() const {
        const auto t0 = std::chrono::steady_clock::now();
        const FrequencyTrace tr = read_trace_csv(trace, f0);
        const auto rows = trace_metrics(id, tr);
        write_metrics_csv(out / "metrics.csv", rows, false);
        print_metrics(rows);
        RunManifest m;
        m.command = "metrics";
        m.inputs = {trace};
        m.config = {{"id", id}, {"f0", f0}};
        m.outputs = {"metrics.csv"};
        m.wall_clock_s = seconds_since(t0);
        write_manifest(out, m);
        return kExitOk;
    }
};

struct EstimateCmd {
    fs::path event;
    std::optional<fs::path> sidecar;
    fs::path model;
    fs::path out;
    std::string stage = "both";
    std::string tg_mode = "shared";
    PsoConfig pso;
    double sample_dt = 0.01;
    double dt = 0.005;

    int run() const {
        const auto t0 = std::chrono::steady_clock::now();
        const TwoAreaSystem structure = load_system(model);
        const RecordedEvent ev = load_event(event, sidecar, structure.base, sample_dt);
        if (is_flat_event(ev)) {
            throw ConfigError(event.string(),
                              "event is unidentifiable: no disturbance or the recorded frequencies never move");
        }
        EstimationOptions options;
        options.sim.dt = dt;
        options.tg_mode = tg_mode == "per-technology" ? ModelTemplate::TgMode::PerTechnology
                                                      : ModelTemplate::TgMode::Shared;
        const ModelTemplate full = ModelTemplate::full(structure, options.tg_mode);

        std::vector<std::string> outputs;
        std::optional<EstimationResult> reduced;
        std::optional<std::vector<double>> init;
        if (stage == "reduced" || stage == "both") {
            reduced = estimate_reduced(ev, structure, pso, options);
            check(*reduced);
            const ModelTemplate tmpl = ModelTemplate::reduced(structure);
            write_estimate(out / "reduced_params.json", tmpl.instantiate(reduced->best_params.values), *reduced);
            write_cost_log(out / "reduced_cost.csv", reduced->cost_history);
            outputs.insert(outputs.end(), {"reduced_params.json", "reduced_cost.csv"});
            report("reduced", *reduced);
        }
        if (stage == "full" || stage == "both") {
            if (reduced) {
                init = allocate_droops(*reduced, ev.mix, full, options);
            } else {
                init = full.extract(structure);
                const ParamSpace space = full.space(options.bounds, options.penalties);
                for (std::size_t i = 0; i < init->size(); ++i) {
                    (*init)[i] = std::clamp((*init)[i], space.entries[i].lower, space.entries[i].upper);
                }
            }
            const EstimationResult res = estimate_full(ev, full, *init, pso, options);
            check(res);
            if (reduced) {
                const double start = penalized_cost(*init, ev, full, full.space(options.bounds, options.penalties),
                                                    options.sim);
                fmt::print("full stage: start cost from the reduced fit {}\n", format_number(start));
            }
            write_estimate(out / "full_params.json", full.instantiate(res.best_params.values), res);
            write_cost_log(out / "full_cost.csv", res.cost_history);
            outputs.insert(outputs.end(), {"full_params.json", "full_cost.csv"});
            report("full", res);
        }
        RunManifest m;
        m.command = "estimate";
        m.inputs = {event, sidecar.value_or(fs::path(event).replace_extension(".json")), model};
        m.seeds = {{"rng_seed", pso.rng_seed}, {"chaos_seed", pso.chaos_seed}};
        m.config = {{"stage", stage},         {"tg_mode", tg_mode},     {"swarm", pso.swarm_size},
                    {"iters", pso.max_iters}, {"c1", pso.c1},           {"c2", pso.c2},
                    {"w_max", pso.w_max},     {"w_min", pso.w_min},     {"sample_dt", sample_dt},
                    {"dt", dt}};
        m.outputs = outputs;
        m.wall_clock_s = seconds_since(t0);
        write_manifest(out, m);
        return kExitOk;
    }

    static void check(const EstimationResult& r) {
        if (r.unidentifiable) {
            throw NumericalFailure("event is unidentifiable: the cost surface is flat over the initial swarm");
        }
        if (r.best_cost >= kDivergenceCost) {
            throw NumericalFailure("every candidate diverged");
        }
    }

    static void report(const std::string& stage, const EstimationResult& r) {
        fmt::print("{} stage: best cost {} after {} evaluations\n", stage, format_number(r.best_cost),
                   r.evaluations);
        for (std::size_t i = 0; i < r.best_params.size(); ++i) {
            fmt::print("  {} = {}\n", r.best_params.names[i], format_number(r.best_params.values[i]));
        }
        if (r.active_penalties.empty()) {
            fmt::print("  no plausibility penalty active\n");
        } else {
            for (const auto& p : r.active_penalties) {
                fmt::print("  penalty active: {}\n", p);
            }
        }
    }
};

struct SweepCmd {
    fs::path anchor;
    fs::path trajectory;
    fs::path out;
    bool halve_small_steam = false;
    bool with_sc = false;
    bool svg = false;
    std::size_t threads = 0;
    DisturbanceFlags dist;
    SimFlags sim;

    int run() const {
        const auto t0 = std::chrono::steady_clock::now();
        const ReferenceAnchor a = load_anchor(anchor);
        ScenarioTrajectory tr = load_trajectory(trajectory);
        tr.small_steam_halving = tr.small_steam_halving || halve_small_steam;
        tr.with_mitigation = tr.with_mitigation || with_sc;
        const Disturbance d = dist.resolve(a.params_o.base);

        const auto rows = sweep(a, tr, d, sim.cfg, {.metrics = {}, .threads = threads});
        const std::string stem = tr.variant_name();
        const std::string metrics_name = stem + "_metrics.csv";
        const std::string plot_name = stem + "_plot.csv";
        write_metrics_csv(out / metrics_name, metrics_rows(rows), true);
        write_sweep_plot_csv(out / plot_name, rows);
        std::vector<std::string> outputs{metrics_name, plot_name};
        if (svg) {
            SvgSeries nadir{"IP nadir", {}, {}};
            SvgSeries rocof{"IP rocof100", {}, {}};
            for (const auto& r : rows) {
                if (!r.ip) continue;
                const double x = r.year + (r.month ? (*r.month - 1) / 12.0 : 0.0);
                nadir.x.push_back(x);
                nadir.y.push_back(r.ip->nadir_hz);
                rocof.x.push_back(x);
                rocof.y.push_back(r.ip->rocof.at(100));
            }
            write_svg(out / (stem + "_nadir.svg"), {stem + ": frequency nadir", "year", "Hz", {nadir}, 49.2});
            write_svg(out / (stem + "_rocof.svg"), {stem + ": RoCoF 100 ms", "year", "Hz/s", {rocof}, 1.0});
            outputs.insert(outputs.end(), {stem + "_nadir.svg", stem + "_rocof.svg"});
        }
        std::size_t failed = 0;
        for (const auto& r : rows) {
            if (!r.ok()) {
                ++failed;
                fmt::print(stderr, "{}: {}\n", r.scenario_id, r.status);
            }
        }
        fmt::print("{}: {} snapshots, {} failed, written to {}\n", stem, rows.size(), failed,
                   (out / metrics_name).string());

        RunManifest m;
        m.command = "sweep";
        m.inputs = {anchor, trajectory};
        m.config = {{"disturbance", dist.echo()},
                    {"sim", sim.echo()},
                    {"halve_small_steam", tr.small_steam_halving},
                    {"with_sc", tr.with_mitigation}};
        m.outputs = outputs;
        m.wall_clock_s = seconds_since(t0);
        write_manifest(out, m);
        return kExitOk;
    }
};

struct SynthCmd {
    fs::path anchor;
    fs::path out;
    double noise_mhz = 1.0;
    std::uint64_t seed = 1;
    double t_end = 30.0;
    DisturbanceFlags dist;

    int run() const {
        const ReferenceAnchor a = load_anchor(anchor);
        const Disturbance d = dist.resolve(a.params_o.base);
        SimConfig cfg;
        cfg.t_end = t_end;
        FrequencyTrace trace = checked_simulate(a.params_o, d, cfg);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, noise_mhz * 1e-3);
        for (std::size_t k = 0; k < trace.size(); ++k) {
            trace.f_ip[k] += noise(rng);
            trace.f_ce[k] += noise(rng);
        }
        write_event(out, trace, {d.area, dist.dp_gw * 1000.0, d.t_start, a.mix_o});
        fmt::print("wrote {} samples to {}\n", trace.size(), out.string());
        return kExitOk;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-area frequency stability toolchain"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1);

    SimulateCmd simulate_cmd;
    auto* sim = app.add_subcommand("simulate", "Simulate a generation outage");
    sim->add_option("--model", simulate_cmd.model, "Model file (JSON)")->required()->check(CLI::ExistingFile);
    sim->add_option("--id", simulate_cmd.id, "Scenario id in the metrics file")->capture_default_str();
    sim->add_flag("--svg", simulate_cmd.svg, "Also write an SVG chart");
    add_disturbance_flags(sim, simulate_cmd.dist);
    add_sim_flags(sim, simulate_cmd.sim);

    MetricsCmd metrics_cmd;
    auto* met = app.add_subcommand("metrics", "Nadir, RoCoF and steady state of a trace");
    met->add_option("--trace", metrics_cmd.trace, "Trace CSV (t,f_ip,f_ce[,p_tie])")->required()->check(CLI::ExistingFile);
    met->add_option("--id", metrics_cmd.id, "Scenario id in the metrics file")->capture_default_str();
    met->add_option("--f0", metrics_cmd.f0, "Nominal frequency, Hz")->capture_default_str();

    EstimateCmd estimate_cmd;
    auto* est = app.add_subcommand("estimate", "Calibrate the model from a recorded outage");
    est->add_option("--event", estimate_cmd.event, "Recorded CSV (t,f_ip,f_ce)")->required()->check(CLI::ExistingFile);
    est->add_option("--sidecar", estimate_cmd.sidecar, "Disturbance and dispatch (JSON); defaults to <event>.json");
    est->add_option("--model", estimate_cmd.model, "Model structure and starting values (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    est->add_option("--stage", estimate_cmd.stage, "reduced, full or both")
        ->check(CLI::IsMember({"reduced", "full", "both"}))
        ->capture_default_str();
    est->add_option("--tg-mode", estimate_cmd.tg_mode, "shared or per-technology")
        ->check(CLI::IsMember({"shared", "per-technology"}))
        ->capture_default_str();
    est->add_option("--seed", estimate_cmd.pso.rng_seed, "Random seed")->capture_default_str();
    est->add_option("--chaos-seed", estimate_cmd.pso.chaos_seed, "Logistic map start value")->capture_default_str();
    est->add_option("--swarm", estimate_cmd.pso.swarm_size, "Particles")->capture_default_str();
    est->add_option("--iters", estimate_cmd.pso.max_iters, "Iterations")->capture_default_str();
    est->add_option("--threads", estimate_cmd.pso.threads, "Worker threads (0 = all cores)")->capture_default_str();
    est->add_option("--sample-dt", estimate_cmd.sample_dt, "Resampling interval, s")->capture_default_str();
    est->add_option("--dt", estimate_cmd.dt, "Integration step, s")->capture_default_str();

    SweepCmd sweep_cmd;
    auto* swp = app.add_subcommand("sweep", "Simulate the reference outage over a scenario trajectory");
    swp->add_option("--anchor", sweep_cmd.anchor, "Reference anchor (JSON)")->required()->check(CLI::ExistingFile);
    swp->add_option("--trajectory", sweep_cmd.trajectory, "Scenario trajectory (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    swp->add_flag("--halve-small-steam", sweep_cmd.halve_small_steam, "Halve small steam turbines towards 2040");
    swp->add_flag("--with-sc", sweep_cmd.with_sc, "Add the synchronous condensers of the trajectory file");
    swp->add_flag("--svg", sweep_cmd.svg, "Also write SVG charts");
    swp->add_option("--threads", sweep_cmd.threads, "Worker threads (0 = all cores)")->capture_default_str();
    add_disturbance_flags(swp, sweep_cmd.dist);
    add_sim_flags(swp, sweep_cmd.sim);

    SynthCmd synth_cmd;
    auto* syn = app.add_subcommand("synth-event", "Write a noisy event recording simulated from an anchor");
    syn->add_option("--anchor", synth_cmd.anchor, "Reference anchor (JSON)")->required()->check(CLI::ExistingFile);
    syn->add_option("--csv", synth_cmd.out, "Output CSV; the sidecar goes next to it")->required();
    syn->add_option("--noise-mhz", synth_cmd.noise_mhz, "Gaussian noise standard deviation, mHz")
        ->capture_default_str();
    syn->add_option("--seed", synth_cmd.seed, "Noise seed")->capture_default_str();
    syn->add_option("--t-end", synth_cmd.t_end, "Recording length, s")->capture_default_str();
    add_disturbance_flags(syn, synth_cmd.dist);

    fs::path out = default_out_dir();
    for (auto* sub : {sim, met, est, swp}) {
        sub->add_option("--out", out, "Output directory (default $FREQSTAB_OUT_DIR or ./freqstab-out)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*sim) {
            simulate_cmd.out = out;
            return simulate_cmd.run();
        }
        if (*met) {
            metrics_cmd.out = out;
            return metrics_cmd.run();
        }
        if (*est) {
            estimate_cmd.out = out;
            return estimate_cmd.run();
        }
        if (*swp) {
            sweep_cmd.out = out;
            return sweep_cmd.run();
        }
        if (*syn) {
            return synth_cmd.run();
        }
    } catch (const NumericalFailure& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitNumerical;
    } catch (const SimulationError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitValidation;
    }
    return kExitValidation;
}
