#include "freqstab/pso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace freqstab {

namespace {

// mt19937_64 output is fixed by the standard; the distributions are not, so
// they are derived here to keep runs reproducible across standard libraries.
class Random {
public:
    explicit Random(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double gaussian() {
        if (spare_) {
            const double v = *spare_;
            spare_.reset();
            return v;
        }
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        spare_ = radius * std::sin(2.0 * std::numbers::pi * u2);
        return radius * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

double sanitize(double cost) { return std::isnan(cost) ? std::numeric_limits<double>::infinity() : cost; }

void evaluate_all(const CostFn& cost, const std::vector<std::vector<double>>& positions, std::vector<double>& out,
                  std::size_t threads) {
    const std::size_t n = positions.size();
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = sanitize(cost(positions[i]));
        }
        return;
    }
    threads = std::min(threads, n);
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += threads) {
                out[i] = sanitize(cost(positions[i]));
            }
        });
    }
}

}  // namespace

std::vector<std::string> ParamSpace::names() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) {
        out.push_back(e.name);
    }
    return out;
}

std::size_t ParamSpace::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].name == name) {
            return i;
        }
    }
    throw std::out_of_range(fmt::format("unknown parameter '{}'", name));
}

bool ParamSpace::contains(std::span<const double> x) const {
    if (x.size() != entries.size()) {
        return false;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= entries[i].lower && x[i] <= entries[i].upper)) {
            return false;
        }
    }
    return true;
}

double ParamSpace::penalty(std::span<const double> x) const {
    double total = 0.0;
    for (const auto& p : penalties) {
        total += p.weight * p.violation(x);
    }
    return total;
}

std::vector<std::string> ParamSpace::active_penalties(std::span<const double> x) const {
    std::vector<std::string> out;
    for (const auto& p : penalties) {
        if (p.violation(x) > 0.0) {
            out.push_back(p.name);
        }
    }
    return out;
}

void ParamSpace::validate() const {
    if (entries.empty()) {
        throw std::invalid_argument("parameter space is empty");
    }
    for (const auto& e : entries) {
        if (!(e.lower < e.upper)) {
            throw std::invalid_argument(fmt::format("parameter '{}': lower bound must be below upper bound", e.name));
        }
    }
    for (const auto& p : penalties) {
        if (!(p.weight > 0.0)) {
            throw std::invalid_argument(fmt::format("penalty '{}': weight must be positive", p.name));
        }
        if (!p.violation) {
            throw std::invalid_argument(fmt::format("penalty '{}': missing predicate", p.name));
        }
    }
}

double NamedParams::at(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) {
            return values[i];
        }
    }
    throw std::out_of_range(fmt::format("unknown parameter '{}'", name));
}

void validate(const PsoConfig& cfg) {
    if (cfg.swarm_size < 10) {
        throw std::invalid_argument("swarm_size must be at least 10");
    }
    if (!(cfg.w_max > cfg.w_min && cfg.w_min > 0.0)) {
        throw std::invalid_argument("inertia weights need w_max > w_min > 0");
    }
    if (!(cfg.c1 >= 0.0 && cfg.c2 >= 0.0)) {
        throw std::invalid_argument("acceleration coefficients must be nonnegative");
    }
    // 0.25, 0.5 and 0.75 fall onto fixed points of the logistic map.
    const double z = cfg.chaos_seed;
    if (!(z > 0.0 && z < 1.0) || z == 0.25 || z == 0.5 || z == 0.75) {
        throw std::invalid_argument("chaos_seed must lie in (0, 1) away from 0.25, 0.5 and 0.75");
    }
    if (!(cfg.velocity_limit > 0.0)) {
        throw std::invalid_argument("velocity_limit must be positive");
    }
    if (!(cfg.stop_tol >= 0.0)) {
        throw std::invalid_argument("stop_tol must be nonnegative");
    }
}

std::vector<double> chaotic_inertia_weights(const PsoConfig& cfg) {
    std::vector<double> w;
    w.reserve(cfg.max_iters);
    double z = cfg.chaos_seed;
    const auto iters = static_cast<double>(cfg.max_iters);
    for (std::size_t k = 0; k < cfg.max_iters; ++k) {
        w.push_back((cfg.w_max - cfg.w_min) * (iters - static_cast<double>(k)) / iters * z + cfg.w_min);
        z = 4.0 * z * (1.0 - z);
        if (!(z > 0.0 && z < 1.0)) {
            z = cfg.chaos_seed;  // the orbit collapsed onto 0 or 1 through rounding
        }
    }
    return w;
}

EstimationResult pso_optimize(const ParamSpace& space, const PsoConfig& cfg, const CostFn& cost,
                              const std::optional<SwarmSeed>& seed) {
    validate(cfg);
    space.validate();
    const std::size_t dim = space.size();
    const std::size_t swarm = cfg.swarm_size;
    if (seed && seed->center.size() != dim) {
        throw std::invalid_argument("swarm seed dimension does not match the parameter space");
    }
    const std::size_t threads =
        cfg.threads == 0 ? std::max<std::size_t>(1, std::thread::hardware_concurrency()) : cfg.threads;

    Random rng(cfg.rng_seed);
    std::vector<double> lo(dim), hi(dim), vmax(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        lo[d] = space.entries[d].lower;
        hi[d] = space.entries[d].upper;
        vmax[d] = cfg.velocity_limit * (hi[d] - lo[d]);
    }

    std::vector<std::vector<double>> x(swarm, std::vector<double>(dim));
    std::vector<std::vector<double>> v(swarm, std::vector<double>(dim));
    const std::size_t seeded =
        seed ? std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(seed->fraction * swarm)), 1, swarm) : 0;
    for (std::size_t i = 0; i < swarm; ++i) {
        for (std::size_t d = 0; d < dim; ++d) {
            if (i < seeded) {
                const double c = std::clamp(seed->center[d], lo[d], hi[d]);
                x[i][d] = i == 0 ? c : std::clamp(c + seed->jitter * (hi[d] - lo[d]) * rng.gaussian(), lo[d], hi[d]);
            } else {
                x[i][d] = rng.uniform(lo[d], hi[d]);
            }
            v[i][d] = rng.uniform(-0.5, 0.5) * vmax[d];
        }
    }

    std::vector<double> f(swarm);
    evaluate_all(cost, x, f, threads);

    EstimationResult result;
    result.rng_seed = cfg.rng_seed;
    result.chaos_seed = cfg.chaos_seed;
    result.evaluations = swarm;
    result.initial_cost_min = *std::min_element(f.begin(), f.end());
    result.initial_cost_max = *std::max_element(f.begin(), f.end());

    std::vector<std::vector<double>> pbest = x;
    std::vector<double> pbest_cost = f;
    std::size_t g = 0;
    for (std::size_t i = 1; i < swarm; ++i) {
        if (pbest_cost[i] < pbest_cost[g]) {
            g = i;
        }
    }
    std::vector<double> gbest = pbest[g];
    double gbest_cost = pbest_cost[g];
    result.cost_history.push_back(gbest_cost);

    const std::vector<double> weights = chaotic_inertia_weights(cfg);
    for (std::size_t k = 0; k < cfg.max_iters; ++k) {
        const double w = weights[k];
        for (std::size_t i = 0; i < swarm; ++i) {
            for (std::size_t d = 0; d < dim; ++d) {
                const double r1 = rng.uniform();
                const double r2 = rng.uniform();
                double vel = w * v[i][d] + cfg.c1 * r1 * (pbest[i][d] - x[i][d]) + cfg.c2 * r2 * (gbest[d] - x[i][d]);
                vel = std::clamp(vel, -vmax[d], vmax[d]);
                double pos = x[i][d] + vel;
                if (pos < lo[d]) {
                    pos = lo[d];
                    vel = 0.0;
                } else if (pos > hi[d]) {
                    pos = hi[d];
                    vel = 0.0;
                }
                x[i][d] = pos;
                v[i][d] = vel;
            }
        }
        evaluate_all(cost, x, f, threads);
        result.evaluations += swarm;

        for (std::size_t i = 0; i < swarm; ++i) {
            if (f[i] < pbest_cost[i]) {
                pbest_cost[i] = f[i];
                pbest[i] = x[i];
                if (f[i] < gbest_cost) {
                    gbest_cost = f[i];
                    gbest = x[i];
                }
            }
        }
        result.cost_history.push_back(gbest_cost);

        if (cfg.stop_tol > 0.0 && result.cost_history.size() > cfg.stall_iters) {
            const double earlier = result.cost_history[result.cost_history.size() - 1 - cfg.stall_iters];
            if (earlier - gbest_cost <= cfg.stop_tol) {
                break;
            }
        }
    }

    result.best_params.names = space.names();
    result.best_params.values = gbest;
    result.best_cost = gbest_cost;
    result.active_penalties = space.active_penalties(gbest);
    return result;
}

}  // namespace freqstab
