#pragma once

// Particle swarm optimizer with a chaotically descending inertia weight
// (CDIW-PSO). Bounds are hard: positions are clamped to the box. Soft
// plausibility constraints are expressed as weighted penalties that callers
// fold into the cost.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace freqstab {

struct ParamBound {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
};

/// Weighted penalty; `violation` returns a nonnegative magnitude (0 when satisfied).
struct Penalty {
    std::string name;
    double weight = 100.0;
    std::function<double(std::span<const double>)> violation;
};

struct ParamSpace {
    std::vector<ParamBound> entries;
    std::vector<Penalty> penalties;

    [[nodiscard]] std::size_t size() const { return entries.size(); }
    [[nodiscard]] std::vector<std::string> names() const;
    [[nodiscard]] std::size_t index_of(std::string_view name) const;
    [[nodiscard]] bool contains(std::span<const double> x) const;
    /// Sum of weight * violation over all penalties.
    [[nodiscard]] double penalty(std::span<const double> x) const;
    [[nodiscard]] std::vector<std::string> active_penalties(std::span<const double> x) const;
    void validate() const;
};

struct PsoConfig {
    std::size_t swarm_size = 40;
    std::size_t max_iters = 300;
    double c1 = 2.0;
    double c2 = 2.0;
    double w_max = 0.9;
    double w_min = 0.4;
    double chaos_seed = 0.7;
    std::uint64_t rng_seed = 1;
    /// Stop once the global best improves by no more than stop_tol over
    /// `stall_iters` consecutive iterations. Zero disables early stopping.
    double stop_tol = 0.0;
    std::size_t stall_iters = 50;
    /// Velocity limit as a fraction of each parameter range.
    double velocity_limit = 0.2;
    /// Worker threads for cost evaluation; 0 picks the hardware concurrency.
    std::size_t threads = 0;
};

void validate(const PsoConfig& cfg);

/// Inertia weight for iterations 0..max_iters-1:
/// w(k) = (w_max - w_min) (max_iters - k) / max_iters z(k) + w_min,
/// z(k+1) = 4 z(k) (1 - z(k)), z(0) = chaos_seed.
[[nodiscard]] std::vector<double> chaotic_inertia_weights(const PsoConfig& cfg);

/// Part of the initial swarm placed around a known point with Gaussian jitter
/// (standard deviation jitter * range), clamped to the bounds. The first
/// seeded particle sits exactly on `center`.
struct SwarmSeed {
    std::vector<double> center;
    double fraction = 0.5;
    double jitter = 0.05;
};

struct NamedParams {
    std::vector<std::string> names;
    std::vector<double> values;

    [[nodiscard]] double at(std::string_view name) const;
    [[nodiscard]] std::size_t size() const { return values.size(); }
};

struct EstimationResult {
    NamedParams best_params;
    double best_cost = 0.0;
    std::vector<double> cost_history;  // global best after the initial swarm and each iteration
    std::vector<std::string> active_penalties;
    bool unidentifiable = false;
    std::uint64_t rng_seed = 0;
    double chaos_seed = 0.0;
    std::size_t evaluations = 0;
    double initial_cost_min = 0.0;
    double initial_cost_max = 0.0;
};

using CostFn = std::function<double(std::span<const double>)>;

/// Minimizes `cost` over the box of `space`. Deterministic for a given
/// configuration: evaluations may run concurrently but every reduction is
/// performed sequentially in particle order.
[[nodiscard]] EstimationResult pso_optimize(const ParamSpace& space, const PsoConfig& cfg, const CostFn& cost,
                                            const std::optional<SwarmSeed>& seed = std::nullopt);

}  // namespace freqstab
