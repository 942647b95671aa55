#pragma once

// State-space realizations of the equivalent turbine-governor loops.
//
// Every loop is driven by the local per-unit speed deviation `dw` and yields
// a mechanical power deviation in p.u. on the common base.
//
//   SteamTgov1   -(1/R) (1 + T2 s) / ((1 + Tg s)(1 + T3 s)) - Dt dw       2 states
//   GasGast      valve lag Tg (low-value select against the temperature
//                limit, anti-windup clamp at Lmax) -> fuel lag T2,
//                exhaust temperature measured through T3                  3 states
//   HydroClassic -(1/R) (1 + Tr s) / ((1 + Tg s)(1 + (Rt/R) Tr s))
//                cascaded with the penstock (1 - Tw s)/(1 + Tw s / 2)     3 states

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "freqstab/model.hpp"

namespace freqstab {

[[nodiscard]] std::size_t governor_state_count(TechnologyKind kind);

void governor_derivative(const GovernorParams& gov, std::span<const double> state, double dw,
                         std::span<double> dstate);

[[nodiscard]] double governor_output(const GovernorParams& gov, std::span<const double> state, double dw);

/// Projects limited states back inside their limits after an integration step.
void governor_clamp(const GovernorParams& gov, std::span<double> state);

/// Lag time constants of the loop, used for step-size diagnostics.
[[nodiscard]] std::vector<double> governor_time_constants(const GovernorParams& gov);

/// Open-loop response of one block to a prescribed speed deviation history,
/// integrated with fixed-step RK4. Returns the mechanical power deviation at
/// t = k * dt, k = 0..round(t_end / dt).
/// Throws std::invalid_argument for inertia-only blocks.
[[nodiscard]] std::vector<double> block_response(const GenerationBlock& block,
                                                 const std::function<double(double)>& dw, double dt,
                                                 double t_end);

}  // namespace freqstab
