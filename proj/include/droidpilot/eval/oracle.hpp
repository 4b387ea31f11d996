// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <droidpilot/device/sim.hpp>
#include <droidpilot/eval/metrics.hpp>

#include <optional>

namespace droidpilot::eval
{

/// Replays the trace's actions through the simulator and flags each step whose
/// action moves off every minimal path to the goal (taps and text input only).
/// Returns nullopt when the replay diverges from the recorded screens.
[[nodiscard]] auto label_erroneous_steps(sim::SimAppSpec const& spec,
                                         sim::GoalPredicate const& goal,
                                         agent::ExecutionTrace const& trace) -> std::optional<std::vector<bool>>;

/// Labels plus the oracle path length, when the goal is reachable.
[[nodiscard]] auto build_oracle(sim::SimAppSpec const& spec,
                                sim::GoalPredicate const& goal,
                                agent::ExecutionTrace const& trace) -> std::optional<TraceOracle>;

} // namespace droidpilot::eval
