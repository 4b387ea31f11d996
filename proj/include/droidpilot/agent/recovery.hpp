// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <droidpilot/agent/types.hpp>

#include <optional>
#include <vector>

namespace droidpilot::agent
{

struct RecoveryReport
{
    bool oracle_mode = false;
    std::vector<int> erroneous_steps; // step numbers
    std::vector<int> recovered_steps;

    /// recovered / erroneous, or nullopt when nothing was erroneous.
    [[nodiscard]] auto rate() const -> std::optional<double>;
};

/// Index of the first Back after `index` that lands on the screen `index` was taken
/// from, or nullopt.
[[nodiscard]] auto returning_back(ExecutionTrace const& trace, std::size_t index) -> std::optional<std::size_t>;

/// With `erroneous` (one flag per record, from a simulator oracle) a flagged step is
/// recovered when a later Back returns to its screen and the next action from there
/// differs. Without it, the erroneous steps are exactly those followed by that
/// pattern, and they count as recovered when the trace ends Completed.
[[nodiscard]] auto classify_recovery_events(ExecutionTrace const& trace,
                                            std::optional<std::vector<bool>> const& erroneous) -> RecoveryReport;

} // namespace droidpilot::agent
