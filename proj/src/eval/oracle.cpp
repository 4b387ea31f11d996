// SPDX-License-Identifier: Apache-2.0
#include <droidpilot/error.hpp>
#include <droidpilot/eval/oracle.hpp>
#include <droidpilot/screen/refine.hpp>

#include <spdlog/spdlog.h>

namespace droidpilot::eval
{

using droidpilot::ActionKind;

namespace
{

auto distance(sim::SimAppSpec const& spec, sim::GoalPredicate const& goal, sim::SimState const& state)
    -> std::optional<std::size_t>
{
    auto const path = sim::shortest_path_from(spec, goal, state);
    if (!path)
        return std::nullopt;
    return path->size();
}

} // namespace

auto label_erroneous_steps(sim::SimAppSpec const& spec,
                           sim::GoalPredicate const& goal,
                           agent::ExecutionTrace const& trace) -> std::optional<std::vector<bool>>
{
    auto device = sim::SimDevice(spec);
    auto flags = std::vector<bool>(trace.records.size(), false);
    for (auto i = std::size_t { 0 }; i < trace.records.size(); ++i)
    {
        auto const& record = trace.records[i];
        auto const screen = screen::refine_raw(device.capture_source());
        if (screen.screen_hash != record.screen_hash_before)
        {
            spdlog::debug("[{}] oracle replay diverged at step {}", trace.trace_id, record.step);
            return std::nullopt;
        }
        if (record.action.kind == ActionKind::Terminate)
            break;

        auto const before = distance(spec, goal, device.state());
        try
        {
            device.execute(screen::resolve_locator(screen, record.action.element_id), record.action);
        }
        catch (Error const& e)
        {
            spdlog::debug("[{}] oracle replay failed at step {}: {}", trace.trace_id, record.step, e.what());
            return std::nullopt;
        }
        if (record.action.kind != ActionKind::Tap && record.action.kind != ActionKind::InputText)
            continue;
        auto const after = distance(spec, goal, device.state());
        flags[i] = before && (!after || *after + 1 != *before);
    }
    return flags;
}

auto build_oracle(sim::SimAppSpec const& spec, sim::GoalPredicate const& goal, agent::ExecutionTrace const& trace)
    -> std::optional<TraceOracle>
{
    auto flags = label_erroneous_steps(spec, goal, trace);
    if (!flags)
        return std::nullopt;
    auto oracle = TraceOracle { std::move(*flags), std::nullopt };
    if (auto const path = sim::shortest_path_from(spec, goal, sim::initial_state(spec)))
        oracle.shortest_length = static_cast<int>(path->size());
    return oracle;
}

} // namespace droidpilot::eval
