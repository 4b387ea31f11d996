// SPDX-License-Identifier: Apache-2.0
#include <droidpilot/agent/recovery.hpp>

namespace droidpilot::agent
{

auto RecoveryReport::rate() const -> std::optional<double>
{
    if (erroneous_steps.empty())
        return std::nullopt;
    return static_cast<double>(recovered_steps.size()) / static_cast<double>(erroneous_steps.size());
}

auto returning_back(ExecutionTrace const& trace, std::size_t index) -> std::optional<std::size_t>
{
    auto const& origin = trace.records.at(index).screen_hash_before;
    for (auto j = index + 1; j < trace.records.size(); ++j)
        if (trace.records[j].action.kind == ActionKind::Back && trace.records[j].screen_hash_after == origin)
            return j;
    return std::nullopt;
}

namespace
{

auto is_candidate(ActionRecord const& record) -> bool
{
    return record.action.kind == ActionKind::Tap || record.action.kind == ActionKind::InputText;
}

// A Back returns to the step's screen and the next action taken there differs.
auto returns_and_differs(ExecutionTrace const& trace, std::size_t index) -> bool
{
    auto const back = returning_back(trace, index);
    if (!back || *back + 1 >= trace.records.size())
        return false;
    auto const& next = trace.records[*back + 1];
    return next.action != trace.records[index].action;
}

} // namespace

auto classify_recovery_events(ExecutionTrace const& trace, std::optional<std::vector<bool>> const& erroneous)
    -> RecoveryReport
{
    auto report = RecoveryReport {};
    report.oracle_mode = erroneous.has_value();
    auto const completed = trace.verdict.kind == VerdictKind::Completed;

    for (auto i = std::size_t { 0 }; i < trace.records.size(); ++i)
    {
        auto const& record = trace.records[i];
        if (erroneous)
        {
            if (i >= erroneous->size() || !(*erroneous)[i])
                continue;
            report.erroneous_steps.push_back(record.step);
            if (returns_and_differs(trace, i))
                report.recovered_steps.push_back(record.step);
        }
        else if (is_candidate(record) && returns_and_differs(trace, i))
        {
            report.erroneous_steps.push_back(record.step);
            if (completed)
                report.recovered_steps.push_back(record.step);
        }
    }
    return report;
}

} // namespace droidpilot::agent
