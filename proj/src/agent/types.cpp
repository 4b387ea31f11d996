// SPDX-License-Identifier: Apache-2.0
#include <droidpilot/agent/types.hpp>
#include <droidpilot/digest.hpp>
#include <droidpilot/error.hpp>
#include <droidpilot/prompt/prompt.hpp>

#include <algorithm>

namespace droidpilot::agent
{

auto TestCase::trace_id() const -> std::string
{
    if (!id.empty())
        return id;
    return digest_hex(description + "\n" + app_binding).substr(0, 12);
}

auto to_string(VerdictKind kind) -> std::string_view
{
    switch (kind)
    {
        case VerdictKind::Completed: return "Completed";
        case VerdictKind::StepLimitExceeded: return "StepLimitExceeded";
        case VerdictKind::RepeatLimitExceeded: return "RepeatLimitExceeded";
        case VerdictKind::DecisionFailure: return "DecisionFailure";
        case VerdictKind::BackendFailure: return "BackendFailure";
    }
    return "BackendFailure";
}

auto parse_verdict_kind(std::string_view name) -> VerdictKind
{
    for (auto const kind: { VerdictKind::Completed,
                            VerdictKind::StepLimitExceeded,
                            VerdictKind::RepeatLimitExceeded,
                            VerdictKind::DecisionFailure,
                            VerdictKind::BackendFailure })
        if (to_string(kind) == name)
            return kind;
    throw Error(ErrorCode::InvalidInput, "unknown verdict '" + std::string(name) + "'");
}

auto ExecutionTrace::executed_steps() const -> int
{
    return static_cast<int>(std::count_if(records.begin(), records.end(), [](auto const& r) {
        return r.action.kind != ActionKind::Terminate;
    }));
}

void AgentConfig::validate() const
{
    if (max_steps < 1)
        throw Error(ErrorCode::InvalidInput, "max_steps must be at least 1");
    if (repeat_limit < 1)
        throw Error(ErrorCode::InvalidInput, "repeat_limit must be at least 1");
    if (parse_retry_limit < 0)
        throw Error(ErrorCode::InvalidInput, "parse_retry_limit must not be negative");
}

auto history_line(ActionRecord const& record) -> std::string
{
    return prompt::render_history_line(record.step, record.action, record.element_label);
}

} // namespace droidpilot::agent
