// SPDX-License-Identifier: Apache-2.0
#include <droidpilot/error.hpp>
#include <droidpilot/prompt/prompt.hpp>

#include <algorithm>

namespace droidpilot::prompt
{

namespace detail
{
extern std::string_view const InstructionAsset;
}

auto instruction_block() -> std::string_view
{
    return detail::InstructionAsset;
}

namespace
{
// The goal sits on a single line of the prompt.
auto single_line(std::string_view text) -> std::string
{
    auto out = std::string(text);
    std::replace(out.begin(), out.end(), '\n', ' ');
    std::replace(out.begin(), out.end(), '\r', ' ');
    return out;
}
} // namespace

auto build_prompt(PromptContext const& ctx) -> std::string
{
    auto out = std::string(instruction_block());
    out += '\n';

    out += CurrentScreenLabel;
    out += '\n';
    out += ctx.screen_text;
    if (!ctx.screen_text.empty() && ctx.screen_text.back() != '\n')
        out += '\n';

    out += OverallGoalLabel;
    out += '\n';
    out += single_line(ctx.goal);
    out += '\n';

    out += PastActionsLabel;
    out += '\n';
    if (ctx.past_actions.empty())
        out += "None\n";
    for (auto const& line: ctx.past_actions)
    {
        out += single_line(line);
        out += '\n';
    }
    return out;
}

auto render_history_line(int step, Action const& action, std::string_view label) -> std::string
{
    if (step < 1)
        throw Error(ErrorCode::InvalidInput, "history steps start at 1");

    auto out = "Step " + std::to_string(step) + ": ";
    auto const quoted = "'" + std::string(label) + "'";
    auto const idSuffix = " (id=" + std::to_string(action.element_id) + ")";
    switch (action.kind)
    {
        case ActionKind::Tap: out += "tapped " + quoted + idSuffix; break;
        case ActionKind::InputText: out += "entered text '" + action.text + "' into " + quoted + idSuffix; break;
        case ActionKind::Back: out += "pressed Back"; break;
        case ActionKind::ScrollUp: out += "scrolled up"; break;
        case ActionKind::ScrollDown: out += "scrolled down"; break;
        case ActionKind::Terminate: out += "finished"; break;
    }
    return out;
}

auto build_retry_prompt(std::string_view prompt, std::string_view error) -> std::string
{
    auto out = std::string(prompt);
    if (!out.empty() && out.back() != '\n')
        out += '\n';
    out += RetryMarker;
    out += '\n';
    out += single_line(error);
    out += '\n';
    return out;
}

} // namespace droidpilot::prompt
