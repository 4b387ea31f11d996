// SPDX-License-Identifier: Apache-2.0
#include <droidpilot/action.hpp>
#include <droidpilot/error.hpp>

namespace droidpilot
{

auto to_string(ActionKind kind) -> std::string_view
{
    switch (kind)
    {
        case ActionKind::Tap: return "tap";
        case ActionKind::InputText: return "input";
        case ActionKind::Back: return "back";
        case ActionKind::ScrollUp: return "scroll-up";
        case ActionKind::ScrollDown: return "scroll-down";
        case ActionKind::Terminate: return "terminate";
    }
    return "terminate";
}

auto parse_action_kind(std::string_view name) -> ActionKind
{
    for (auto const kind: { ActionKind::Tap,
                            ActionKind::InputText,
                            ActionKind::Back,
                            ActionKind::ScrollUp,
                            ActionKind::ScrollDown,
                            ActionKind::Terminate })
        if (to_string(kind) == name)
            return kind;
    throw Error(ErrorCode::InvalidInput, "unknown action kind '" + std::string(name) + "'");
}

} // namespace droidpilot
