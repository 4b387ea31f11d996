// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace droidpilot
{

enum class ActionKind
{
    Tap,
    InputText,
    Back,
    ScrollUp,
    ScrollDown,
    Terminate,
};

[[nodiscard]] auto to_string(ActionKind kind) -> std::string_view;
[[nodiscard]] auto parse_action_kind(std::string_view name) -> ActionKind;

/// One atomic GUI interaction. `element_id` refers to the refined screen the action
/// was validated against; it is -1 for Terminate.
struct Action
{
    ActionKind kind = ActionKind::Terminate;
    int element_id = -1;
    std::string text;

    static auto tap(int id) -> Action { return { ActionKind::Tap, id, {} }; }
    static auto input(int id, std::string value) -> Action { return { ActionKind::InputText, id, std::move(value) }; }
    static auto back(int id) -> Action { return { ActionKind::Back, id, {} }; }
    static auto scroll_up(int id) -> Action { return { ActionKind::ScrollUp, id, {} }; }
    static auto scroll_down(int id) -> Action { return { ActionKind::ScrollDown, id, {} }; }
    static auto terminate() -> Action { return { ActionKind::Terminate, -1, {} }; }

    [[nodiscard]] auto is_navigation() const noexcept -> bool
    {
        return kind == ActionKind::Back || kind == ActionKind::ScrollUp || kind == ActionKind::ScrollDown;
    }

    auto operator==(Action const&) const -> bool = default;
};

} // namespace droidpilot
