// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <droidpilot/action.hpp>
#include <droidpilot/screen/refine.hpp>

#include <nlohmann/json.hpp>

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace droidpilot::prompt
{

/// Sentinel the model uses when no text is to be typed.
inline constexpr std::string_view NoValue = "<NOVALUE>";

/// The eleven keys of the decision object, in schema order.
inline constexpr std::array<std::string_view, 11> DecisionKeys {
    "goal_action_plan",
    "past_actions_summary",
    "no_further_action_needed",
    "no_further_action_needed_bool",
    "immediate_next_action",
    "current_screen_actions",
    "selected_current_screen_action",
    "repeating_past_action",
    "repeating_past_action_bool",
    "id",
    "text_input_value",
};

struct ScreenActionEntry
{
    std::string action;
    int id = 0;
    auto operator==(ScreenActionEntry const&) const -> bool = default;
};

struct SelectedAction
{
    std::string reasoning;
    std::string action;
    int id = 0;
    auto operator==(SelectedAction const&) const -> bool = default;
};

/// One step's structured response from the model.
struct Decision
{
    std::string goal_action_plan;
    std::string past_actions_summary;
    std::string no_further_action_needed;
    bool no_further_action_needed_bool = false;
    std::string immediate_next_action;
    std::vector<ScreenActionEntry> current_screen_actions;
    SelectedAction selected_current_screen_action;
    std::string repeating_past_action;
    bool repeating_past_action_bool = false;
    int id = -1;
    std::string text_input_value { NoValue };

    [[nodiscard]] auto wants_text() const -> bool { return text_input_value != NoValue; }

    auto operator==(Decision const&) const -> bool = default;
};

/// Canonical JSON form: schema key order, list-shaped nested entries.
[[nodiscard]] auto to_json(Decision const& decision) -> nlohmann::ordered_json;
[[nodiscard]] auto to_canonical_json(Decision const& decision) -> std::string;

/// Checks presence of all eleven keys, then their types, in schema order.
/// Throws Error{MissingField} or Error{TypeMismatch}; the detail is the key name.
[[nodiscard]] auto decision_from_json(nlohmann::json const& object) -> Decision;

/// Extracts the first balanced JSON object from free-form model output (prose and
/// code fences are tolerated) and checks it against the schema.
/// Throws Error{NoJsonFound}, Error{MissingField} or Error{TypeMismatch}.
[[nodiscard]] auto parse_decision(std::string_view raw) -> Decision;

struct ValidatedAction
{
    Action action;
    Decision decision;
    std::vector<std::string> warnings;
};

/// Maps a decision onto an executable action for `screen`.
/// Throws Error{UnknownElement}, Error{TextOnNonInput} or Error{InconsistentTermination}.
[[nodiscard]] auto validate_decision(Decision const& decision, screen::RefinedScreen const& screen) -> ValidatedAction;

} // namespace droidpilot::prompt
