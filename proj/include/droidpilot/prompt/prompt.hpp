// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <droidpilot/action.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace droidpilot::prompt
{

/// Version of the bundled instruction asset.
inline constexpr int PromptTemplateVersion = 1;

/// The fixed instruction block that opens every prompt (ends with a newline).
[[nodiscard]] auto instruction_block() -> std::string_view;

struct PromptContext
{
    std::string goal;
    std::vector<std::string> past_actions; // canonical history lines, step 1 first
    std::string screen_text;               // render() of the current screen
};

/// Instruction block, a blank line, then the `Current Screen:`, `Overall Goal:` and
/// `Past Actions:` sections, each label on its own line. Empty history is written as `None`.
[[nodiscard]] auto build_prompt(PromptContext const& ctx) -> std::string;

/// `Step <k>: tapped '<label>' (id=<id>)` and friends. Requires step >= 1.
[[nodiscard]] auto render_history_line(int step, Action const& action, std::string_view label) -> std::string;

/// Section labels, in prompt order.
inline constexpr std::string_view CurrentScreenLabel = "Current Screen:";
inline constexpr std::string_view OverallGoalLabel = "Overall Goal:";
inline constexpr std::string_view PastActionsLabel = "Past Actions:";

/// Line appended ahead of the error text when a malformed response is retried.
inline constexpr std::string_view RetryMarker = "Previous output was invalid:";

[[nodiscard]] auto build_retry_prompt(std::string_view prompt, std::string_view error) -> std::string;

} // namespace droidpilot::prompt
