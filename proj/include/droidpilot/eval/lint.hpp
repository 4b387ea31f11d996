// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace droidpilot::eval
{

enum class LintRule
{
    MissingConfirmation,
    TooVague,
    MissingPath,
};

[[nodiscard]] auto to_string(LintRule rule) -> std::string_view;

struct LintFinding
{
    LintRule rule;
    std::string message;
    std::string hint;
};

/// Advisory checks on a test-case description:
///  - a mutation verb (set/change/update/add/delete/edit) without a confirmation
///    word (save/done/confirm/ok);
///  - fewer than three words;
///  - "settings" without a location cue (in/under/from).
[[nodiscard]] auto lint_description(std::string_view description) -> std::vector<LintFinding>;

} // namespace droidpilot::eval
