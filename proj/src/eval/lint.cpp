// SPDX-License-Identifier: Apache-2.0
#include <droidpilot/eval/lint.hpp>

#include <algorithm>
#include <cctype>
#include <set>

namespace droidpilot::eval
{

auto to_string(LintRule rule) -> std::string_view
{
    switch (rule)
    {
        case LintRule::MissingConfirmation: return "MissingConfirmation";
        case LintRule::TooVague: return "TooVague";
        case LintRule::MissingPath: return "MissingPath";
    }
    return "?";
}

namespace
{

constexpr auto MinimumWords = std::size_t { 3 };

auto words_of(std::string_view text) -> std::vector<std::string>
{
    auto words = std::vector<std::string> {};
    auto current = std::string {};
    for (auto c: text)
    {
        auto const u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '\'')
            current += static_cast<char>(std::tolower(u));
        else if (!current.empty())
            words.push_back(std::exchange(current, {}));
    }
    if (!current.empty())
        words.push_back(std::move(current));
    return words;
}

auto any_of(std::vector<std::string> const& words, std::set<std::string> const& vocabulary) -> bool
{
    return std::any_of(words.begin(), words.end(), [&](auto const& w) { return vocabulary.count(w) > 0; });
}

} // namespace

auto lint_description(std::string_view description) -> std::vector<LintFinding>
{
    static auto const mutations = std::set<std::string> { "set", "change", "update", "add", "delete", "edit" };
    static auto const confirmations = std::set<std::string> { "save", "done", "confirm", "ok" };
    static auto const locations = std::set<std::string> { "in", "under", "from" };

    auto const words = words_of(description);
    auto findings = std::vector<LintFinding> {};

    if (any_of(words, mutations) && !any_of(words, confirmations))
        findings.push_back({ LintRule::MissingConfirmation,
                             "changes something but never confirms it",
                             "Append the final confirmation step, e.g. \"Click Done to save\"." });
    if (words.size() < MinimumWords)
        findings.push_back({ LintRule::TooVague,
                             "has only " + std::to_string(words.size()) + " word(s)",
                             "Name the screen, the element to use and the expected end state." });
    if (any_of(words, { "settings" }) && !any_of(words, locations))
        findings.push_back({ LintRule::MissingPath,
                             "mentions settings without saying where they are",
                             "Say where to find them, e.g. \"in the Settings menu\" or \"under Notifications\"." });
    return findings;
}

} // namespace droidpilot::eval
