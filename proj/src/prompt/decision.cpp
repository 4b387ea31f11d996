// SPDX-License-Identifier: Apache-2.0
#include <droidpilot/error.hpp>
#include <droidpilot/prompt/decision.hpp>

#include <limits>

namespace droidpilot::prompt
{

using nlohmann::json;
using nlohmann::ordered_json;

auto to_json(Decision const& d) -> ordered_json
{
    auto actions = ordered_json::array();
    for (auto const& entry: d.current_screen_actions)
        actions.push_back(ordered_json::array({ entry.action, entry.id }));

    auto out = ordered_json::object();
    out["goal_action_plan"] = d.goal_action_plan;
    out["past_actions_summary"] = d.past_actions_summary;
    out["no_further_action_needed"] = d.no_further_action_needed;
    out["no_further_action_needed_bool"] = d.no_further_action_needed_bool;
    out["immediate_next_action"] = d.immediate_next_action;
    out["current_screen_actions"] = std::move(actions);
    out["selected_current_screen_action"] = ordered_json::array({ d.selected_current_screen_action.reasoning,
                                                                  d.selected_current_screen_action.action,
                                                                  d.selected_current_screen_action.id });
    out["repeating_past_action"] = d.repeating_past_action;
    out["repeating_past_action_bool"] = d.repeating_past_action_bool;
    out["id"] = d.id;
    out["text_input_value"] = d.text_input_value;
    return out;
}

auto to_canonical_json(Decision const& decision) -> std::string
{
    return to_json(decision).dump();
}

namespace
{

[[noreturn]] void mismatch(std::string_view key)
{
    throw Error(ErrorCode::TypeMismatch, std::string(key));
}

auto get_string(json const& object, std::string_view key) -> std::string
{
    auto const& value = object.at(std::string(key));
    if (!value.is_string())
        mismatch(key);
    return value.get<std::string>();
}

auto get_bool(json const& object, std::string_view key) -> bool
{
    auto const& value = object.at(std::string(key));
    if (!value.is_boolean())
        mismatch(key);
    return value.get<bool>();
}

// Strict integer: JSON integers only, within int range.
auto as_int(json const& value, std::string_view key) -> int
{
    if (value.is_number_unsigned())
    {
        auto const v = value.get<std::uint64_t>();
        if (v > static_cast<std::uint64_t>(std::numeric_limits<int>::max()))
            mismatch(key);
        return static_cast<int>(v);
    }
    if (!value.is_number_integer())
        mismatch(key);
    auto const v = value.get<std::int64_t>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        mismatch(key);
    return static_cast<int>(v);
}

// Object-shaped entries use "id" or "ID" for the element id.
auto object_id(json const& entry, std::string_view key) -> json const&
{
    if (auto it = entry.find("id"); it != entry.end())
        return *it;
    if (auto it = entry.find("ID"); it != entry.end())
        return *it;
    mismatch(key);
}

auto get_screen_actions(json const& object) -> std::vector<ScreenActionEntry>
{
    constexpr auto key = std::string_view("current_screen_actions");
    auto const& value = object.at(std::string(key));
    if (!value.is_array())
        mismatch(key);
    auto out = std::vector<ScreenActionEntry> {};
    for (auto const& entry: value)
    {
        if (entry.is_array() && entry.size() == 2 && entry[0].is_string())
            out.push_back({ entry[0].get<std::string>(), as_int(entry[1], key) });
        else if (entry.is_object() && entry.contains("action") && entry["action"].is_string())
            out.push_back({ entry["action"].get<std::string>(), as_int(object_id(entry, key), key) });
        else
            mismatch(key);
    }
    return out;
}

auto get_selected(json const& object) -> SelectedAction
{
    constexpr auto key = std::string_view("selected_current_screen_action");
    auto const& value = object.at(std::string(key));
    if (value.is_array() && value.size() == 3 && value[0].is_string() && value[1].is_string())
        return { value[0].get<std::string>(), value[1].get<std::string>(), as_int(value[2], key) };
    if (value.is_object() && value.contains("reasoning") && value["reasoning"].is_string() && value.contains("action")
        && value["action"].is_string())
        return { value["reasoning"].get<std::string>(),
                 value["action"].get<std::string>(),
                 as_int(object_id(value, key), key) };
    mismatch(key);
}

// Offsets of '{' ... '}' spans that are balanced, honouring JSON string escapes.
auto balanced_object_end(std::string_view text, std::size_t start) -> std::size_t
{
    auto depth = 0;
    auto inString = false;
    auto escaped = false;
    for (auto i = start; i < text.size(); ++i)
    {
        auto const c = text[i];
        if (inString)
        {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                inString = false;
            continue;
        }
        if (c == '"')
            inString = true;
        else if (c == '{')
            ++depth;
        else if (c == '}' && --depth == 0)
            return i + 1;
    }
    return std::string_view::npos;
}

} // namespace

auto decision_from_json(json const& object) -> Decision
{
    if (!object.is_object())
        throw Error(ErrorCode::NoJsonFound, "top-level value is not an object");
    for (auto const key: DecisionKeys)
        if (!object.contains(std::string(key)))
            throw Error(ErrorCode::MissingField, std::string(key));

    auto d = Decision {};
    d.goal_action_plan = get_string(object, "goal_action_plan");
    d.past_actions_summary = get_string(object, "past_actions_summary");
    d.no_further_action_needed = get_string(object, "no_further_action_needed");
    d.no_further_action_needed_bool = get_bool(object, "no_further_action_needed_bool");
    d.immediate_next_action = get_string(object, "immediate_next_action");
    d.current_screen_actions = get_screen_actions(object);
    d.selected_current_screen_action = get_selected(object);
    d.repeating_past_action = get_string(object, "repeating_past_action");
    d.repeating_past_action_bool = get_bool(object, "repeating_past_action_bool");
    d.id = as_int(object.at("id"), "id");
    d.text_input_value = get_string(object, "text_input_value");
    return d;
}

auto parse_decision(std::string_view raw) -> Decision
{
    for (auto start = raw.find('{'); start != std::string_view::npos; start = raw.find('{', start + 1))
    {
        auto const end = balanced_object_end(raw, start);
        if (end == std::string_view::npos)
            continue;
        auto parsed = json::parse(raw.substr(start, end - start), nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object())
            continue;
        return decision_from_json(parsed);
    }
    throw Error(ErrorCode::NoJsonFound, "no JSON object in model output");
}

auto validate_decision(Decision const& decision, screen::RefinedScreen const& screen) -> ValidatedAction
{
    auto result = ValidatedAction { Action::terminate(), decision, {} };

    if (!decision.no_further_action_needed.starts_with("Past Actions indicate")
        && !decision.no_further_action_needed.starts_with("Past Actions do not indicate"))
        result.warnings.emplace_back("no_further_action_needed does not start with the expected phrase");

    if (decision.id == -1)
    {
        if (!decision.no_further_action_needed_bool)
            throw Error(ErrorCode::InconsistentTermination, "id is -1 but no_further_action_needed_bool is false");
        return result;
    }

    if (decision.no_further_action_needed_bool)
        result.warnings.emplace_back("model reports completion but selected id " + std::to_string(decision.id)
                                     + "; executing the selected action");

    auto const* element = screen.find(decision.id);
    if (!element)
        throw Error(ErrorCode::UnknownElement, "id " + std::to_string(decision.id) + " is not on the current screen");

    if (decision.wants_text() && !element->input_capable)
        throw Error(ErrorCode::TextOnNonInput,
                    "element " + std::to_string(decision.id) + " (" + std::string(screen::to_string(element->kind))
                        + ") does not accept text");

    using screen::ElementKind;
    switch (element->kind)
    {
        case ElementKind::SyntheticBack: result.action = Action::back(element->id); break;
        case ElementKind::SyntheticScrollUp: result.action = Action::scroll_up(element->id); break;
        case ElementKind::SyntheticScrollDown: result.action = Action::scroll_down(element->id); break;
        default:
            result.action = decision.wants_text() ? Action::input(element->id, decision.text_input_value)
                                                  : Action::tap(element->id);
    }
    return result;
}

} // namespace droidpilot::prompt
