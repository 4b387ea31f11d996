// SPDX-License-Identifier: Apache-2.0
#include <droidpilot/device/sim.hpp>
#include <droidpilot/error.hpp>

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace droidpilot::sim
{

using nlohmann::json;

auto ElementTemplate::is_editable() const -> bool
{
    return class_name.ends_with("EditText") || class_name.ends_with("AutoCompleteTextView");
}

auto SimAppSpec::screen(std::string const& id) const -> ScreenTemplate const&
{
    auto const it = screens.find(id);
    if (it == screens.end())
        throw Error(ErrorCode::DanglingReference, "unknown screen '" + id + "'");
    return it->second;
}

// {{{ loading

namespace
{

[[noreturn]] void parse_error(std::string const& what)
{
    throw Error(ErrorCode::SpecParseError, what);
}

auto string_field(json const& object, char const* key, std::string fallback = {}) -> std::string
{
    if (!object.contains(key))
        return fallback;
    if (!object[key].is_string())
        parse_error(std::string("field '") + key + "' must be a string");
    return object[key].get<std::string>();
}

auto bool_field(json const& object, char const* key, bool fallback) -> bool
{
    if (!object.contains(key))
        return fallback;
    if (!object[key].is_boolean())
        parse_error(std::string("field '") + key + "' must be a boolean");
    return object[key].get<bool>();
}

auto store_field(json const& object, char const* key) -> Store
{
    auto out = Store {};
    if (!object.contains(key))
        return out;
    if (!object[key].is_object())
        parse_error(std::string("field '") + key + "' must be an object of strings");
    for (auto const& [name, value]: object[key].items())
    {
        if (!value.is_string())
            parse_error(std::string("field '") + key + "." + name + "' must be a string");
        out[name] = value.get<std::string>();
    }
    return out;
}

auto parse_element(json const& doc) -> ElementTemplate
{
    if (!doc.is_object())
        parse_error("element templates must be objects");
    auto element = ElementTemplate {};
    element.clickable = bool_field(doc, "clickable", false);
    element.checkable = bool_field(doc, "checkable", false);
    element.enabled = bool_field(doc, "enabled", true);
    element.class_name =
        string_field(doc, "class", element.clickable ? "android.widget.Button" : "android.widget.TextView");
    element.label = string_field(doc, "label");
    element.content_desc = string_field(doc, "content_desc");
    element.resource_name = string_field(doc, "resource_name");
    element.variable = string_field(doc, "variable");
    return element;
}

auto label_on(ScreenTemplate const& screen, std::string const& label) -> ElementTemplate const*
{
    for (auto const& element: screen.elements)
        if (element.label == label && element.is_interactive())
            return &element;
    return nullptr;
}

void validate(SimAppSpec const& spec)
{
    auto dangling = [](std::string const& what) { throw Error(ErrorCode::DanglingReference, what); };
    if (!spec.screens.contains(spec.initial_screen))
        dangling("initial_screen '" + spec.initial_screen + "' is not a screen");
    for (auto const& t: spec.transitions)
    {
        if (!spec.screens.contains(t.from))
            dangling("transition source '" + t.from + "' is not a screen");
        if (!spec.screens.contains(t.to))
            dangling("transition target '" + t.to + "' is not a screen");
        auto const* element = label_on(spec.screens.at(t.from), t.trigger.label);
        if (!element)
            dangling("trigger '" + t.trigger.label + "' is not an interactive element of screen '" + t.from + "'");
        if (t.trigger.text && !element->is_editable())
            dangling("trigger '" + t.trigger.label + "' requires text but is not a text input");
    }
}

} // namespace

auto load_spec(std::string_view doc) -> SimAppSpec
{
    auto const root = json::parse(doc, nullptr, false);
    if (root.is_discarded())
        parse_error("app spec is not valid JSON");
    if (!root.is_object())
        parse_error("app spec must be a JSON object");

    auto spec = SimAppSpec {};
    if (root.contains("spec_version"))
    {
        if (!root["spec_version"].is_number_integer())
            parse_error("spec_version must be an integer");
        spec.spec_version = root["spec_version"].get<int>();
        if (spec.spec_version != SpecVersion)
            parse_error("unsupported spec_version " + std::to_string(spec.spec_version));
    }
    spec.app = string_field(root, "app", "sim.app");
    if (!root.contains("initial_screen"))
        parse_error("missing initial_screen");
    spec.initial_screen = string_field(root, "initial_screen");
    spec.variables = store_field(root, "variables");

    if (!root.contains("screens") || !root["screens"].is_object())
        parse_error("screens must be an object");
    for (auto const& [id, screenDoc]: root["screens"].items())
    {
        if (!screenDoc.is_object())
            parse_error("screen '" + id + "' must be an object");
        auto screen = ScreenTemplate {};
        screen.scrollable = bool_field(screenDoc, "scrollable", false);
        if (screenDoc.contains("elements"))
        {
            if (!screenDoc["elements"].is_array())
                parse_error("screen '" + id + "' elements must be an array");
            for (auto const& element: screenDoc["elements"])
                screen.elements.push_back(parse_element(element));
        }
        spec.screens.emplace(id, std::move(screen));
    }

    if (root.contains("transitions"))
    {
        if (!root["transitions"].is_array())
            parse_error("transitions must be an array");
        for (auto const& doc: root["transitions"])
        {
            if (!doc.is_object() || !doc.contains("trigger") || !doc["trigger"].is_object())
                parse_error("each transition needs a trigger object");
            auto t = Transition {};
            t.from = string_field(doc, "from");
            t.to = string_field(doc, "to");
            t.trigger.label = string_field(doc["trigger"], "label");
            if (doc["trigger"].contains("text"))
                t.trigger.text = string_field(doc["trigger"], "text");
            t.effects = store_field(doc, "effects");
            t.requires_store = store_field(doc, "requires");
            spec.transitions.push_back(std::move(t));
        }
    }

    validate(spec);
    return spec;
}

auto load_spec_file(std::string const& path) -> SimAppSpec
{
    auto in = std::ifstream(path);
    if (!in)
        throw Error(ErrorCode::SpecParseError, "cannot read app spec " + path);
    auto buffer = std::stringstream {};
    buffer << in.rdbuf();
    return load_spec(buffer.str());
}

auto goal_from_json(json const& doc) -> GoalPredicate
{
    if (!doc.is_array())
        parse_error("goal must be an array of conditions");
    auto goal = GoalPredicate {};
    for (auto const& item: doc)
    {
        if (!item.is_object())
            parse_error("goal conditions must be objects");
        auto condition = GoalCondition {};
        if (item.contains("variable"))
        {
            condition.variable = string_field(item, "variable");
            if (!item.contains("equals"))
                parse_error("variable condition without 'equals'");
            condition.expected = string_field(item, "equals");
        }
        else if (item.contains("screen"))
            condition.screen_is = string_field(item, "screen");
        else
            parse_error("goal condition needs 'variable' or 'screen'");
        goal.conditions.push_back(std::move(condition));
    }
    if (goal.conditions.empty())
        parse_error("goal needs at least one condition");
    return goal;
}

auto to_json(GoalPredicate const& goal) -> json
{
    auto out = json::array();
    for (auto const& c: goal.conditions)
    {
        if (c.variable)
            out.push_back({ { "variable", *c.variable }, { "equals", c.expected } });
        else if (c.screen_is)
            out.push_back({ { "screen", *c.screen_is } });
    }
    return out;
}

// }}}
// {{{ state and rendering

auto initial_state(SimAppSpec const& spec) -> SimState
{
    return { spec.initial_screen, {}, spec.variables };
}

auto resource_id_for(SimAppSpec const& spec, std::string const& screenId, std::size_t index) -> std::string
{
    auto const& element = spec.screen(screenId).elements.at(index);
    auto const name =
        element.resource_name.empty() ? screenId + "_e" + std::to_string(index) : element.resource_name;
    return spec.app + ":id/" + name;
}

auto sim_capture(SimState const& state, SimAppSpec const& spec) -> screen::RawScreen
{
    auto const& templ = spec.screen(state.current);
    auto flag = [](bool b) { return std::string(b ? "true" : "false"); };

    auto container = screen::UiNode {};
    container.tag = "android.widget.FrameLayout";
    container.class_name = container.tag;
    container.attributes = {
        { "index", "0" },
        { "package", spec.app },
        { "class", container.tag },
        { "text", "" },
        { "resource-id", spec.app + ":id/screen_" + state.current },
        { "checkable", "false" },
        { "checked", "false" },
        { "clickable", "false" },
        { "enabled", "true" },
        { "scrollable", flag(templ.scrollable) },
        { "bounds", "[0,0][1080,2400]" },
    };

    for (auto i = std::size_t { 0 }; i < templ.elements.size(); ++i)
    {
        auto const& e = templ.elements[i];
        auto const isImage = e.class_name.ends_with("ImageView") || e.class_name.ends_with("ImageButton");
        auto const checked = e.checkable && state.store.contains(e.slot()) && state.store.at(e.slot()) == "true";
        auto const top = 120 * static_cast<int>(i);

        auto node = screen::UiNode {};
        node.tag = e.class_name;
        node.class_name = e.class_name;
        node.attributes = {
            { "index", std::to_string(i) },
            { "package", spec.app },
            { "class", e.class_name },
            { "text", isImage ? std::string() : e.label },
            { "content-desc", e.content_desc },
            { "resource-id", resource_id_for(spec, state.current, i) },
            { "checkable", flag(e.checkable) },
            { "checked", flag(checked) },
            { "clickable", flag(e.clickable) },
            { "enabled", flag(e.enabled) },
            { "scrollable", "false" },
            { "bounds", "[0," + std::to_string(top) + "][1080," + std::to_string(top + 120) + "]" },
        };
        container.children.push_back(std::move(node));
    }

    auto root = screen::UiNode {};
    root.tag = "hierarchy";
    root.class_name = "hierarchy";
    root.attributes = { { "rotation", "0" } };
    root.children.push_back(std::move(container));

    return { screen::to_xml(root), 0, "sim" };
}

// }}}
// {{{ transitions

namespace
{

auto guard_holds(Store const& store, Store const& guard) -> bool
{
    for (auto const& [key, value]: guard)
    {
        auto const it = store.find(key);
        if (it == store.end() || it->second != value)
            return false;
    }
    return true;
}

void fire(SimState& state, Transition const& t)
{
    if (t.to != state.current)
    {
        state.back_stack.push_back(state.current);
        state.current = t.to;
    }
    for (auto const& [key, value]: t.effects)
        state.store[key] = value;
}

auto find_transition(SimAppSpec const& spec, SimState const& state, ElementTemplate const& element,
                     std::optional<std::string> const& text) -> Transition const*
{
    for (auto const& t: spec.transitions)
        if (t.from == state.current && t.trigger.label == element.label && t.trigger.text == text
            && guard_holds(state.store, t.requires_store))
            return &t;
    return nullptr;
}

auto apply_tap(SimState state, SimAppSpec const& spec, ElementTemplate const& element) -> SimState
{
    if (auto const* t = find_transition(spec, state, element, std::nullopt))
        fire(state, *t);
    else if (element.checkable)
    {
        auto& slot = state.store[element.slot()];
        slot = slot == "true" ? "false" : "true";
    }
    return state;
}

auto apply_input(SimState state, SimAppSpec const& spec, ElementTemplate const& element, std::string const& text)
    -> SimState
{
    state.store[element.slot()] = text;
    if (auto const* t = find_transition(spec, state, element, text))
        fire(state, *t);
    return state;
}

auto template_index(SimState const& state, SimAppSpec const& spec, screen::Locator const& locator) -> std::size_t
{
    auto const& templ = spec.screen(state.current);
    if (auto const* byId = std::get_if<screen::ByResourceId>(&locator))
    {
        for (auto i = std::size_t { 0 }; i < templ.elements.size(); ++i)
            if (resource_id_for(spec, state.current, i) == byId->value)
                return i;
        throw Error(ErrorCode::UnknownElement, "no element with resource-id " + byId->value);
    }
    if (auto const* byPath = std::get_if<screen::ByIndexPath>(&locator))
    {
        auto const& path = byPath->path;
        if (path.size() == 2 && path[0] == 0 && path[1] >= 0 && static_cast<std::size_t>(path[1]) < templ.elements.size())
            return static_cast<std::size_t>(path[1]);
        throw Error(ErrorCode::UnknownElement, "no element at " + byPath->xpath());
    }
    throw Error(ErrorCode::UnknownElement, "navigation locator used for an element action");
}

} // namespace

auto sim_execute(SimState const& state, SimAppSpec const& spec, screen::Locator const& locator, Action const& action)
    -> SimState
{
    switch (action.kind)
    {
        case ActionKind::Back: {
            auto next = state;
            if (!next.back_stack.empty())
            {
                next.current = next.back_stack.back();
                next.back_stack.pop_back();
            }
            return next;
        }
        case ActionKind::ScrollUp:
        case ActionKind::ScrollDown: return state;
        case ActionKind::Terminate: throw Error(ErrorCode::ActionRejected, "terminate is not an executable action");
        case ActionKind::Tap:
        case ActionKind::InputText: break;
    }

    auto const index = template_index(state, spec, locator);
    auto const& element = spec.screen(state.current).elements[index];
    if (!element.enabled)
        throw Error(ErrorCode::ActionRejected, "element '" + element.label + "' is disabled");
    if (action.kind == ActionKind::InputText)
    {
        if (!element.is_editable())
            throw Error(ErrorCode::ActionRejected, "element '" + element.label + "' does not accept text");
        return apply_input(state, spec, element, action.text);
    }
    return apply_tap(state, spec, element);
}

auto check_goal(SimState const& state, GoalPredicate const& goal) -> bool
{
    if (goal.conditions.empty())
        return false;
    for (auto const& c: goal.conditions)
    {
        if (c.variable)
        {
            auto const it = state.store.find(*c.variable);
            if (it == state.store.end() || it->second != c.expected)
                return false;
        }
        if (c.screen_is && state.current != *c.screen_is)
            return false;
    }
    return true;
}

// }}}
// {{{ shortest paths

namespace
{

auto state_key(SimState const& state) -> std::string
{
    auto key = state.current;
    for (auto const& [name, value]: state.store)
    {
        key += '\x1f';
        key += name;
        key += '\x1e';
        key += value;
    }
    return key;
}

struct Successor
{
    Trigger trigger;
    SimState state;
};

auto successors(SimAppSpec const& spec, GoalPredicate const& goal, SimState const& state) -> std::vector<Successor>
{
    auto out = std::vector<Successor> {};
    for (auto const& element: spec.screen(state.current).elements)
    {
        if (!element.is_interactive() || !element.enabled)
            continue;
        if (element.is_editable())
        {
            auto texts = std::vector<std::string> {};
            auto addText = [&](std::string const& text) {
                if (std::find(texts.begin(), texts.end(), text) == texts.end())
                    texts.push_back(text);
            };
            for (auto const& t: spec.transitions)
                if (t.from == state.current && t.trigger.label == element.label && t.trigger.text)
                    addText(*t.trigger.text);
            for (auto const& t: spec.transitions)
                if (auto const it = t.requires_store.find(element.slot()); it != t.requires_store.end())
                    addText(it->second);
            for (auto const& c: goal.conditions)
                if (c.variable && *c.variable == element.slot())
                    addText(c.expected);
            for (auto const& text: texts)
                out.push_back({ { element.label, text }, apply_input(state, spec, element, text) });
        }
        out.push_back({ { element.label, std::nullopt }, apply_tap(state, spec, element) });
    }
    return out;
}

} // namespace

auto shortest_path_from(SimAppSpec const& spec, GoalPredicate const& goal, SimState const& start)
    -> std::optional<std::vector<PathStep>>
{
    if (check_goal(start, goal))
        return std::vector<PathStep> {};

    struct Visit
    {
        std::string parent;
        PathStep step;
    };
    auto visited = std::unordered_map<std::string, Visit> {};
    auto queue = std::deque<SimState> { start };
    auto const startKey = state_key(start);
    visited.emplace(startKey, Visit {});

    while (!queue.empty())
    {
        auto const state = std::move(queue.front());
        queue.pop_front();
        auto const key = state_key(state);

        for (auto& next: successors(spec, goal, state))
        {
            auto const nextKey = state_key(next.state);
            if (visited.contains(nextKey))
                continue;
            visited.emplace(nextKey, Visit { key, { state.current, next.trigger } });
            if (check_goal(next.state, goal))
            {
                auto path = std::vector<PathStep> {};
                for (auto k = nextKey; k != startKey; k = visited.at(k).parent)
                    path.push_back(visited.at(k).step);
                std::reverse(path.begin(), path.end());
                return path;
            }
            queue.push_back(std::move(next.state));
        }
    }
    return std::nullopt;
}

auto oracle_shortest_path(SimAppSpec const& spec, GoalPredicate const& goal) -> std::vector<PathStep>
{
    auto path = shortest_path_from(spec, goal, initial_state(spec));
    if (!path)
        throw Error(ErrorCode::NoPath, "goal is unreachable from '" + spec.initial_screen + "'");
    return std::move(*path);
}

// }}}
// {{{ SimDevice

SimDevice::SimDevice(SimAppSpec spec): _spec(std::move(spec)), _state(initial_state(_spec))
{
}

auto SimDevice::capture_source() -> screen::RawScreen
{
    if (!_open)
        throw Error(ErrorCode::SessionGone, "simulator session is closed");
    auto raw = sim_capture(_state, _spec);
    raw.captured_at = device::now_ms();
    return raw;
}

void SimDevice::execute(screen::Locator const& locator, Action const& action)
{
    if (!_open)
        throw Error(ErrorCode::SessionGone, "simulator session is closed");
    _state = sim_execute(_state, _spec, locator, action);
}

// }}}

} // namespace droidpilot::sim
