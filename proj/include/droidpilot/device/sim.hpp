// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <droidpilot/device/session.hpp>

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace droidpilot::sim
{

using Store = std::map<std::string, std::string>;

struct ElementTemplate
{
    std::string class_name = "android.widget.TextView";
    std::string label;         // text shown on screen; transition triggers refer to it
    std::string content_desc;
    std::string resource_name; // suffix of the resource-id; generated when empty
    bool clickable = false;
    bool checkable = false;
    bool enabled = true;
    std::string variable;      // store slot for text input / check state; defaults to label

    [[nodiscard]] auto is_editable() const -> bool;
    [[nodiscard]] auto is_interactive() const -> bool { return clickable || checkable || is_editable(); }
    [[nodiscard]] auto slot() const -> std::string const& { return variable.empty() ? label : variable; }
};

struct ScreenTemplate
{
    std::vector<ElementTemplate> elements;
    bool scrollable = false;
};

struct Trigger
{
    std::string label;
    std::optional<std::string> text; // required input text (exact, case-sensitive)
    auto operator==(Trigger const&) const -> bool = default;
};

struct Transition
{
    std::string from;
    Trigger trigger;
    std::string to;
    Store effects;
    Store requires_store; // guard: store values that must hold for the transition to fire
};

struct SimAppSpec
{
    int spec_version = 1;
    std::string app;
    std::map<std::string, ScreenTemplate> screens;
    std::vector<Transition> transitions;
    std::string initial_screen;
    Store variables;

    [[nodiscard]] auto screen(std::string const& id) const -> ScreenTemplate const&;
};

struct SimState
{
    std::string current;
    std::vector<std::string> back_stack;
    Store store;

    auto operator==(SimState const&) const -> bool = default;
};

struct GoalCondition
{
    std::optional<std::string> variable;
    std::string expected;
    std::optional<std::string> screen_is;
};

struct GoalPredicate
{
    std::vector<GoalCondition> conditions;
};

inline constexpr int SpecVersion = 1;

/// Parses an app-spec JSON document and checks every reference.
/// Throws Error{SpecParseError} or Error{DanglingReference}.
[[nodiscard]] auto load_spec(std::string_view doc) -> SimAppSpec;
[[nodiscard]] auto load_spec_file(std::string const& path) -> SimAppSpec;

/// `[{"variable": v, "equals": x} | {"screen": id}, ...]`. Throws Error{SpecParseError}.
[[nodiscard]] auto goal_from_json(nlohmann::json const& doc) -> GoalPredicate;
[[nodiscard]] auto to_json(GoalPredicate const& goal) -> nlohmann::json;

[[nodiscard]] auto initial_state(SimAppSpec const& spec) -> SimState;

/// Renders the current screen as a UI-hierarchy dump (same dialect as a device).
[[nodiscard]] auto sim_capture(SimState const& state, SimAppSpec const& spec) -> screen::RawScreen;

/// resource-id given to template `index` of screen `screenId`.
[[nodiscard]] auto resource_id_for(SimAppSpec const& spec, std::string const& screenId, std::size_t index)
    -> std::string;

/// Applies one action. Throws Error{UnknownElement} when the locator matches no
/// template and Error{ActionRejected} for disabled templates or Terminate.
[[nodiscard]] auto sim_execute(SimState const& state, SimAppSpec const& spec, screen::Locator const& locator,
                               Action const& action) -> SimState;

[[nodiscard]] auto check_goal(SimState const& state, GoalPredicate const& goal) -> bool;

struct PathStep
{
    std::string screen;
    Trigger trigger;
    auto operator==(PathStep const&) const -> bool = default;
};

/// Breadth-first search over (screen, store) states using forward triggers.
/// Returns a minimal trigger sequence, or nullopt when no goal state is reachable.
[[nodiscard]] auto shortest_path_from(SimAppSpec const& spec, GoalPredicate const& goal, SimState const& start)
    -> std::optional<std::vector<PathStep>>;

/// Minimal path from the initial state. Throws Error{NoPath}.
[[nodiscard]] auto oracle_shortest_path(SimAppSpec const& spec, GoalPredicate const& goal) -> std::vector<PathStep>;

/// DeviceSession over the simulator.
class SimDevice final: public device::DeviceSession
{
  public:
    explicit SimDevice(SimAppSpec spec);

    [[nodiscard]] auto capture_source() -> screen::RawScreen override;
    void execute(screen::Locator const& locator, Action const& action) override;
    void close() override { _open = false; }
    [[nodiscard]] auto tag() const -> std::string override { return "sim"; }

    [[nodiscard]] auto state() const -> SimState const& { return _state; }
    [[nodiscard]] auto spec() const -> SimAppSpec const& { return _spec; }

  private:
    SimAppSpec _spec;
    SimState _state;
    bool _open = true;
};

} // namespace droidpilot::sim
