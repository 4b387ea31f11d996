// SPDX-License-Identifier: Apache-2.0
#include "../support/support.hpp"

#include <droidpilot/error.hpp>
#include <droidpilot/screen/refine.hpp>

#include <doctest.h>

using namespace droidpilot;
using namespace droidpilot::sim;

namespace
{

auto code_of(auto&& fn) -> ErrorCode
{
    try
    {
        fn();
    }
    catch (Error const& e)
    {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidInput;
}

auto tap_label(SimState const& state, SimAppSpec const& spec, std::string const& label) -> SimState
{
    auto const index = support::template_index(spec, state.current, label);
    return sim_execute(state, spec, screen::ByResourceId { resource_id_for(spec, state.current, index) }, Action::tap(0));
}

auto back(SimState const& state, SimAppSpec const& spec) -> SimState
{
    return sim_execute(state, spec, screen::Navigate { screen::NavCommand::Back }, Action::back(0));
}

constexpr auto Minimal = R"({"initial_screen": "a", "screens": {"a": {"elements": [{"label": "Go", "clickable": true}]}}})";

} // namespace

TEST_SUITE("sim")
{
    TEST_CASE("minimal spec loads")
    {
        auto const spec = load_spec(Minimal);
        CHECK(spec.initial_screen == "a");
        CHECK(initial_state(spec).current == "a");
        CHECK(spec.spec_version == SpecVersion);
    }

    TEST_CASE("spec validation")
    {
        CHECK(code_of([] {
                  (void) load_spec(R"({"initial_screen": "a", "screens": {"a": {"elements": [{"label": "Go", "clickable": true}]}},
                     "transitions": [{"from": "a", "trigger": {"label": "Go"}, "to": "nowhere"}]})");
              })
              == ErrorCode::DanglingReference);
        CHECK(code_of([] { (void) load_spec(R"({"initial_screen": "zzz", "screens": {"a": {}}})"); })
              == ErrorCode::DanglingReference);
        CHECK(code_of([] {
                  (void) load_spec(R"({"initial_screen": "a", "screens": {"a": {"elements": [{"label": "Go", "clickable": true}]}},
                     "transitions": [{"from": "a", "trigger": {"label": "Nope"}, "to": "a"}]})");
              })
              == ErrorCode::DanglingReference);
        CHECK(code_of([] { (void) load_spec("{not json"); }) == ErrorCode::SpecParseError);
        CHECK(code_of([] { (void) load_spec(R"({"screens": {"a": {}}})"); }) == ErrorCode::SpecParseError);
        CHECK(code_of([] { (void) load_spec(R"({"spec_version": 99, "initial_screen": "a", "screens": {"a": {}}})"); })
              == ErrorCode::SpecParseError);
        CHECK(code_of([] { (void) load_spec_file("/nonexistent.json"); }) == ErrorCode::SpecParseError);
    }

    TEST_CASE("contacts fixture shape and walk-through")
    {
        auto const [spec, test] = support::load_case("contacts-delete");
        CHECK(spec.screens.size() == 3);
        CHECK(spec.transitions.size() == 4);
        REQUIRE(test.goal);

        auto state = initial_state(spec);
        CHECK(!check_goal(state, *test.goal));
        state = tap_label(state, spec, "Alice Moreau");
        CHECK(state.current == "detail");
        auto const depth = state.back_stack.size();
        state = tap_label(state, spec, "Delete");
        CHECK(state.current == "confirm");
        CHECK(state.back_stack.size() == depth + 1);
        state = tap_label(state, spec, "OK");
        CHECK(state.current == "list");
        CHECK(check_goal(state, *test.goal));
    }

    TEST_CASE("back semantics")
    {
        auto const spec = support::load_case("contacts-delete").spec;
        auto const start = initial_state(spec);
        CHECK(back(start, spec) == start);
        auto const moved = tap_label(start, spec, "Alice Moreau");
        CHECK(back(moved, spec).current == start.current);

        // Store effects survive Back.
        auto s = tap_label(tap_label(moved, spec, "Delete"), spec, "OK");
        CHECK(s.store.at("contact_alice") == "deleted");
        s = back(s, spec);
        CHECK(s.store.at("contact_alice") == "deleted");
    }

    TEST_CASE("goal semantics")
    {
        auto const goal = goal_from_json(nlohmann::json::parse(R"([{"variable": "missing", "equals": "x"}])"));
        CHECK(!check_goal(SimState { "a", {}, {} }, goal));
        CHECK(!check_goal(SimState { "a", {}, {} }, GoalPredicate {}));
        auto const screenGoal = goal_from_json(nlohmann::json::parse(R"([{"screen": "a"}])"));
        CHECK(check_goal(SimState { "a", {}, {} }, screenGoal));
        CHECK(to_json(screenGoal) == nlohmann::json::parse(R"([{"screen": "a"}])"));
        CHECK(code_of([] { (void) goal_from_json(nlohmann::json::parse(R"([{"variable": "x"}])")); })
              == ErrorCode::SpecParseError);
    }

    TEST_CASE("capture: one clickable node per button, deterministic")
    {
        auto const spec = load_spec(R"({"initial_screen": "a", "screens": {"a": {"elements": [{"label": "Delete", "clickable": true}]}}})");
        auto const state = initial_state(spec);
        auto const raw = sim_capture(state, spec);
        CHECK(raw.source == sim_capture(state, spec).source);
        auto const root = screen::parse_xml(raw.source);
        auto clickable = std::vector<std::string> {};
        auto walk = [&](auto&& self, screen::UiNode const& n) -> void {
            if (n.flag("clickable"))
                clickable.emplace_back(n.attr_or_empty("text"));
            for (auto const& c: n.children)
                self(self, c);
        };
        walk(walk, root);
        CHECK(clickable == std::vector<std::string> { "Delete" });
    }

    TEST_CASE("every fixture screen refines to interactive templates plus synthetics")
    {
        for (auto const& name: support::case_names())
        {
            auto const spec = support::load_case(name).spec;
            for (auto const& [id, templ]: spec.screens)
            {
                CAPTURE(name);
                CAPTURE(id);
                auto state = initial_state(spec);
                state.current = id;
                auto const screen = screen::refine_raw(sim_capture(state, spec));
                auto const interactive = std::count_if(templ.elements.begin(), templ.elements.end(),
                                                       [](auto const& e) { return e.is_interactive(); });
                CHECK(screen.elements.size() == static_cast<std::size_t>(interactive) + 1 + (templ.scrollable ? 2 : 0));
            }
        }
    }

    TEST_CASE("input, guards and toggles")
    {
        auto const spec = support::load_case("login").spec;
        auto state = initial_state(spec);
        auto const email = support::template_index(spec, "login", "Email");
        auto const password = support::template_index(spec, "login", "Password");
        auto type = [&](std::size_t index, std::string text) {
            state = sim_execute(state, spec, screen::ByIndexPath { { 0, static_cast<int>(index) } }, Action::input(0, text));
        };
        state = tap_label(state, spec, "Sign in");
        CHECK(state.current == "login");
        type(email, "alice@example.com");
        type(password, "wrong");
        state = tap_label(state, spec, "Sign in");
        CHECK(state.current == "login");
        type(password, "hunter2");
        state = tap_label(state, spec, "Sign in");
        CHECK(state.current == "home");

        auto const toggles = support::load_case("decoy-dark-mode").spec;
        auto s = tap_label(initial_state(toggles), toggles, "Settings");
        s = tap_label(s, toggles, "Dark mode");
        CHECK(s.store.at("dark_mode") == "true");
        s = tap_label(s, toggles, "Dark mode");
        CHECK(s.store.at("dark_mode") == "false");
    }

    TEST_CASE("rejections")
    {
        auto const spec = support::load_case("mute-email").spec;
        auto state = initial_state(spec);
        state.current = "notifications";
        auto const vibrate = support::template_index(spec, "notifications", "Vibrate");
        CHECK(code_of([&] { (void) sim_execute(state, spec, screen::ByIndexPath { { 0, static_cast<int>(vibrate) } }, Action::tap(0)); })
              == ErrorCode::ActionRejected);
        CHECK(code_of([&] { (void) sim_execute(state, spec, screen::ByResourceId { "nope" }, Action::tap(0)); })
              == ErrorCode::UnknownElement);
        CHECK(code_of([&] { (void) sim_execute(state, spec, screen::ByIndexPath { { 0, 42 } }, Action::tap(0)); })
              == ErrorCode::UnknownElement);
        CHECK(code_of([&] { (void) sim_execute(state, spec, screen::Navigate { screen::NavCommand::Back }, Action::terminate()); })
              == ErrorCode::ActionRejected);
        auto device = SimDevice(spec);
        device.close();
        CHECK(code_of([&] { (void) device.capture_source(); }) == ErrorCode::SessionGone);
    }

    TEST_CASE("shortest paths")
    {
        auto const contacts = support::load_case("contacts-delete");
        auto const path = oracle_shortest_path(contacts.spec, *contacts.test.goal);
        REQUIRE(path.size() == 3);
        CHECK(path[0] == PathStep { "list", { "Alice Moreau", std::nullopt } });
        CHECK(path[1] == PathStep { "detail", { "Delete", std::nullopt } });
        CHECK(path[2] == PathStep { "confirm", { "OK", std::nullopt } });

        auto const already = goal_from_json(nlohmann::json::parse(R"([{"variable": "contact_alice", "equals": "present"}])"));
        CHECK(oracle_shortest_path(contacts.spec, already).empty());
        auto const impossible = goal_from_json(nlohmann::json::parse(R"([{"variable": "contact_alice", "equals": "merged"}])"));
        CHECK(code_of([&] { (void) oracle_shortest_path(contacts.spec, impossible); }) == ErrorCode::NoPath);

        auto const expected = std::map<std::string, std::size_t> {
            { "contacts-delete", 3 }, { "decoy-dark-mode", 2 }, { "login", 3 }, { "mute-email", 4 }, { "notes-new", 3 },
        };
        for (auto const& [name, length]: expected)
        {
            CAPTURE(name);
            auto const f = support::load_case(name);
            CHECK(oracle_shortest_path(f.spec, *f.test.goal).size() == length);
        }
    }

    TEST_CASE("determinism")
    {
        auto const spec = support::load_case("notes-new").spec;
        auto const a = tap_label(initial_state(spec), spec, "New note");
        auto const b = tap_label(initial_state(spec), spec, "New note");
        CHECK(a == b);
    }
}
