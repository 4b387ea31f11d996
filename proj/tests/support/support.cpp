// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <droidpilot/agent/trace_io.hpp>
#include <droidpilot/error.hpp>
#include <droidpilot/prompt/prompt.hpp>
#include <droidpilot/screen/refine.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace support
{

namespace fs = std::filesystem;

auto fixture_path(std::string const& relative) -> std::string
{
    return (fs::path(DROIDPILOT_FIXTURES) / relative).string();
}

auto read_text(std::string const& path) -> std::string
{
    auto in = std::ifstream(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path);
    auto buf = std::ostringstream {};
    buf << in.rdbuf();
    return buf.str();
}

auto load_case(std::string const& name) -> Fixture
{
    auto const path = fs::path(fixture_path("cases/" + name + ".json"));
    auto test = agent::test_case_from_json(nlohmann::json::parse(read_text(path.string())));
    auto spec = sim::load_spec_file((path.parent_path() / test.app_binding).lexically_normal().string());
    return { std::move(spec), std::move(test) };
}

auto case_names() -> std::vector<std::string>
{
    auto names = std::vector<std::string> {};
    for (auto const& entry: fs::directory_iterator(fixture_path("cases")))
        if (entry.path().extension() == ".json")
            names.push_back(entry.path().stem().string());
    std::sort(names.begin(), names.end());
    return names;
}

auto decision(int id, std::string text) -> prompt::Decision
{
    auto d = prompt::Decision {};
    d.goal_action_plan = "Follow the goal step by step.";
    d.past_actions_summary = "See the history.";
    d.no_further_action_needed = "The goal is not reached yet.";
    d.no_further_action_needed_bool = false;
    d.immediate_next_action = "Use element " + std::to_string(id) + ".";
    d.current_screen_actions = { { "use element", id } };
    d.selected_current_screen_action = { "It moves toward the goal.", "use element", id };
    d.repeating_past_action = "No.";
    d.repeating_past_action_bool = false;
    d.id = id;
    d.text_input_value = std::move(text);
    return d;
}

auto finish_decision() -> prompt::Decision
{
    auto d = decision(-1);
    d.no_further_action_needed = "The goal is reached.";
    d.no_further_action_needed_bool = true;
    d.immediate_next_action = "None.";
    d.current_screen_actions = {};
    d.selected_current_screen_action = { "Done.", "none", -1 };
    return d;
}

auto respond(prompt::Decision const& d) -> std::string
{
    return prompt::to_canonical_json(d);
}

auto element_id(sim::SimDevice& device, std::size_t index) -> int
{
    auto const screen = screen::refine_raw(device.capture_source());
    for (auto const& e: screen.elements)
        if (e.source_path == std::vector<int> { 0, static_cast<int>(index) })
            return e.id;
    throw std::runtime_error("template " + std::to_string(index) + " is not an element");
}

auto template_index(sim::SimAppSpec const& spec, std::string const& screenId, std::string const& label) -> std::size_t
{
    auto const& elements = spec.screen(screenId).elements;
    for (auto i = std::size_t { 0 }; i < elements.size(); ++i)
        if (elements[i].label == label && elements[i].is_interactive())
            return i;
    throw std::runtime_error("no element '" + label + "' on " + screenId);
}

namespace
{

auto play(sim::SimDevice& device, Move const& move) -> std::string
{
    auto const screen = screen::refine_raw(device.capture_source());
    if (move.kind == Move::Finish)
        return respond(finish_decision());
    auto d = prompt::Decision {};
    auto action = Action {};
    if (move.kind == Move::Back)
    {
        d = decision(screen.back_id());
        action = Action::back(screen.back_id());
    }
    else
    {
        auto const id = element_id(device, template_index(device.spec(), device.state().current, move.label));
        d = move.text ? decision(id, *move.text) : decision(id);
        action = move.text ? Action::input(id, *move.text) : Action::tap(id);
    }
    device.execute(screen::resolve_locator(screen, action.element_id), action);
    return respond(d);
}

} // namespace

auto scripted_responses(sim::SimAppSpec const& spec, std::vector<Move> const& moves) -> std::vector<std::string>
{
    auto device = sim::SimDevice(spec);
    auto out = std::vector<std::string> {};
    for (auto const& move: moves)
        out.push_back(play(device, move));
    return out;
}

auto oracle_responses(sim::SimAppSpec const& spec, sim::GoalPredicate const& goal) -> std::vector<std::string>
{
    auto moves = std::vector<Move> {};
    for (auto const& step: sim::oracle_shortest_path(spec, goal))
        moves.push_back({ Move::Label, step.trigger.label, step.trigger.text });
    moves.push_back({ Move::Finish, {}, {} });
    return scripted_responses(spec, moves);
}

auto script_of(std::vector<std::string> const& responses) -> llm::ReplayScript
{
    auto script = llm::ReplayScript {};
    for (auto i = std::size_t { 0 }; i < responses.size(); ++i)
        script.entries.push_back({ static_cast<int>(i) + 1, responses[i] });
    return script;
}

auto record(int step, Action action, std::string before, std::string after, std::int64_t latency_ms)
    -> agent::ActionRecord
{
    auto r = agent::ActionRecord {};
    r.step = step;
    r.action = action;
    r.element_label = "element " + std::to_string(action.element_id);
    r.screen_hash_before = std::move(before);
    r.screen_hash_after = std::move(after);
    r.decision = action.kind == ActionKind::Terminate ? finish_decision()
                 : action.kind == ActionKind::InputText ? decision(action.element_id, action.text)
                                                        : decision(action.element_id);
    r.latency = std::chrono::milliseconds(latency_ms);
    r.prompt = "prompt for step " + std::to_string(step);
    r.raw_response = respond(r.decision);
    return r;
}

auto trace_of(std::string id, std::vector<agent::ActionRecord> records, agent::VerdictKind verdict)
    -> agent::ExecutionTrace
{
    auto t = agent::ExecutionTrace {};
    t.trace_id = id;
    t.test.id = std::move(id);
    t.test.description = "constructed trace";
    t.test.app_binding = "com.example.app";
    t.records = std::move(records);
    t.verdict.kind = verdict;
    t.model = "gpt-4o";
    t.backend = "sim";
    return t;
}

auto constructed_metric_set() -> MetricSet
{
    constexpr auto StepMs = 11'800;
    auto set = MetricSet {};
    auto add = [&](std::string id, std::vector<Action> actions, std::vector<std::string> screens,
                   std::vector<bool> erroneous, bool success) {
        auto records = std::vector<agent::ActionRecord> {};
        for (auto i = std::size_t { 0 }; i < actions.size(); ++i)
            records.push_back(record(static_cast<int>(i) + 1, actions[i], screens[i], screens[i + 1], StepMs));
        records.push_back(record(static_cast<int>(actions.size()) + 1, Action::terminate(), screens.back(),
                                 screens.back(), 5'000));
        erroneous.push_back(false);
        set.verdicts[id] = success;
        set.oracles[id] = { std::move(erroneous), static_cast<int>(actions.size()) };
        set.traces.push_back(trace_of(std::move(id), std::move(records)));
    };
    auto const tap = [](int id) { return Action::tap(id); };
    auto const back = Action::back(9);

    // Four wrong turns, each undone by Back and followed by a different choice.
    add("t01", { tap(1), back, tap(2), back, tap(3), back, tap(4), back, tap(5) },
        { "h", "w1", "h", "w2", "h", "w3", "h", "w4", "h", "goal" },
        { true, false, true, false, true, false, true, false, false }, true);
    add("t02", { tap(1), back, tap(2), back, tap(3), back, tap(4) },
        { "h", "w1", "h", "w2", "h", "w3", "h", "goal" }, { true, false, true, false, true, false, false }, true);
    // Wrong turns never undone.
    add("t03", { tap(6) }, { "h", "dead" }, { true }, false);
    add("t04", { tap(7) }, { "h", "dead" }, { true }, false);
    add("t05", { tap(1) }, { "h", "goal" }, { false }, true);
    add("t06", { tap(1) }, { "h", "goal" }, { false }, true);
    add("t07", {}, { "goal" }, {}, true);
    add("t08", {}, { "goal" }, {}, true);
    add("t09", {}, { "goal" }, {}, true);
    add("t10", {}, { "h" }, {}, false);
    return set;
}

auto distill_example() -> std::pair<agent::ExecutionTrace, eval::TraceOracle>
{
    auto trace = trace_of("distill-example",
                          { record(1, Action::tap(1), "s0", "s1"), record(2, Action::tap(4), "s1", "wrong"),
                            record(3, Action::back(7), "wrong", "s1"), record(4, Action::tap(2), "s1", "goal"),
                            record(5, Action::terminate(), "goal", "goal") });
    return { std::move(trace), eval::TraceOracle { { false, true, false, false, false }, 2 } };
}

auto random_tree(std::mt19937& rng, int nodes) -> screen::UiNode
{
    static auto const classes = std::vector<std::string> {
        "android.widget.FrameLayout", "android.widget.LinearLayout", "android.widget.TextView",
        "android.widget.Button",      "android.widget.EditText",     "android.widget.ImageView",
        "android.widget.ImageButton", "android.widget.CheckBox",     "android.widget.Switch",
        "androidx.recyclerview.widget.RecyclerView", "android.widget.AutoCompleteTextView", "android.view.View",
    };
    static auto const texts = std::vector<std::string> {
        "", "", "", "OK", "Cancel", "Sign in", "Tom & Jerry", "a < b", "\"quoted\"", "it's", "Caf\xc3\xa9",
        "line\nbreak", "tab\there", "100%", "<tag>", "Settings",
    };
    auto pick = [&](auto const& pool) -> auto const& {
        return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    };
    auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };
    auto flag = [](bool b) { return std::string(b ? "true" : "false"); };

    auto make = [&](int index) {
        auto node = screen::UiNode {};
        node.tag = "node";
        node.class_name = pick(classes);
        node.attributes = {
            { "index", std::to_string(index) },
            { "text", pick(texts) },
            { "resource-id", chance(0.3) ? "com.example:id/" + std::string(chance(0.3) ? "ic_delete" : "v" + std::to_string(index)) : "" },
            { "class", node.class_name },
            { "package", "com.example" },
            { "content-desc", chance(0.2) ? pick(texts) : "" },
            { "checkable", flag(chance(0.1)) },
            { "checked", flag(chance(0.5)) },
            { "clickable", flag(chance(0.3)) },
            { "enabled", flag(chance(0.9)) },
            { "scrollable", flag(chance(0.02)) },
            { "bounds", "[0,0][100,100]" },
        };
        return node;
    };

    auto root = screen::UiNode {};
    root.tag = "hierarchy";
    root.class_name = "hierarchy";
    root.attributes = { { "rotation", "0" } };
    // Attach each new node under a random existing node (pre-order ids fixed up by the parser).
    auto paths = std::vector<std::vector<int>> { {} };
    for (auto i = 1; i < nodes; ++i)
    {
        auto const parentPath = paths[std::uniform_int_distribution<std::size_t>(0, paths.size() - 1)(rng)];
        auto* parent = &root;
        for (auto k: parentPath)
            parent = &parent->children[static_cast<std::size_t>(k)];
        parent->children.push_back(make(i));
        auto childPath = parentPath;
        childPath.push_back(static_cast<int>(parent->children.size()) - 1);
        paths.push_back(std::move(childPath));
    }
    return root;
}

auto oracle_interactive(screen::UiNode const& node) -> bool
{
    auto attr = [&](std::string const& name) {
        for (auto const& [k, v]: node.attributes)
            if (k == name)
                return v;
        return std::string();
    };
    auto const cls = attr("class");
    auto endsWith = [&](std::string const& suffix) {
        return cls.size() >= suffix.size() && cls.compare(cls.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    return attr("clickable") == "true" || attr("checkable") == "true" || endsWith("EditText")
           || endsWith("AutoCompleteTextView");
}

auto prompt_triples() -> std::vector<PromptTriple>
{
    return {
        { "login-first-step", "login.xml", "Log in the application by entering user name and password", {} },
        { "settings-one-step",
          "settings.xml",
          "Disable email notifications from the Settings menu",
          { "Step 1: tapped 'Settings' (id=4)" } },
        { "empty-multiline-goal", "empty.xml", "Go back\nto the home screen", {
              "Step 1: tapped 'Menu' (id=2)", "Step 2: tapped 'Profile' (id=0)" } },
        { "login-mixed-history",
          "login.xml",
          "Sign in as alice and confirm",
          { "Step 1: entered text 'alice' into 'Email' (id=0)", "Step 2: pressed Back", "Step 3: scrolled down",
            "Step 4: scrolled up" } },
        { "settings-quoted-goal", "settings.xml", "Turn off \"Email notifications\" & check Do not disturb", {} },
    };
}

auto build_triple_prompt(PromptTriple const& triple) -> std::string
{
    auto const screen = screen::refine_raw({ read_text(fixture_path("screens/" + triple.screen_file)), 0, "file" });
    return prompt::build_prompt({ triple.goal, triple.history, screen::render(screen) });
}

auto golden_prompt_path(PromptTriple const& triple) -> std::string
{
    return fixture_path("golden/prompt-" + triple.name + ".txt");
}

StubServer::StubServer()
{
    // Logged before the response goes out.
    _server.set_post_routing_handler([this](httplib::Request const& req, httplib::Response&) {
        auto lock = std::lock_guard(_mutex);
        _log.push_back(req.method + " " + req.path);
        _bodies.push_back(req.body);
    });
}

StubServer::~StubServer()
{
    _server.stop();
    if (_thread.joinable())
        _thread.join();
}

void StubServer::start()
{
    _port = _server.bind_to_any_port("127.0.0.1");
    _thread = std::thread([this] { _server.listen_after_bind(); });
    _server.wait_until_ready();
}

auto StubServer::url() const -> std::string
{
    return "http://127.0.0.1:" + std::to_string(_port);
}

auto StubServer::log() const -> std::vector<std::string>
{
    auto lock = std::lock_guard(_mutex);
    return _log;
}

auto StubServer::bodies() const -> std::vector<std::string>
{
    auto lock = std::lock_guard(_mutex);
    return _bodies;
}

void StubServer::clear_log()
{
    auto lock = std::lock_guard(_mutex);
    _log.clear();
    _bodies.clear();
}

void install_webdriver_stub(StubServer& stub, std::string source)
{
    using nlohmann::json;
    auto& server = stub.server();
    auto ok = [](httplib::Response& res, json value) {
        res.set_content(json { { "value", std::move(value) } }.dump(), "application/json");
    };
    server.Post("/session", [ok](httplib::Request const&, httplib::Response& res) {
        ok(res, { { "sessionId", "abc" }, { "capabilities", json::object() } });
    });
    server.Get("/session/abc/source", [ok, source](httplib::Request const&, httplib::Response& res) { ok(res, source); });
    server.Post("/session/abc/element", [ok](httplib::Request const& req, httplib::Response& res) {
        auto const body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || body.value("value", std::string()).find("missing") != std::string::npos)
        {
            res.status = 404;
            res.set_content(json { { "value", { { "error", "no such element" }, { "message", "not found" } } } }.dump(),
                            "application/json");
            return;
        }
        ok(res, { { "element-6066-11e4-a52e-4f735466cecf", "el-1" } });
    });
    server.Post(R"(/session/abc/element/([^/]+)/click)",
                [ok](httplib::Request const&, httplib::Response& res) { ok(res, nullptr); });
    server.Post(R"(/session/abc/element/([^/]+)/value)",
                [ok](httplib::Request const&, httplib::Response& res) { ok(res, nullptr); });
    server.Post("/session/abc/back", [ok](httplib::Request const&, httplib::Response& res) { ok(res, nullptr); });
    server.Post("/session/abc/execute/sync", [ok](httplib::Request const&, httplib::Response& res) { ok(res, nullptr); });
    server.Delete("/session/abc", [ok](httplib::Request const&, httplib::Response& res) { ok(res, nullptr); });
}

} // namespace support
