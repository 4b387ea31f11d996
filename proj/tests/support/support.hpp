// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <droidpilot/agent/types.hpp>
#include <droidpilot/device/sim.hpp>
#include <droidpilot/eval/metrics.hpp>
#include <droidpilot/llm/backend.hpp>
#include <droidpilot/prompt/decision.hpp>

#include <httplib.h>

#include <droidpilot/screen/ui_tree.hpp>

#include <functional>
#include <random>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace support
{

using namespace droidpilot;

auto fixture_path(std::string const& relative) -> std::string;
auto read_text(std::string const& path) -> std::string;

struct Fixture
{
    sim::SimAppSpec spec;
    agent::TestCase test;
};

/// Loads tests/fixtures/cases/<name>.json and the app spec it names.
auto load_case(std::string const& name) -> Fixture;
auto case_names() -> std::vector<std::string>;

/// A schema-complete decision selecting `id`.
auto decision(int id, std::string text = std::string(prompt::NoValue)) -> prompt::Decision;
auto finish_decision() -> prompt::Decision;
auto respond(prompt::Decision const& d) -> std::string;

/// Refined id of template `index` on the current simulator screen.
auto element_id(sim::SimDevice& device, std::size_t index) -> int;
auto template_index(sim::SimAppSpec const& spec, std::string const& screen, std::string const& label) -> std::size_t;

/// Responses that walk the oracle shortest path, then finish.
auto oracle_responses(sim::SimAppSpec const& spec, sim::GoalPredicate const& goal) -> std::vector<std::string>;

/// One scripted step: tap/type on a template label, Back, or finish.
struct Move
{
    enum Kind
    {
        Label,
        Back,
        Finish,
    } kind = Label;
    std::string label;
    std::optional<std::string> text;
};

/// Plays `moves` on a private simulator and returns the matching responses.
auto scripted_responses(sim::SimAppSpec const& spec, std::vector<Move> const& moves) -> std::vector<std::string>;

auto script_of(std::vector<std::string> const& responses) -> llm::ReplayScript;

/// Hand-made trace record: `before`/`after` are arbitrary screen tags.
auto record(int step, Action action, std::string before, std::string after, std::int64_t latency_ms = 1000)
    -> agent::ActionRecord;
auto trace_of(std::string id, std::vector<agent::ActionRecord> records,
              agent::VerdictKind verdict = agent::VerdictKind::Completed) -> agent::ExecutionTrace;

/// Ten Completed traces: 7 judged successful, 20 executed steps at 11.8 s each,
/// 9 oracle-flagged erroneous steps of which 7 are recovered.
struct MetricSet
{
    std::vector<agent::ExecutionTrace> traces;
    eval::VerdictMap verdicts;
    eval::OracleMap oracles;
};

auto constructed_metric_set() -> MetricSet;

/// [A, B (erroneous), Back, C, Terminate] with its oracle (shortest length 2).
auto distill_example() -> std::pair<agent::ExecutionTrace, eval::TraceOracle>;

/// Random `<hierarchy><node .../>...` tree with exactly `nodes` nodes (root included).
/// Attribute values draw from a pool that includes XML-special characters.
auto random_tree(std::mt19937& rng, int nodes) -> screen::UiNode;

/// Independent interactivity predicate used as the oracle in property tests.
auto oracle_interactive(screen::UiNode const& node) -> bool;

/// The fixed (screen, goal, history) triples behind the golden prompt files.
struct PromptTriple
{
    std::string name;
    std::string screen_file; // under fixtures/screens
    std::string goal;
    std::vector<std::string> history;
};

auto prompt_triples() -> std::vector<PromptTriple>;
auto build_triple_prompt(PromptTriple const& triple) -> std::string;
auto golden_prompt_path(PromptTriple const& triple) -> std::string;

/// httplib server on an ephemeral port, logging "METHOD path" per request.
class StubServer
{
  public:
    StubServer();
    ~StubServer();
    StubServer(StubServer const&) = delete;
    auto operator=(StubServer const&) -> StubServer& = delete;

    auto server() -> httplib::Server& { return _server; }
    void start();
    [[nodiscard]] auto url() const -> std::string;
    [[nodiscard]] auto log() const -> std::vector<std::string>;
    [[nodiscard]] auto bodies() const -> std::vector<std::string>;
    void clear_log();

  private:
    httplib::Server _server;
    std::thread _thread;
    int _port = 0;
    mutable std::mutex _mutex;
    std::vector<std::string> _log;
    std::vector<std::string> _bodies;
};

/// Minimal W3C/Appium endpoints for session "abc" serving `source` as the page
/// source. Element queries whose value contains "missing" answer "no such element";
/// found elements are called "el-1".
void install_webdriver_stub(StubServer& stub, std::string source);

} // namespace support
