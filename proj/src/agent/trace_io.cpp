// SPDX-License-Identifier: Apache-2.0
#include <droidpilot/agent/trace_io.hpp>
#include <droidpilot/error.hpp>

#include <fstream>
#include <istream>
#include <ostream>

namespace droidpilot::agent
{

using nlohmann::json;
using nlohmann::ordered_json;

namespace
{

[[noreturn]] void invalid(std::string const& what)
{
    throw Error(ErrorCode::InvalidInput, what);
}

auto dump_line(ordered_json const& doc) -> std::string
{
    return doc.dump(-1, ' ', false, json::error_handler_t::replace);
}

template <typename T>
auto field(json const& doc, char const* key) -> T
{
    if (!doc.contains(key))
        invalid(std::string("trace field '") + key + "' is missing");
    try
    {
        return doc[key].get<T>();
    }
    catch (json::exception const&)
    {
        invalid(std::string("trace field '") + key + "' has the wrong type");
    }
}

} // namespace

auto to_json(Action const& action) -> ordered_json
{
    auto out = ordered_json::object();
    out["kind"] = to_string(action.kind);
    out["id"] = action.element_id;
    if (action.kind == ActionKind::InputText)
        out["text"] = action.text;
    return out;
}

auto action_from_json(json const& doc) -> Action
{
    if (!doc.is_object())
        invalid("action must be an object");
    auto action = Action {};
    action.kind = parse_action_kind(field<std::string>(doc, "kind"));
    action.element_id = field<int>(doc, "id");
    if (doc.contains("text"))
        action.text = field<std::string>(doc, "text");
    return action;
}

auto to_json(TestCase const& test) -> ordered_json
{
    auto out = ordered_json::object();
    if (!test.id.empty())
        out["id"] = test.id;
    out["description"] = test.description;
    out["app"] = test.app_binding;
    if (test.goal)
        out["goal"] = sim::to_json(*test.goal);
    out["tags"] = test.tags;
    if (!test.replay_script.empty())
        out["replay"] = test.replay_script;
    return out;
}

auto test_case_from_json(json const& doc) -> TestCase
{
    if (!doc.is_object())
        invalid("test case must be an object");
    auto test = TestCase {};
    if (doc.contains("id"))
        test.id = field<std::string>(doc, "id");
    test.description = field<std::string>(doc, "description");
    if (test.description.empty())
        invalid("test case description is empty");
    if (doc.contains("app"))
        test.app_binding = field<std::string>(doc, "app");
    if (doc.contains("goal"))
    {
        try
        {
            test.goal = sim::goal_from_json(doc["goal"]);
        }
        catch (Error const& e)
        {
            invalid(std::string("goal: ") + e.what());
        }
    }
    if (doc.contains("tags"))
        test.tags = field<std::vector<std::string>>(doc, "tags");
    if (doc.contains("replay"))
        test.replay_script = field<std::string>(doc, "replay");
    return test;
}

void write_trace(std::ostream& out, ExecutionTrace const& trace)
{
    auto header = ordered_json::object();
    header["type"] = "header";
    header["trace_id"] = trace.trace_id;
    header["test"] = to_json(trace.test);
    header["model"] = trace.model;
    header["backend"] = trace.backend;
    header["started_at"] = trace.started_at;
    out << dump_line(header) << '\n';

    for (auto const& record: trace.records)
    {
        auto line = ordered_json::object();
        line["type"] = "step";
        line["step"] = record.step;
        line["action"] = to_json(record.action);
        line["element_label"] = record.element_label;
        line["screen_hash_before"] = record.screen_hash_before;
        line["screen_hash_after"] = record.screen_hash_after;
        line["decision"] = prompt::to_json(record.decision);
        line["latency_ms"] = record.latency.count();
        if (record.prompt)
            line["prompt"] = *record.prompt;
        if (record.raw_response)
            line["response"] = *record.raw_response;
        out << dump_line(line) << '\n';
    }

    auto footer = ordered_json::object();
    footer["type"] = "footer";
    footer["verdict"] = to_string(trace.verdict.kind);
    footer["reason"] = trace.verdict.reason;
    footer["steps"] = trace.executed_steps();
    footer["ended_at"] = trace.ended_at;
    out << dump_line(footer) << '\n';
}

auto read_trace(std::istream& in) -> ExecutionTrace
{
    auto trace = ExecutionTrace {};
    auto sawHeader = false;
    auto sawFooter = false;
    auto line = std::string {};
    auto lineNumber = 0;
    while (std::getline(in, line))
    {
        ++lineNumber;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        auto const doc = json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object())
            invalid("trace line " + std::to_string(lineNumber) + " is not a JSON object");
        auto const type = field<std::string>(doc, "type");
        if (type == "header")
        {
            sawHeader = true;
            trace.trace_id = field<std::string>(doc, "trace_id");
            trace.test = test_case_from_json(doc["test"]);
            trace.model = doc.value("model", std::string());
            trace.backend = doc.value("backend", std::string());
            trace.started_at = doc.value("started_at", std::int64_t { 0 });
        }
        else if (type == "step")
        {
            auto record = ActionRecord {};
            record.step = field<int>(doc, "step");
            record.action = action_from_json(doc["action"]);
            record.element_label = doc.value("element_label", std::string());
            record.screen_hash_before = field<std::string>(doc, "screen_hash_before");
            record.screen_hash_after = field<std::string>(doc, "screen_hash_after");
            try
            {
                record.decision = prompt::decision_from_json(doc.at("decision"));
            }
            catch (std::exception const& e)
            {
                invalid("trace line " + std::to_string(lineNumber) + ": decision: " + e.what());
            }
            record.latency = std::chrono::milliseconds(doc.value("latency_ms", std::int64_t { 0 }));
            if (doc.contains("prompt"))
                record.prompt = field<std::string>(doc, "prompt");
            if (doc.contains("response"))
                record.raw_response = field<std::string>(doc, "response");
            trace.records.push_back(std::move(record));
        }
        else if (type == "footer")
        {
            sawFooter = true;
            trace.verdict.kind = parse_verdict_kind(field<std::string>(doc, "verdict"));
            trace.verdict.reason = doc.value("reason", std::string());
            trace.ended_at = doc.value("ended_at", std::int64_t { 0 });
        }
        else
            invalid("unknown trace line type '" + type + "'");
    }
    if (!sawHeader || !sawFooter)
        invalid("trace needs a header and a footer line");
    for (auto i = std::size_t { 0 }; i < trace.records.size(); ++i)
        if (trace.records[i].step != static_cast<int>(i) + 1)
            invalid("trace steps are not consecutive from 1");
    return trace;
}

void save_trace(std::string const& path, ExecutionTrace const& trace)
{
    auto out = std::ofstream(path, std::ios::binary | std::ios::trunc);
    if (!out)
        invalid("cannot write " + path);
    write_trace(out, trace);
}

auto load_trace(std::string const& path) -> ExecutionTrace
{
    auto in = std::ifstream(path, std::ios::binary);
    if (!in)
        invalid("cannot read " + path);
    return read_trace(in);
}

} // namespace droidpilot::agent
