// SPDX-License-Identifier: Apache-2.0
#include <droidpilot/agent/loop.hpp>
#include <droidpilot/agent/trace_io.hpp>
#include <droidpilot/device/webdriver.hpp>
#include <droidpilot/error.hpp>
#include <droidpilot/eval/oracle.hpp>
#include <droidpilot/eval/suite.hpp>

#include <spdlog/spdlog.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

namespace droidpilot::eval
{

using nlohmann::json;
namespace fs = std::filesystem;

namespace
{

[[noreturn]] void invalid(std::string const& what)
{
    throw Error(ErrorCode::InvalidInput, what);
}

template <typename T>
auto get_or(json const& doc, char const* key, T fallback) -> T
{
    if (!doc.contains(key))
        return fallback;
    try
    {
        return doc[key].get<T>();
    }
    catch (json::exception const&)
    {
        invalid(std::string("suite field '") + key + "' has the wrong type");
    }
}

auto env_or(char const* name, std::string fallback) -> std::string
{
    if (auto const* value = std::getenv(name); value && *value)
        return value;
    return fallback;
}

struct TestOutcome
{
    agent::ExecutionTrace trace;
    std::optional<bool> goal_met;
    std::optional<TraceOracle> oracle;
};

auto failed_trace(agent::TestCase const& test, std::string const& model, std::string const& backend,
                  std::string reason) -> agent::ExecutionTrace
{
    auto trace = agent::ExecutionTrace {};
    trace.trace_id = test.trace_id();
    trace.test = test;
    trace.model = model;
    trace.backend = backend;
    trace.started_at = trace.ended_at = device::now_ms();
    trace.verdict = { agent::VerdictKind::BackendFailure, std::move(reason) };
    return trace;
}

auto run_one(SuiteSpec const& spec, agent::TestCase const& test, LlmFactory const& factory) -> TestOutcome
{
    auto const backendTag = spec.backend == BackendKind::Sim ? "sim" : "webdriver";
    auto llm = std::unique_ptr<llm::LlmBackend> {};
    try
    {
        llm = factory(test);
    }
    catch (Error const& e)
    {
        return { failed_trace(test, spec.agent.model_name, backendTag, std::string("model backend: ") + e.what()),
                 std::nullopt, std::nullopt };
    }

    if (spec.backend == BackendKind::Sim)
    {
        auto appSpec = sim::SimAppSpec {};
        try
        {
            appSpec = sim::load_spec_file(resolve_path(spec.base_dir, test.app_binding));
        }
        catch (Error const& e)
        {
            return { failed_trace(test, spec.agent.model_name, backendTag, std::string("app spec: ") + e.what()),
                     std::nullopt, std::nullopt };
        }
        auto device = sim::SimDevice(appSpec);
        auto outcome = TestOutcome { agent::run_test_case(test, device, *llm, spec.agent), std::nullopt, std::nullopt };
        if (test.goal)
        {
            outcome.goal_met = outcome.trace.verdict.kind == agent::VerdictKind::Completed
                               && sim::check_goal(device.state(), *test.goal);
            outcome.oracle = build_oracle(appSpec, *test.goal, outcome.trace);
        }
        return outcome;
    }

    auto caps = spec.capabilities.is_object() ? spec.capabilities : json::object();
    if (!test.app_binding.empty() && !caps.contains("appium:appPackage"))
        caps["appium:appPackage"] = test.app_binding;
    try
    {
        auto device = device::WebDriverSession::open(spec.webdriver_url, caps);
        auto trace = agent::run_test_case(test, *device, *llm, spec.agent);
        device->close();
        return { std::move(trace), std::nullopt, std::nullopt };
    }
    catch (Error const& e)
    {
        return { failed_trace(test, spec.agent.model_name, backendTag, std::string("device session: ") + e.what()),
                 std::nullopt, std::nullopt };
    }
}

} // namespace

auto resolve_path(std::string const& base_dir, std::string const& path) -> std::string
{
    if (path.empty() || base_dir.empty() || fs::path(path).is_absolute())
        return path;
    return (fs::path(base_dir) / path).lexically_normal().string();
}

auto agent_config_from_json(json const& doc, agent::AgentConfig base) -> agent::AgentConfig
{
    if (doc.is_null())
        return base;
    if (!doc.is_object())
        invalid("agent config must be an object");
    base.max_steps = get_or(doc, "max_steps", base.max_steps);
    base.repeat_limit = get_or(doc, "repeat_limit", base.repeat_limit);
    base.parse_retry_limit = get_or(doc, "parse_retry_limit", base.parse_retry_limit);
    base.record_for_distillation = get_or(doc, "record", base.record_for_distillation);
    base.model_name = get_or(doc, "model", base.model_name);
    base.temperature = get_or(doc, "temperature", base.temperature);
    base.max_output_tokens = get_or(doc, "max_tokens", base.max_output_tokens);
    if (doc.contains("timeout_s"))
        base.llm_timeout = std::chrono::milliseconds(
            static_cast<std::int64_t>(get_or(doc, "timeout_s", 60.0) * 1000.0));
    base.validate();
    return base;
}

void SuiteSpec::validate() const
{
    if (tests.empty())
        invalid("suite has no tests");
    if (parallelism < 1)
        invalid("parallelism must be at least 1");
    agent.validate();
    auto ids = std::set<std::string> {};
    for (auto const& test: tests)
    {
        if (!ids.insert(test.trace_id()).second)
            invalid("duplicate test id '" + test.trace_id() + "'");
        if (backend == BackendKind::Sim && !test.goal)
            invalid("simulator test '" + test.trace_id() + "' has no goal");
        if (backend == BackendKind::Sim && test.app_binding.empty())
            invalid("simulator test '" + test.trace_id() + "' has no app spec");
    }
    if (backend == BackendKind::WebDriver && webdriver_url.empty())
        invalid("webdriver suite needs a server URL");
    if (llm.kind != "replay" && llm.kind != "http")
        invalid("llm kind must be 'replay' or 'http'");
}

auto suite_from_json(json const& doc, std::string base_dir) -> SuiteSpec
{
    if (!doc.is_object())
        invalid("suite must be a JSON object");
    auto spec = SuiteSpec {};
    spec.base_dir = std::move(base_dir);

    auto const backend = get_or(doc, "backend", std::string("sim"));
    if (backend == "sim")
        spec.backend = BackendKind::Sim;
    else if (backend == "webdriver")
        spec.backend = BackendKind::WebDriver;
    else
        invalid("backend must be 'sim' or 'webdriver'");

    if (!doc.contains("tests") || !doc["tests"].is_array())
        invalid("suite needs a 'tests' array");
    for (auto const& t: doc["tests"])
        spec.tests.push_back(agent::test_case_from_json(t));

    if (doc.contains("webdriver"))
    {
        auto const& wd = doc["webdriver"];
        spec.webdriver_url = get_or(wd, "url", std::string());
        if (wd.contains("capabilities"))
            spec.capabilities = wd["capabilities"];
    }
    spec.webdriver_url = env_or("DROIDPILOT_WEBDRIVER_URL", spec.webdriver_url);

    if (doc.contains("llm"))
    {
        auto const& l = doc["llm"];
        spec.llm.kind = get_or(l, "kind", spec.llm.kind);
        spec.llm.endpoint = get_or(l, "endpoint", spec.llm.endpoint);
    }
    spec.llm.endpoint = env_or("DROIDPILOT_LLM_ENDPOINT", spec.llm.endpoint);
    spec.llm.api_key = env_or("DROIDPILOT_LLM_API_KEY", {});

    spec.agent = agent_config_from_json(doc.value("agent", json()));
    spec.parallelism = get_or(doc, "parallelism", 1);
    spec.technique = get_or(doc, "technique", spec.technique);
    spec.validate();
    return spec;
}

auto load_suite(std::string const& path) -> SuiteSpec
{
    auto in = std::ifstream(path, std::ios::binary);
    if (!in)
        invalid("cannot read suite file " + path);
    auto const doc = json::parse(in, nullptr, false);
    if (doc.is_discarded())
        invalid("suite file " + path + " is not valid JSON");
    return suite_from_json(doc, fs::path(path).parent_path().string());
}

auto default_llm_factory(SuiteSpec const& spec) -> LlmFactory
{
    if (spec.llm.kind == "http")
    {
        auto config = llm::HttpBackendConfig { spec.llm.endpoint, spec.llm.api_key };
        if (config.endpoint.empty())
            invalid("http model backend needs an endpoint");
        return [config](agent::TestCase const&) { return std::make_unique<llm::HttpLlmBackend>(config); };
    }
    auto const baseDir = spec.base_dir;
    return [baseDir](agent::TestCase const& test) -> std::unique_ptr<llm::LlmBackend> {
        if (test.replay_script.empty())
            throw Error(ErrorCode::InvalidInput, "test '" + test.trace_id() + "' has no replay script");
        return std::make_unique<llm::ReplayBackend>(llm::ReplayScript::load(resolve_path(baseDir, test.replay_script)));
    };
}

auto run_suite(SuiteSpec const& spec, VerdictMap const& human_verdicts, LlmFactory factory) -> SuiteRun
{
    spec.validate();
    if (!factory)
        factory = default_llm_factory(spec);

    auto outcomes = std::vector<std::optional<TestOutcome>>(spec.tests.size());
    auto next = std::atomic<std::size_t> { 0 };
    auto worker = [&] {
        for (auto i = next++; i < spec.tests.size(); i = next++)
        {
            try
            {
                outcomes[i] = run_one(spec, spec.tests[i], factory);
            }
            catch (std::exception const& e)
            {
                outcomes[i] = TestOutcome { failed_trace(spec.tests[i], spec.agent.model_name, "?", e.what()),
                                        std::nullopt, std::nullopt };
            }
        }
    };

    auto const workers = std::min<std::size_t>(static_cast<std::size_t>(spec.parallelism), spec.tests.size());
    if (workers <= 1)
        worker();
    else
    {
        auto threads = std::vector<std::jthread> {};
        for (auto i = std::size_t { 0 }; i < workers; ++i)
            threads.emplace_back(worker);
    }

    auto run = SuiteRun {};
    for (auto& outcome: outcomes)
    {
        auto const& id = outcome->trace.trace_id;
        if (outcome->goal_met)
            run.verdicts[id] = *outcome->goal_met;
        else if (auto const it = human_verdicts.find(id); it != human_verdicts.end())
            run.verdicts[id] = it->second;
        if (outcome->oracle)
            run.oracles[id] = std::move(*outcome->oracle);
        run.traces.push_back(std::move(outcome->trace));
    }
    run.report = compute_metrics(run.traces, run.verdicts, run.oracles);
    run.report.technique = spec.technique;
    if (run.report.model.empty())
        run.report.model = spec.agent.model_name;
    return run;
}

} // namespace droidpilot::eval
