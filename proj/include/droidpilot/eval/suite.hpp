// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <droidpilot/agent/types.hpp>
#include <droidpilot/eval/metrics.hpp>
#include <droidpilot/llm/backend.hpp>

#include <nlohmann/json.hpp>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace droidpilot::eval
{

enum class BackendKind
{
    Sim,
    WebDriver,
};

struct LlmConfig
{
    std::string kind = "replay"; // "replay" (per-test scripts) or "http"
    std::string endpoint;
    std::string api_key; // from the environment only
};

struct SuiteSpec
{
    std::vector<agent::TestCase> tests;
    BackendKind backend = BackendKind::Sim;
    std::string webdriver_url;
    nlohmann::json capabilities = nlohmann::json::object();
    LlmConfig llm;
    agent::AgentConfig agent;
    int parallelism = 1;
    std::string technique = "droidpilot";
    std::string base_dir; // relative app/replay paths resolve against this

    /// Throws Error{InvalidInput}.
    void validate() const;
};

/// Reads a suite file; relative paths resolve against its directory.
[[nodiscard]] auto load_suite(std::string const& path) -> SuiteSpec;
[[nodiscard]] auto suite_from_json(nlohmann::json const& doc, std::string base_dir) -> SuiteSpec;

/// Creates the model backend for one test.
using LlmFactory = std::function<std::unique_ptr<llm::LlmBackend>(agent::TestCase const&)>;

[[nodiscard]] auto default_llm_factory(SuiteSpec const& spec) -> LlmFactory;

struct SuiteRun
{
    std::vector<agent::ExecutionTrace> traces;
    VerdictMap verdicts; // simulator goal checks; empty for device suites
    OracleMap oracles;
    SuiteReport report;
};

/// Runs every test (up to `parallelism` at a time), each with its own device and
/// model session. Failures stay in their own row. Simulator runs judge success by
/// the goal predicate; device runs take verdicts from `human_verdicts`.
[[nodiscard]] auto run_suite(SuiteSpec const& spec,
                             VerdictMap const& human_verdicts = {},
                             LlmFactory factory = nullptr) -> SuiteRun;

/// `{max_steps, repeat_limit, parse_retry_limit, record, model, temperature,
/// max_tokens, timeout_s}`; absent keys keep the values in `base`.
[[nodiscard]] auto agent_config_from_json(nlohmann::json const& doc, agent::AgentConfig base = {})
    -> agent::AgentConfig;

[[nodiscard]] auto resolve_path(std::string const& base_dir, std::string const& path) -> std::string;

} // namespace droidpilot::eval
