// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <droidpilot/action.hpp>
#include <droidpilot/device/sim.hpp>
#include <droidpilot/prompt/decision.hpp>

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace droidpilot::agent
{

struct TestCase
{
    std::string id;          // stable identifier; derived from description and app when empty
    std::string description; // the natural-language goal
    std::string app_binding; // package name (device) or app-spec path (simulator)
    std::optional<sim::GoalPredicate> goal;
    std::vector<std::string> tags;
    std::string replay_script; // optional scripted model responses (suite runs)

    [[nodiscard]] auto trace_id() const -> std::string;
};

struct ActionRecord
{
    int step = 1;
    Action action;
    std::string element_label;
    std::string screen_hash_before;
    std::string screen_hash_after;
    prompt::Decision decision;
    std::chrono::milliseconds latency { 0 }; // model + execution
    std::optional<std::string> prompt;       // present when recorded for distillation
    std::optional<std::string> raw_response;
};

enum class VerdictKind
{
    Completed,
    StepLimitExceeded,
    RepeatLimitExceeded,
    DecisionFailure,
    BackendFailure,
};

[[nodiscard]] auto to_string(VerdictKind kind) -> std::string_view;
[[nodiscard]] auto parse_verdict_kind(std::string_view name) -> VerdictKind;

struct Verdict
{
    VerdictKind kind = VerdictKind::Completed;
    std::string reason;
};

struct ExecutionTrace
{
    std::string trace_id;
    TestCase test;
    std::vector<ActionRecord> records;
    Verdict verdict;
    std::int64_t started_at = 0; // ms since epoch
    std::int64_t ended_at = 0;
    std::string model;
    std::string backend;

    /// Records that executed an action (everything but the final Terminate).
    [[nodiscard]] auto executed_steps() const -> int;
};

struct AgentConfig
{
    int max_steps = 25;
    int repeat_limit = 3;
    int parse_retry_limit = 1;
    bool record_for_distillation = false;
    std::string model_name = "gpt-4o";
    double temperature = 0.0;
    int max_output_tokens = 2048;
    std::chrono::milliseconds llm_timeout { 60'000 };

    /// Throws Error{InvalidInput} when a limit is out of range.
    void validate() const;
};

/// `Step <k>: ...` line for a record.
[[nodiscard]] auto history_line(ActionRecord const& record) -> std::string;

} // namespace droidpilot::agent
