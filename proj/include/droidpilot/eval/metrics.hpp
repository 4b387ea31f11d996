// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <droidpilot/agent/types.hpp>

#include <nlohmann/json.hpp>

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace droidpilot::eval
{

/// Simulator-derived ground truth for one trace.
struct TraceOracle
{
    std::vector<bool> erroneous;         // one flag per record
    std::optional<int> shortest_length;  // minimal executed steps to the goal
};

using VerdictMap = std::map<std::string, bool>;        // trace_id -> human (or goal) verdict
using OracleMap = std::map<std::string, TraceOracle>;  // trace_id -> oracle

enum class Outcome
{
    Success,
    Failure,
    Pending, // Completed, awaiting a human verdict
};

[[nodiscard]] auto to_string(Outcome outcome) -> std::string_view;

struct TestRow
{
    std::string trace_id;
    std::string description;
    agent::Verdict verdict;
    std::optional<bool> human_verdict;
    Outcome outcome = Outcome::Failure;
    int steps = 0;
    std::optional<double> mean_step_latency_ms;
};

struct HistogramBucket
{
    int total = 0;
    int succeeded = 0;
};

struct SuiteReport
{
    std::string technique = "droidpilot";
    std::string model;
    std::vector<TestRow> per_test;
    int successes = 0;
    int decided = 0; // successes + failures; pending tests are excluded
    int pending = 0;
    int erroneous = 0;
    int recovered = 0;
    std::optional<double> success_rate;
    std::optional<double> error_recovery_rate;
    std::optional<double> mean_time_per_step_ms;
    std::map<int, HistogramBucket> length_histogram; // executed steps -> counts
};

/// Success: the verdict map says true. A trace missing from the map is pending
/// when Completed and a failure otherwise. Recovery is pooled over all steps;
/// step time averages the latency of executed (non-terminate) steps.
[[nodiscard]] auto compute_metrics(std::vector<agent::ExecutionTrace> const& traces,
                                   VerdictMap const& verdicts,
                                   OracleMap const& oracles) -> SuiteReport;

/// `70%`, rounded to the nearest integer percent; `N/A` for nullopt.
[[nodiscard]] auto format_percent(std::optional<double> fraction) -> std::string;
/// `11.8s`; `N/A` for nullopt.
[[nodiscard]] auto format_seconds(std::optional<double> milliseconds) -> std::string;

/// Columns: Technique, Model, Test Execution Success Rate, Error Recovery Rate,
/// Execution Time per Step.
[[nodiscard]] auto render_table(SuiteReport const& report) -> std::string;
/// Two text-bar histograms: test count per length and success fraction per length.
[[nodiscard]] auto render_histogram(SuiteReport const& report) -> std::string;
[[nodiscard]] auto to_json(SuiteReport const& report) -> nlohmann::ordered_json;

} // namespace droidpilot::eval
