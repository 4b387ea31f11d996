// SPDX-License-Identifier: Apache-2.0
#include <droidpilot/agent/recovery.hpp>
#include <droidpilot/eval/metrics.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace droidpilot::eval
{

using droidpilot::ActionKind;
using agent::VerdictKind;

auto to_string(Outcome outcome) -> std::string_view
{
    switch (outcome)
    {
        case Outcome::Success: return "success";
        case Outcome::Failure: return "failure";
        case Outcome::Pending: return "pending";
    }
    return "failure";
}

namespace
{

auto outcome_of(agent::ExecutionTrace const& trace, std::optional<bool> human) -> Outcome
{
    auto const completed = trace.verdict.kind == VerdictKind::Completed;
    if (human)
        return *human && completed ? Outcome::Success : Outcome::Failure;
    return completed ? Outcome::Pending : Outcome::Failure;
}

auto fraction(int num, int den) -> std::optional<double>
{
    if (den == 0)
        return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

auto compute_metrics(std::vector<agent::ExecutionTrace> const& traces,
                     VerdictMap const& verdicts,
                     OracleMap const& oracles) -> SuiteReport
{
    auto report = SuiteReport {};
    auto totalLatency = std::int64_t { 0 };
    auto totalSteps = 0;

    for (auto const& trace: traces)
    {
        if (report.model.empty())
            report.model = trace.model;

        auto row = TestRow {};
        row.trace_id = trace.trace_id;
        row.description = trace.test.description;
        row.verdict = trace.verdict;
        if (auto const it = verdicts.find(trace.trace_id); it != verdicts.end())
            row.human_verdict = it->second;
        row.outcome = outcome_of(trace, row.human_verdict);
        row.steps = trace.executed_steps();

        auto latency = std::int64_t { 0 };
        for (auto const& record: trace.records)
            if (record.action.kind != ActionKind::Terminate)
                latency += record.latency.count();
        if (row.steps > 0)
            row.mean_step_latency_ms = static_cast<double>(latency) / row.steps;
        totalLatency += latency;
        totalSteps += row.steps;

        switch (row.outcome)
        {
            case Outcome::Success:
                ++report.successes;
                ++report.decided;
                break;
            case Outcome::Failure: ++report.decided; break;
            case Outcome::Pending: ++report.pending; break;
        }

        auto flags = std::optional<std::vector<bool>> {};
        if (auto const it = oracles.find(trace.trace_id); it != oracles.end())
            flags = it->second.erroneous;
        auto const recovery = agent::classify_recovery_events(trace, flags);
        report.erroneous += static_cast<int>(recovery.erroneous_steps.size());
        report.recovered += static_cast<int>(recovery.recovered_steps.size());

        auto& bucket = report.length_histogram[row.steps];
        ++bucket.total;
        if (row.outcome == Outcome::Success)
            ++bucket.succeeded;

        report.per_test.push_back(std::move(row));
    }

    report.success_rate = fraction(report.successes, report.decided);
    report.error_recovery_rate = fraction(report.recovered, report.erroneous);
    if (totalSteps > 0)
        report.mean_time_per_step_ms = static_cast<double>(totalLatency) / totalSteps;
    return report;
}

auto format_percent(std::optional<double> fraction) -> std::string
{
    if (!fraction)
        return "N/A";
    return std::to_string(std::lround(*fraction * 100.0)) + "%";
}

auto format_seconds(std::optional<double> milliseconds) -> std::string
{
    if (!milliseconds)
        return "N/A";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1fs", *milliseconds / 1000.0);
    return buf;
}

auto render_table(SuiteReport const& report) -> std::string
{
    auto const model = report.model.empty() ? std::string("-") : report.model;
    auto out = std::ostringstream {};
    out << "| Technique | Model | Test Execution Success Rate | Error Recovery Rate | Execution Time per Step |\n";
    out << "|---|---|---|---|---|\n";
    out << "| " << report.technique << " | " << model << " | " << format_percent(report.success_rate) << " | "
        << format_percent(report.error_recovery_rate) << " | " << format_seconds(report.mean_time_per_step_ms)
        << " |\n";
    if (report.pending > 0)
        out << "\n" << report.pending << " completed test(s) pending a verdict\n";
    return out.str();
}

auto render_histogram(SuiteReport const& report) -> std::string
{
    auto out = std::ostringstream {};
    out << "Tests by executed steps\n";
    for (auto const& [steps, bucket]: report.length_histogram)
    {
        char head[32];
        std::snprintf(head, sizeof head, "%4d | ", steps);
        out << head << std::string(static_cast<std::size_t>(bucket.total), '#') << ' ' << bucket.total << '\n';
    }
    out << "\nSuccess rate by executed steps\n";
    for (auto const& [steps, bucket]: report.length_histogram)
    {
        auto const rate = fraction(bucket.succeeded, bucket.total).value_or(0.0);
        auto const width = static_cast<std::size_t>(std::lround(rate * 20.0));
        char head[32];
        std::snprintf(head, sizeof head, "%4d | ", steps);
        out << head << std::string(width, '#') << std::string(20 - width, '.') << ' ' << format_percent(rate) << " ("
            << bucket.succeeded << '/' << bucket.total << ")\n";
    }
    return out.str();
}

auto to_json(SuiteReport const& report) -> nlohmann::ordered_json
{
    using nlohmann::ordered_json;
    auto optional = [](std::optional<double> v) -> ordered_json { return v ? ordered_json(*v) : ordered_json(nullptr); };

    auto doc = ordered_json::object();
    doc["technique"] = report.technique;
    doc["model"] = report.model;
    doc["success_rate"] = optional(report.success_rate);
    doc["error_recovery_rate"] = optional(report.error_recovery_rate);
    doc["mean_time_per_step_ms"] = optional(report.mean_time_per_step_ms);
    doc["successes"] = report.successes;
    doc["decided"] = report.decided;
    doc["pending"] = report.pending;
    doc["erroneous_steps"] = report.erroneous;
    doc["recovered_steps"] = report.recovered;

    auto rows = ordered_json::array();
    for (auto const& row: report.per_test)
    {
        auto r = ordered_json::object();
        r["trace_id"] = row.trace_id;
        r["description"] = row.description;
        r["verdict"] = agent::to_string(row.verdict.kind);
        r["reason"] = row.verdict.reason;
        r["human_verdict"] = row.human_verdict ? ordered_json(*row.human_verdict) : ordered_json(nullptr);
        r["outcome"] = to_string(row.outcome);
        r["steps"] = row.steps;
        r["mean_step_latency_ms"] = optional(row.mean_step_latency_ms);
        rows.push_back(std::move(r));
    }
    doc["per_test"] = std::move(rows);

    auto histogram = ordered_json::array();
    for (auto const& [steps, bucket]: report.length_histogram)
        histogram.push_back({ { "steps", steps }, { "total", bucket.total }, { "succeeded", bucket.succeeded } });
    doc["length_histogram"] = std::move(histogram);
    return doc;
}

} // namespace droidpilot::eval
