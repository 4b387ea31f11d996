// SPDX-License-Identifier: Apache-2.0
#include <droidpilot/agent/recovery.hpp>
#include <droidpilot/error.hpp>
#include <droidpilot/eval/distill.hpp>

#include <ostream>

namespace droidpilot::eval
{

auto export_distill(std::vector<agent::ExecutionTrace> const& traces,
                    OracleMap const& oracles,
                    FilterConfig const& filters) -> std::vector<DistillRecord>
{
    if (!(filters.inefficiency_factor > 0.0))
        throw Error(ErrorCode::InvalidInput, "inefficiency factor must be positive");

    auto out = std::vector<DistillRecord> {};
    for (auto const& trace: traces)
    {
        if (trace.verdict.kind != agent::VerdictKind::Completed)
            continue;

        auto flags = std::optional<std::vector<bool>> {};
        if (auto const it = oracles.find(trace.trace_id); it != oracles.end())
        {
            auto const& oracle = it->second;
            if (oracle.shortest_length
                && trace.executed_steps() > static_cast<double>(*oracle.shortest_length) * filters.inefficiency_factor)
                continue;
            flags = oracle.erroneous;
        }

        auto keep = std::vector<bool>(trace.records.size(), true);
        auto const recovery = agent::classify_recovery_events(trace, flags);
        for (auto const step: recovery.erroneous_steps)
        {
            auto const index = static_cast<std::size_t>(step - 1);
            auto const last = agent::returning_back(trace, index).value_or(index);
            for (auto i = index; i <= last; ++i)
                keep[i] = false;
        }

        for (auto i = std::size_t { 0 }; i < trace.records.size(); ++i)
        {
            if (!keep[i])
                continue;
            auto const& record = trace.records[i];
            if (!record.prompt || !record.raw_response)
                throw Error(ErrorCode::MissingRecording,
                            "trace " + trace.trace_id + " step " + std::to_string(record.step)
                                + " has no recorded prompt/response");
            out.push_back({ *record.prompt,
                            prompt::to_canonical_json(record.decision),
                            trace.test.app_binding,
                            record.step,
                            trace.trace_id });
        }
    }
    return out;
}

void write_distill_jsonl(std::ostream& out, std::vector<DistillRecord> const& records)
{
    for (auto const& record: records)
    {
        auto line = nlohmann::ordered_json::object();
        line["prompt"] = record.prompt;
        line["completion"] = record.completion;
        line["app"] = record.app;
        line["step"] = record.step;
        line["trace_id"] = record.trace_id;
        out << line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    }
}

} // namespace droidpilot::eval
