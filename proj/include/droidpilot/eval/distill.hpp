// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <droidpilot/eval/metrics.hpp>

#include <iosfwd>

namespace droidpilot::eval
{

struct FilterConfig
{
    double inefficiency_factor = 2.0;
};

/// One (prompt, decision) training pair.
struct DistillRecord
{
    std::string prompt;
    std::string completion; // canonical decision JSON
    std::string app;
    int step = 0;
    std::string trace_id;
};

/// Keeps steps of Completed traces, minus erroneous steps together with the
/// actions up to and including the Back that undoes them, and minus whole traces
/// longer than oracle length times the inefficiency factor. Erroneous steps come
/// from the oracle when one exists for the trace, else from the Back-return pattern.
/// Throws Error{MissingRecording} when a kept step lacks its prompt or response.
[[nodiscard]] auto export_distill(std::vector<agent::ExecutionTrace> const& traces,
                                  OracleMap const& oracles,
                                  FilterConfig const& filters = {}) -> std::vector<DistillRecord>;

void write_distill_jsonl(std::ostream& out, std::vector<DistillRecord> const& records);

} // namespace droidpilot::eval
