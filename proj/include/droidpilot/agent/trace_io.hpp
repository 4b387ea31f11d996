// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <droidpilot/agent/types.hpp>

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>

namespace droidpilot::agent
{

[[nodiscard]] auto to_json(Action const& action) -> nlohmann::ordered_json;
[[nodiscard]] auto action_from_json(nlohmann::json const& doc) -> Action;

[[nodiscard]] auto to_json(TestCase const& test) -> nlohmann::ordered_json;
/// Throws Error{InvalidInput}.
[[nodiscard]] auto test_case_from_json(nlohmann::json const& doc) -> TestCase;

/// JSON-lines: a header line (`"type": "header"`, test), one `"type": "step"`
/// line per record, and a footer line (verdict, timestamps).
void write_trace(std::ostream& out, ExecutionTrace const& trace);
[[nodiscard]] auto read_trace(std::istream& in) -> ExecutionTrace;

void save_trace(std::string const& path, ExecutionTrace const& trace);
[[nodiscard]] auto load_trace(std::string const& path) -> ExecutionTrace;

} // namespace droidpilot::agent
