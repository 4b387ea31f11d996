// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <droidpilot/agent/types.hpp>
#include <droidpilot/device/session.hpp>
#include <droidpilot/llm/backend.hpp>
#include <droidpilot/llm/recorder.hpp>

#include <span>

namespace droidpilot::agent
{

/// True iff an earlier record was taken from a screen with the same hash with an
/// equal action. Back and scroll actions never count as repeats.
[[nodiscard]] auto detect_repeat(std::span<ActionRecord const> history, Action const& candidate,
                                 std::string_view screen_hash) -> bool;

/// Drives one test case: capture, refine, prompt, decide, validate, execute, until
/// the model terminates or a guard trips. Never throws for device or model failures;
/// those end up in the verdict. Every exchange goes to `sink` when one is given.
[[nodiscard]] auto run_test_case(TestCase const& test,
                                 device::DeviceSession& device,
                                 llm::LlmBackend& llm,
                                 AgentConfig const& cfg,
                                 llm::RecorderSink* sink = nullptr) -> ExecutionTrace;

} // namespace droidpilot::agent
