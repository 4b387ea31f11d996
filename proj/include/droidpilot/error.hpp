// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace droidpilot
{

/// Every failure surfaced by the library carries one of these codes.
enum class ErrorCode
{
    // screen-model
    MalformedXml,
    EmptyDocument,
    UnknownElement,
    // prompt-engine
    NoJsonFound,
    MissingField,
    TypeMismatch,
    TextOnNonInput,
    InconsistentTermination,
    // llm-gateway
    Timeout,
    TransportError,
    ScriptExhausted,
    SinkWriteError,
    // device backends
    SessionRejected,
    SessionGone,
    ElementNotFound,
    ActionRejected,
    // device-sim
    SpecParseError,
    DanglingReference,
    NoPath,
    // evalkit
    MissingRecording,
    InvalidInput,
};

[[nodiscard]] auto to_string(ErrorCode code) -> std::string_view;

class Error: public std::runtime_error
{
  public:
    Error(ErrorCode code, std::string detail);

    [[nodiscard]] auto code() const noexcept -> ErrorCode { return _code; }
    [[nodiscard]] auto detail() const noexcept -> std::string const& { return _detail; }

  private:
    ErrorCode _code;
    std::string _detail;
};

} // namespace droidpilot
