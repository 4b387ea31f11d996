// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace droidpilot::llm
{

struct LlmRequest
{
    std::string prompt;
    std::string model_name = "gpt-4o";
    double temperature = 0.0;
    int max_output_tokens = 2048;
    std::chrono::milliseconds timeout { 60'000 };

    /// Throws Error{InvalidInput} on an empty prompt, a non-positive timeout or token
    /// budget, or a temperature outside [0, 2].
    void validate() const;
};

struct LlmResponse
{
    std::string raw_text;
    std::chrono::milliseconds latency { 0 };
    std::string backend_tag;
};

/// A text-completion backend. Implementations must tolerate concurrent calls
/// from independent sessions.
class LlmBackend
{
  public:
    virtual ~LlmBackend() = default;

    /// Throws Error{Timeout}, Error{TransportError} or Error{ScriptExhausted}.
    [[nodiscard]] virtual auto complete(LlmRequest const& request) -> LlmResponse = 0;
    [[nodiscard]] virtual auto tag() const -> std::string = 0;
};

struct HttpBackendConfig
{
    std::string endpoint; // full URL of the chat-completions route
    std::string api_key;  // sent as a bearer token when non-empty
};

/// Chat-completion client: one user message carrying the whole prompt.
class HttpLlmBackend final: public LlmBackend
{
  public:
    explicit HttpLlmBackend(HttpBackendConfig config);

    [[nodiscard]] auto complete(LlmRequest const& request) -> LlmResponse override;
    [[nodiscard]] auto tag() const -> std::string override { return "http"; }

    /// JSON body posted for `request`.
    [[nodiscard]] static auto request_body(LlmRequest const& request) -> std::string;

  private:
    HttpBackendConfig _config;
};

struct ReplayEntry
{
    std::variant<int, std::string> match; // call ordinal (1-based) or prompt digest
    std::string response;
};

struct ReplayScript
{
    std::vector<ReplayEntry> entries;

    /// One JSON object per line: `{"step": n, "response": ...}` or
    /// `{"prompt_digest": "...", "response": ...}`. Lines without a match key take
    /// their 1-based line number as the step. A non-string response is stored as
    /// its compact JSON text. Blank lines are skipped.
    [[nodiscard]] static auto from_jsonl(std::string_view text) -> ReplayScript;
    [[nodiscard]] static auto load(std::string const& path) -> ReplayScript;

    /// Throws Error{InvalidInput} on duplicate step or digest entries.
    void validate() const;
};

/// Deterministic scripted backend. A prompt-digest match wins over the call ordinal.
class ReplayBackend final: public LlmBackend
{
  public:
    explicit ReplayBackend(ReplayScript script);

    [[nodiscard]] auto complete(LlmRequest const& request) -> LlmResponse override;
    [[nodiscard]] auto tag() const -> std::string override { return "replay"; }
    [[nodiscard]] auto calls() const -> int;

  private:
    ReplayScript _script;
    mutable std::mutex _mutex;
    int _calls = 0;
};

} // namespace droidpilot::llm
