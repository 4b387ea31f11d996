// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <droidpilot/llm/backend.hpp>

#include <fstream>
#include <string>
#include <vector>

namespace droidpilot::llm
{

struct StepMeta
{
    std::string trace_id;
    int step = 0;
    int attempt = 1;
};

/// Append-only store of exchanges, owned by exactly one session.
class RecorderSink
{
  public:
    virtual ~RecorderSink() = default;
    /// Appends one line. Throws Error{SinkWriteError}.
    virtual void append(std::string const& line) = 0;
};

class JsonlFileSink final: public RecorderSink
{
  public:
    explicit JsonlFileSink(std::string path);
    void append(std::string const& line) override;
    [[nodiscard]] auto path() const -> std::string const& { return _path; }

  private:
    std::string _path;
    std::ofstream _out;
};

class MemorySink final: public RecorderSink
{
  public:
    void append(std::string const& line) override { _lines.push_back(line); }
    [[nodiscard]] auto lines() const -> std::vector<std::string> const& { return _lines; }

  private:
    std::vector<std::string> _lines;
};

/// Serializes the exchange as one JSON line:
/// `{trace_id, step, attempt, model, backend, latency_ms, prompt, response}`.
void record_exchange(RecorderSink& sink, LlmRequest const& request, LlmResponse const& response, StepMeta const& meta);

} // namespace droidpilot::llm
