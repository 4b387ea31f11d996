// SPDX-License-Identifier: Apache-2.0
#include "../http_util.hpp"

#include <droidpilot/digest.hpp>
#include <droidpilot/error.hpp>
#include <droidpilot/llm/backend.hpp>
#include <droidpilot/llm/recorder.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace droidpilot::llm
{

using nlohmann::json;

void LlmRequest::validate() const
{
    if (prompt.empty())
        throw Error(ErrorCode::InvalidInput, "empty prompt");
    if (timeout.count() <= 0)
        throw Error(ErrorCode::InvalidInput, "timeout must be positive");
    if (max_output_tokens <= 0)
        throw Error(ErrorCode::InvalidInput, "max_output_tokens must be positive");
    if (temperature < 0.0 || temperature > 2.0)
        throw Error(ErrorCode::InvalidInput, "temperature must lie in [0, 2]");
}

// {{{ HttpLlmBackend

HttpLlmBackend::HttpLlmBackend(HttpBackendConfig config): _config(std::move(config))
{
    (void) detail::parse_url(_config.endpoint);
}

auto HttpLlmBackend::request_body(LlmRequest const& request) -> std::string
{
    auto body = nlohmann::ordered_json::object();
    body["model"] = request.model_name;
    body["messages"] = nlohmann::ordered_json::array({ { { "role", "user" }, { "content", request.prompt } } });
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_output_tokens;
    return body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

auto HttpLlmBackend::complete(LlmRequest const& request) -> LlmResponse
{
    request.validate();
    auto const url = detail::parse_url(_config.endpoint);
    auto client = detail::make_client(url, request.timeout);

    auto headers = httplib::Headers {};
    if (!_config.api_key.empty())
        headers.emplace("Authorization", "Bearer " + _config.api_key);

    auto const started = std::chrono::steady_clock::now();
    auto result = client->Post(url.path, headers, request_body(request), "application/json");
    auto const latency =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);

    if (!result)
    {
        auto const error = result.error();
        if (error == httplib::Error::ConnectionTimeout
            || (error == httplib::Error::Read && latency >= request.timeout - std::chrono::milliseconds(50)))
            throw Error(ErrorCode::Timeout, "no response within " + std::to_string(request.timeout.count()) + " ms");
        throw Error(ErrorCode::TransportError, httplib::to_string(error));
    }
    if (result->status < 200 || result->status >= 300)
        throw Error(ErrorCode::TransportError,
                    "HTTP " + std::to_string(result->status) + " from " + _config.endpoint + ": " + result->body);

    auto const parsed = json::parse(result->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("choices") || !parsed["choices"].is_array()
        || parsed["choices"].empty())
        throw Error(ErrorCode::TransportError, "response has no choices");
    auto const& choice = parsed["choices"][0];
    if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()
        || !choice["message"].contains("content") || !choice["message"]["content"].is_string())
        throw Error(ErrorCode::TransportError, "first choice has no message content");

    return { choice["message"]["content"].get<std::string>(), latency, tag() };
}

// }}}
// {{{ ReplayScript / ReplayBackend

auto ReplayScript::from_jsonl(std::string_view text) -> ReplayScript
{
    auto script = ReplayScript {};
    auto stream = std::istringstream(std::string(text));
    auto line = std::string {};
    auto lineNumber = 0;
    while (std::getline(stream, line))
    {
        ++lineNumber;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        auto const parsed = json::parse(line, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("response"))
            throw Error(ErrorCode::InvalidInput,
                        "replay script line " + std::to_string(lineNumber) + " is not an object with a response");

        auto entry = ReplayEntry {};
        auto const& response = parsed["response"];
        entry.response = response.is_string() ? response.get<std::string>() : response.dump();
        if (parsed.contains("prompt_digest"))
        {
            if (!parsed["prompt_digest"].is_string())
                throw Error(ErrorCode::InvalidInput, "prompt_digest must be a string");
            entry.match = parsed["prompt_digest"].get<std::string>();
        }
        else if (parsed.contains("step"))
        {
            if (!parsed["step"].is_number_integer() || parsed["step"].get<int>() < 1)
                throw Error(ErrorCode::InvalidInput, "step must be a positive integer");
            entry.match = parsed["step"].get<int>();
        }
        else
            entry.match = lineNumber;
        script.entries.push_back(std::move(entry));
    }
    script.validate();
    return script;
}

auto ReplayScript::load(std::string const& path) -> ReplayScript
{
    auto in = std::ifstream(path);
    if (!in)
        throw Error(ErrorCode::InvalidInput, "cannot read replay script " + path);
    auto buffer = std::stringstream {};
    buffer << in.rdbuf();
    return from_jsonl(buffer.str());
}

void ReplayScript::validate() const
{
    auto steps = std::set<int> {};
    auto digests = std::set<std::string> {};
    for (auto const& entry: entries)
    {
        if (auto const* step = std::get_if<int>(&entry.match))
        {
            if (!steps.insert(*step).second)
                throw Error(ErrorCode::InvalidInput, "duplicate replay step " + std::to_string(*step));
        }
        else if (!digests.insert(std::get<std::string>(entry.match)).second)
            throw Error(ErrorCode::InvalidInput, "duplicate replay digest " + std::get<std::string>(entry.match));
    }
}

ReplayBackend::ReplayBackend(ReplayScript script): _script(std::move(script))
{
    _script.validate();
}

auto ReplayBackend::complete(LlmRequest const& request) -> LlmResponse
{
    request.validate();
    auto const started = std::chrono::steady_clock::now();
    auto const digest = digest_hex(request.prompt);

    auto const lock = std::scoped_lock(_mutex);
    auto const call = ++_calls;

    ReplayEntry const* found = nullptr;
    for (auto const& entry: _script.entries)
        if (auto const* d = std::get_if<std::string>(&entry.match); d && *d == digest)
        {
            found = &entry;
            break;
        }
    if (!found)
        for (auto const& entry: _script.entries)
            if (auto const* s = std::get_if<int>(&entry.match); s && *s == call)
            {
                found = &entry;
                break;
            }
    if (!found)
        throw Error(ErrorCode::ScriptExhausted, "no replay entry for call " + std::to_string(call));

    auto const latency =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    return { found->response, latency, tag() };
}

auto ReplayBackend::calls() const -> int
{
    auto const lock = std::scoped_lock(_mutex);
    return _calls;
}

// }}}
// {{{ recording

JsonlFileSink::JsonlFileSink(std::string path): _path(std::move(path)), _out(_path, std::ios::app | std::ios::binary)
{
    if (!_out)
        throw Error(ErrorCode::SinkWriteError, "cannot open " + _path);
}

void JsonlFileSink::append(std::string const& line)
{
    _out << line << '\n';
    _out.flush();
    if (!_out)
        throw Error(ErrorCode::SinkWriteError, "write to " + _path + " failed");
}

void record_exchange(RecorderSink& sink, LlmRequest const& request, LlmResponse const& response, StepMeta const& meta)
{
    auto record = nlohmann::ordered_json::object();
    record["trace_id"] = meta.trace_id;
    record["step"] = meta.step;
    record["attempt"] = meta.attempt;
    record["model"] = request.model_name;
    record["backend"] = response.backend_tag;
    record["latency_ms"] = response.latency.count();
    record["prompt"] = request.prompt;
    record["response"] = response.raw_text;
    sink.append(record.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
}

// }}}

} // namespace droidpilot::llm
