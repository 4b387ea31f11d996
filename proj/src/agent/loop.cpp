// SPDX-License-Identifier: Apache-2.0
#include <droidpilot/agent/loop.hpp>
#include <droidpilot/error.hpp>
#include <droidpilot/prompt/prompt.hpp>
#include <droidpilot/screen/refine.hpp>

#include <spdlog/spdlog.h>

namespace droidpilot::agent
{

using Clock = std::chrono::steady_clock;
using std::chrono::duration_cast;
using std::chrono::milliseconds;

auto detect_repeat(std::span<ActionRecord const> history, Action const& candidate, std::string_view screen_hash) -> bool
{
    if (candidate.is_navigation() || candidate.kind == ActionKind::Terminate)
        return false;
    for (auto const& record: history)
        if (record.screen_hash_before == screen_hash && record.action == candidate)
            return true;
    return false;
}

namespace
{

auto count_identical(std::span<ActionRecord const> history, ActionRecord const& record) -> int
{
    if (record.action.is_navigation())
        return 0;
    auto count = 0;
    for (auto const& r: history)
        if (r.screen_hash_before == record.screen_hash_before && r.action == record.action)
            ++count;
    return count;
}

auto is_decision_error(ErrorCode code) -> bool
{
    switch (code)
    {
        case ErrorCode::NoJsonFound:
        case ErrorCode::MissingField:
        case ErrorCode::TypeMismatch:
        case ErrorCode::UnknownElement:
        case ErrorCode::TextOnNonInput:
        case ErrorCode::InconsistentTermination: return true;
        default: return false;
    }
}

// Raised inside the loop to end the run with a verdict.
struct Stop
{
    Verdict verdict;
};

class Session
{
  public:
    Session(TestCase const& test,
            device::DeviceSession& device,
            llm::LlmBackend& llm,
            AgentConfig const& cfg,
            llm::RecorderSink* sink):
        _device(device), _llm(llm), _cfg(cfg), _sink(sink)
    {
        _trace.trace_id = test.trace_id();
        _trace.test = test;
        _trace.model = cfg.model_name;
        _trace.backend = device.tag();
    }

    auto run() -> ExecutionTrace
    {
        _trace.started_at = device::now_ms();
        try
        {
            _cfg.validate();
            loop();
        }
        catch (Stop const& stop)
        {
            _trace.verdict = stop.verdict;
        }
        _trace.ended_at = device::now_ms();
        spdlog::info("[{}] {} after {} step(s){}{}",
                     _trace.trace_id,
                     to_string(_trace.verdict.kind),
                     _trace.executed_steps(),
                     _trace.verdict.reason.empty() ? "" : ": ",
                     _trace.verdict.reason);
        return std::move(_trace);
    }

  private:
    struct Decided
    {
        prompt::ValidatedAction validated;
        std::string prompt;
        std::string response;
        milliseconds latency { 0 };
    };

    [[noreturn]] static void stop(VerdictKind kind, std::string reason = {})
    {
        throw Stop { { kind, std::move(reason) } };
    }

    auto capture() -> screen::RefinedScreen
    {
        try
        {
            return screen::refine_raw(_device.capture_source());
        }
        catch (Error const& e)
        {
            stop(VerdictKind::BackendFailure, std::string("capture failed: ") + e.what());
        }
    }

    auto decide(screen::RefinedScreen const& current) -> Decided
    {
        auto history = std::vector<std::string> {};
        history.reserve(_trace.records.size());
        for (auto const& record: _trace.records)
            history.push_back(history_line(record));

        auto const basePrompt = prompt::build_prompt({ _trace.test.description, history, screen::render(current) });
        auto request = llm::LlmRequest {};
        request.model_name = _cfg.model_name;
        request.temperature = _cfg.temperature;
        request.max_output_tokens = _cfg.max_output_tokens;
        request.timeout = _cfg.llm_timeout;
        request.prompt = basePrompt;

        auto total = milliseconds { 0 };
        auto const attempts = 1 + _cfg.parse_retry_limit;
        auto lastError = std::string {};
        for (auto attempt = 1; attempt <= attempts; ++attempt)
        {
            auto response = llm::LlmResponse {};
            try
            {
                response = _llm.complete(request);
            }
            catch (Error const& e)
            {
                stop(VerdictKind::BackendFailure, std::string("model backend: ") + e.what());
            }
            total += response.latency;
            if (_sink)
            {
                try
                {
                    llm::record_exchange(*_sink, request, response, { _trace.trace_id, next_step(), attempt });
                }
                catch (Error const& e)
                {
                    stop(VerdictKind::BackendFailure, std::string("recorder: ") + e.what());
                }
            }

            try
            {
                auto validated = prompt::validate_decision(prompt::parse_decision(response.raw_text), current);
                for (auto const& warning: validated.warnings)
                    spdlog::warn("[{}] step {}: {}", _trace.trace_id, next_step(), warning);
                return { std::move(validated), request.prompt, std::move(response.raw_text), total };
            }
            catch (Error const& e)
            {
                if (!is_decision_error(e.code()))
                    throw;
                lastError = e.what();
                spdlog::warn("[{}] step {} attempt {}: {}", _trace.trace_id, next_step(), attempt, lastError);
                request.prompt = prompt::build_retry_prompt(basePrompt, lastError);
            }
        }
        stop(VerdictKind::DecisionFailure, lastError);
    }

    [[nodiscard]] auto next_step() const -> int { return static_cast<int>(_trace.records.size()) + 1; }

    void append(Decided const& decided, screen::RefinedScreen const& before, std::string const& hashAfter,
                milliseconds latency)
    {
        auto record = ActionRecord {};
        record.step = next_step();
        record.action = decided.validated.action;
        if (auto const* element = before.find(record.action.element_id))
            record.element_label = element->label;
        record.screen_hash_before = before.screen_hash;
        record.screen_hash_after = hashAfter;
        record.decision = decided.validated.decision;
        record.latency = latency;
        if (_cfg.record_for_distillation)
        {
            record.prompt = decided.prompt;
            record.raw_response = decided.response;
        }
        _trace.records.push_back(std::move(record));
    }

    void loop()
    {
        auto current = capture();
        while (true)
        {
            if (_trace.executed_steps() >= _cfg.max_steps)
                stop(VerdictKind::StepLimitExceeded, "reached " + std::to_string(_cfg.max_steps) + " steps");

            auto decided = decide(current);
            auto const& action = decided.validated.action;
            if (action.kind == ActionKind::Terminate)
            {
                append(decided, current, current.screen_hash, decided.latency);
                stop(VerdictKind::Completed);
            }

            if (detect_repeat(_trace.records, action, current.screen_hash) != decided.validated.decision.repeating_past_action_bool)
                spdlog::debug("[{}] step {}: repeat flag from model disagrees with screen history",
                              _trace.trace_id,
                              next_step());

            auto const started = Clock::now();
            if (!execute(current, action))
            {
                // Stale screen: re-capture and re-plan once.
                current = capture();
                decided = decide(current);
                if (decided.validated.action.kind == ActionKind::Terminate)
                {
                    append(decided, current, current.screen_hash, decided.latency);
                    stop(VerdictKind::Completed);
                }
                if (!execute(current, decided.validated.action))
                    stop(VerdictKind::DecisionFailure, "element not found after re-capture");
            }
            auto const execution = duration_cast<milliseconds>(Clock::now() - started);

            auto after = capture();
            append(decided, current, after.screen_hash, decided.latency + execution);
            current = std::move(after);

            auto const& last = _trace.records.back();
            auto const identical =
                count_identical(std::span(_trace.records).first(_trace.records.size() - 1), last) + 1;
            if (!last.action.is_navigation() && identical >= _cfg.repeat_limit)
                stop(VerdictKind::RepeatLimitExceeded,
                     std::to_string(identical) + " identical actions from the same screen");
        }
    }

    // False on ElementNotFound; other failures end the run.
    auto execute(screen::RefinedScreen const& current, Action const& action) -> bool
    {
        try
        {
            _device.execute(screen::resolve_locator(current, action.element_id), action);
            return true;
        }
        catch (Error const& e)
        {
            if (e.code() == ErrorCode::ElementNotFound)
            {
                spdlog::warn("[{}] step {}: {}", _trace.trace_id, next_step(), e.what());
                return false;
            }
            stop(VerdictKind::BackendFailure, std::string("execute failed: ") + e.what());
        }
    }

    device::DeviceSession& _device;
    llm::LlmBackend& _llm;
    AgentConfig const& _cfg;
    llm::RecorderSink* _sink;
    ExecutionTrace _trace;
};

} // namespace

auto run_test_case(TestCase const& test,
                   device::DeviceSession& device,
                   llm::LlmBackend& llm,
                   AgentConfig const& cfg,
                   llm::RecorderSink* sink) -> ExecutionTrace
{
    return Session(test, device, llm, cfg, sink).run();
}

} // namespace droidpilot::agent
