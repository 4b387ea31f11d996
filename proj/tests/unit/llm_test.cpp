// SPDX-License-Identifier: Apache-2.0
#include "../support/support.hpp"

#include <droidpilot/digest.hpp>
#include <droidpilot/error.hpp>
#include <droidpilot/llm/recorder.hpp>

#include <doctest.h>

#include <filesystem>
#include <thread>

using namespace droidpilot;
using namespace droidpilot::llm;
using nlohmann::json;

namespace
{

auto request(std::string prompt) -> LlmRequest
{
    auto r = LlmRequest {};
    r.prompt = std::move(prompt);
    return r;
}

auto code_of(auto&& fn) -> ErrorCode
{
    try
    {
        fn();
    }
    catch (Error const& e)
    {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidInput;
}

} // namespace

TEST_SUITE("llm")
{
    TEST_CASE("replay by step and exhaustion")
    {
        auto backend = ReplayBackend(ReplayScript::from_jsonl(
            "{\"step\": 1, \"response\": \"first\"}\n\n{\"step\": 2, \"response\": {\"id\": 3}}\n{\"step\": 3, \"response\": \"third\"}\n"));
        auto const r1 = backend.complete(request("p"));
        CHECK(r1.raw_text == "first");
        CHECK(r1.latency.count() < 50);
        CHECK(r1.backend_tag == "replay");
        CHECK(json::parse(backend.complete(request("p")).raw_text) == json { { "id", 3 } });
        CHECK(backend.complete(request("p")).raw_text == "third");
        CHECK(code_of([&] { (void) backend.complete(request("p")); }) == ErrorCode::ScriptExhausted);
        CHECK(backend.calls() == 4);
    }

    TEST_CASE("lines without a match key use their line number")
    {
        auto backend = ReplayBackend(ReplayScript::from_jsonl("{\"response\": \"a\"}\n{\"response\": \"b\"}\n"));
        CHECK(backend.complete(request("x")).raw_text == "a");
        CHECK(backend.complete(request("x")).raw_text == "b");
    }

    TEST_CASE("prompt digest wins over the ordinal")
    {
        auto const line = json { { "prompt_digest", digest_hex("special") }, { "response", "by digest" } }.dump();
        auto backend = ReplayBackend(ReplayScript::from_jsonl("{\"step\": 1, \"response\": \"by step\"}\n" + line + "\n"));
        CHECK(backend.complete(request("special")).raw_text == "by digest");
        CHECK(code_of([&] { (void) backend.complete(request("other")); }) == ErrorCode::ScriptExhausted);

        auto second = ReplayBackend(ReplayScript::from_jsonl("{\"step\": 1, \"response\": \"by step\"}\n" + line + "\n"));
        CHECK(second.complete(request("other")).raw_text == "by step");
        CHECK(second.complete(request("special")).raw_text == "by digest");
    }

    TEST_CASE("malformed scripts")
    {
        CHECK(code_of([] { (void) ReplayScript::from_jsonl("{\"step\": 1, \"response\": \"a\"}\n{\"step\": 1, \"response\": \"b\"}\n"); })
              == ErrorCode::InvalidInput);
        CHECK(code_of([] { (void) ReplayScript::from_jsonl("not json\n"); }) == ErrorCode::InvalidInput);
        CHECK(code_of([] { (void) ReplayScript::load("/nonexistent/script.jsonl"); }) == ErrorCode::InvalidInput);
    }

    TEST_CASE("replay is deterministic")
    {
        auto const text = std::string("{\"response\": \"a\"}\n{\"response\": \"b\"}\n{\"response\": \"c\"}\n");
        auto a = ReplayBackend(ReplayScript::from_jsonl(text));
        auto b = ReplayBackend(ReplayScript::from_jsonl(text));
        for (auto i = 0; i < 3; ++i)
            CHECK(a.complete(request("q")).raw_text == b.complete(request("q")).raw_text);
    }

    TEST_CASE("request validation")
    {
        auto r = request("");
        CHECK(code_of([&] { r.validate(); }) == ErrorCode::InvalidInput);
        r = request("x");
        r.temperature = 3.0;
        CHECK(code_of([&] { r.validate(); }) == ErrorCode::InvalidInput);
        r = request("x");
        r.max_output_tokens = 0;
        CHECK(code_of([&] { r.validate(); }) == ErrorCode::InvalidInput);
    }

    TEST_CASE("http backend against a stub")
    {
        auto const canned = support::respond(support::decision(1));
        auto stub = support::StubServer();
        auto seenAuth = std::string {};
        stub.server().Post("/v1/chat/completions", [&](httplib::Request const& req, httplib::Response& res) {
            seenAuth = req.get_header_value("Authorization");
            auto const body = json { { "choices", json::array({ { { "message", { { "role", "assistant" }, { "content", canned } } } } }) } };
            res.set_content(body.dump(), "application/json");
        });
        stub.server().Post("/broken", [](httplib::Request const&, httplib::Response& res) {
            res.status = 500;
            res.set_content("oops", "text/plain");
        });
        stub.server().Post("/slow", [](httplib::Request const&, httplib::Response& res) {
            std::this_thread::sleep_for(std::chrono::milliseconds(600));
            res.set_content("{}", "application/json");
        });
        stub.start();

        auto const prompt = std::string("Prompt with \"quotes\", unicode é and\nnewlines");
        auto backend = HttpLlmBackend({ stub.url() + "/v1/chat/completions", "secret-key" });
        auto const response = backend.complete(request(prompt));
        CHECK(response.raw_text == canned);
        CHECK(seenAuth == "Bearer secret-key");

        auto const sent = json::parse(stub.bodies().back());
        CHECK(sent["model"] == "gpt-4o");
        CHECK(sent["temperature"] == 0.0);
        CHECK(sent["max_tokens"] == 2048);
        REQUIRE(sent["messages"].size() == 1);
        CHECK(sent["messages"][0]["role"] == "user");
        CHECK(sent["messages"][0]["content"].get<std::string>() == prompt);

        auto broken = HttpLlmBackend({ stub.url() + "/broken", "" });
        CHECK(code_of([&] { (void) broken.complete(request("x")); }) == ErrorCode::TransportError);

        auto slow = HttpLlmBackend({ stub.url() + "/slow", "" });
        auto quick = request("x");
        quick.timeout = std::chrono::milliseconds(200);
        CHECK(code_of([&] { (void) slow.complete(quick); }) == ErrorCode::Timeout);
    }

    TEST_CASE("unreachable endpoint")
    {
        auto backend = HttpLlmBackend({ "http://127.0.0.1:1/v1/chat/completions", "" });
        CHECK(code_of([&] { (void) backend.complete(request("x")); }) == ErrorCode::TransportError);
    }

    TEST_CASE("recording appends one line per exchange")
    {
        auto const path = (std::filesystem::temp_directory_path() / "droidpilot-recorder-test.jsonl").string();
        std::filesystem::remove(path);
        auto const prompt = std::string("line one\nline \"two\" é");
        {
            auto sink = JsonlFileSink(path);
            record_exchange(sink, request(prompt), { "reply", std::chrono::milliseconds(12), "replay" }, { "t1", 1, 1 });
        }
        auto lines = support::read_text(path);
        CHECK(std::count(lines.begin(), lines.end(), '\n') == 1);
        auto const doc = json::parse(lines.substr(0, lines.find('\n')));
        CHECK(doc["prompt"].get<std::string>() == prompt);
        CHECK(doc["response"] == "reply");
        CHECK(doc["trace_id"] == "t1");
        CHECK(doc["latency_ms"] == 12);
        {
            auto sink = JsonlFileSink(path);
            record_exchange(sink, request(prompt), { "reply 2", {}, "replay" }, { "t1", 2, 1 });
        }
        lines = support::read_text(path);
        CHECK(std::count(lines.begin(), lines.end(), '\n') == 2);
        std::filesystem::remove(path);
        CHECK(code_of([] { JsonlFileSink("/nonexistent-dir/x.jsonl"); }) == ErrorCode::SinkWriteError);
    }

    TEST_CASE("concurrent sessions keep their own records")
    {
        auto sinks = std::vector<MemorySink>(4);
        auto threads = std::vector<std::thread> {};
        for (auto s = 0; s < 4; ++s)
            threads.emplace_back([&, s] {
                for (auto i = 1; i <= 25; ++i)
                    record_exchange(sinks[static_cast<std::size_t>(s)], request("p"), { "r", {}, "replay" },
                                    { "trace-" + std::to_string(s), i, 1 });
            });
        for (auto& t: threads)
            t.join();
        for (auto s = 0; s < 4; ++s)
        {
            auto const& lines = sinks[static_cast<std::size_t>(s)].lines();
            REQUIRE(lines.size() == 25);
            for (auto const& line: lines)
                CHECK(json::parse(line)["trace_id"] == "trace-" + std::to_string(s));
        }
    }
}
