// SPDX-License-Identifier: Apache-2.0
#include "../http_util.hpp"

#include <droidpilot/device/webdriver.hpp>
#include <droidpilot/error.hpp>

#include <spdlog/spdlog.h>

namespace droidpilot::device
{

using nlohmann::json;

auto now_ms() -> std::int64_t
{
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

namespace
{

constexpr auto W3cElementKey = "element-6066-11e4-a52e-4f735466cecf";

auto error_name(json const& body) -> std::string
{
    if (body.is_object() && body.contains("value") && body["value"].is_object())
    {
        auto const& value = body["value"];
        if (value.contains("error") && value["error"].is_string())
            return value["error"].get<std::string>();
    }
    return {};
}

auto error_message(json const& body) -> std::string
{
    if (body.is_object() && body.contains("value") && body["value"].is_object())
    {
        auto const& value = body["value"];
        if (value.contains("message") && value["message"].is_string())
            return value["message"].get<std::string>();
    }
    return body.is_null() ? std::string("(empty body)") : body.dump();
}

auto perform(httplib::Client& client,
             std::string const& method,
             std::string const& path,
             json const* body) -> httplib::Result
{
    auto const payload = body ? body->dump() : std::string("{}");
    if (method == "GET")
        return client.Get(path);
    if (method == "DELETE")
        return client.Delete(path);
    return client.Post(path, payload, "application/json");
}

} // namespace

WebDriverSession::WebDriverSession(WdSessionState state, std::chrono::milliseconds timeout):
    _state(std::move(state)), _timeout(timeout)
{
}

WebDriverSession::~WebDriverSession()
{
    close();
}

auto WebDriverSession::open(std::string base_url, json const& capabilities, std::chrono::milliseconds timeout)
    -> std::unique_ptr<WebDriverSession>
{
    auto session = std::unique_ptr<WebDriverSession>(new WebDriverSession({ std::move(base_url), {}, false }, timeout));
    auto const body = json { { "capabilities", { { "alwaysMatch", capabilities.is_null() ? json::object() : capabilities } } } };
    auto const reply = session->send("POST", "/session", &body);
    if (reply.status < 200 || reply.status >= 300)
        throw Error(ErrorCode::SessionRejected, error_message(reply.body));

    auto sessionId = std::string {};
    auto const& b = reply.body;
    if (b.is_object() && b.contains("value") && b["value"].is_object() && b["value"].contains("sessionId")
        && b["value"]["sessionId"].is_string())
        sessionId = b["value"]["sessionId"].get<std::string>();
    else if (b.is_object() && b.contains("sessionId") && b["sessionId"].is_string())
        sessionId = b["sessionId"].get<std::string>();
    if (sessionId.empty())
        throw Error(ErrorCode::SessionRejected, "no session id in response");

    session->_state.session_id = std::move(sessionId);
    session->_state.open = true;
    spdlog::debug("webdriver session {} opened at {}", session->_state.session_id, session->_state.base_url);
    return session;
}

auto WebDriverSession::send(std::string const& method, std::string const& path, json const* body) -> Reply
{
    auto const url = detail::parse_url(_state.base_url);
    auto client = detail::make_client(url, _timeout);
    auto const fullPath = (url.path == "/" ? std::string() : url.path) + path;

    auto result = perform(*client, method, fullPath, body);
    if (!result)
        throw Error(ErrorCode::TransportError, method + " " + fullPath + ": " + httplib::to_string(result.error()));

    auto reply = Reply { result->status, json::parse(result->body, nullptr, false) };
    if (reply.body.is_discarded())
        reply.body = nullptr;
    return reply;
}

void WebDriverSession::require_open() const
{
    if (!_state.open)
        throw Error(ErrorCode::SessionGone, "session is closed");
}

void WebDriverSession::raise_for(Reply const& reply, ErrorCode fallback) const
{
    auto const name = error_name(reply.body);
    if (name == "invalid session id")
        throw Error(ErrorCode::SessionGone, error_message(reply.body));
    if (name == "no such element" || name == "stale element reference")
        throw Error(ErrorCode::ElementNotFound, error_message(reply.body));
    throw Error(fallback, "HTTP " + std::to_string(reply.status) + ": " + error_message(reply.body));
}

auto WebDriverSession::capture_source() -> screen::RawScreen
{
    require_open();
    auto const reply = send("GET", "/session/" + _state.session_id + "/source", nullptr);
    if (reply.status < 200 || reply.status >= 300)
    {
        if (reply.status == 404 || error_name(reply.body) == "invalid session id")
            throw Error(ErrorCode::SessionGone, error_message(reply.body));
        throw Error(ErrorCode::TransportError, "HTTP " + std::to_string(reply.status) + ": " + error_message(reply.body));
    }
    if (!reply.body.is_object() || !reply.body.contains("value") || !reply.body["value"].is_string())
        throw Error(ErrorCode::TransportError, "source response has no string value");
    return { reply.body["value"].get<std::string>(), now_ms(), tag() };
}

auto WebDriverSession::find_element(json const& query) -> std::string
{
    auto const reply = send("POST", "/session/" + _state.session_id + "/element", &query);
    if (reply.status < 200 || reply.status >= 300)
        raise_for(reply, ErrorCode::ActionRejected);

    auto const& b = reply.body;
    if (b.is_object() && b.contains("value") && b["value"].is_object())
    {
        auto const& value = b["value"];
        for (auto const* key: { W3cElementKey, "ELEMENT" })
            if (value.contains(key) && value[key].is_string())
                return value[key].get<std::string>();
    }
    throw Error(ErrorCode::ElementNotFound, "no element matched " + query.dump());
}

void WebDriverSession::execute(screen::Locator const& locator, Action const& action)
{
    require_open();
    auto const sessionPath = "/session/" + _state.session_id;

    auto queryFor = [&]() -> json {
        if (auto const* byId = std::get_if<screen::ByResourceId>(&locator))
            return { { "using", "id" }, { "value", byId->value } };
        if (auto const* byPath = std::get_if<screen::ByIndexPath>(&locator))
            return { { "using", "xpath" }, { "value", byPath->xpath() } };
        throw Error(ErrorCode::ActionRejected, "navigation locator used for an element action");
    };

    auto post = [&](std::string const& path, json const& body) {
        auto const reply = send("POST", path, &body);
        if (reply.status < 200 || reply.status >= 300)
            raise_for(reply, ErrorCode::ActionRejected);
    };

    switch (action.kind)
    {
        case ActionKind::Tap: {
            auto const elementId = find_element(queryFor());
            post(sessionPath + "/element/" + elementId + "/click", json::object());
            return;
        }
        case ActionKind::InputText: {
            auto const elementId = find_element(queryFor());
            post(sessionPath + "/element/" + elementId + "/value", json { { "text", action.text } });
            return;
        }
        case ActionKind::Back: post(sessionPath + "/back", json::object()); return;
        case ActionKind::ScrollUp:
        case ActionKind::ScrollDown: {
            auto const container =
                find_element(json { { "using", "xpath" }, { "value", "//*[@scrollable='true']" } });
            auto const args = json { { "elementId", container },
                                     { "direction", action.kind == ActionKind::ScrollUp ? "up" : "down" },
                                     { "percent", ScrollPercent } };
            post(sessionPath + "/execute/sync",
                 json { { "script", "mobile: scrollGesture" }, { "args", json::array({ args }) } });
            return;
        }
        case ActionKind::Terminate: break;
    }
    throw Error(ErrorCode::ActionRejected, "terminate is not an executable action");
}

void WebDriverSession::close()
{
    if (!_state.open)
        return;
    _state.open = false;
    try
    {
        (void) send("DELETE", "/session/" + _state.session_id, nullptr);
    }
    catch (Error const& e)
    {
        spdlog::warn("closing webdriver session {}: {}", _state.session_id, e.what());
    }
}

} // namespace droidpilot::device
