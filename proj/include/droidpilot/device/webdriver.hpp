// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <droidpilot/device/session.hpp>
#include <droidpilot/error.hpp>

#include <nlohmann/json.hpp>

#include <chrono>
#include <memory>
#include <string>

namespace droidpilot::device
{

struct WdSessionState
{
    std::string base_url;
    std::string session_id;
    bool open = false;
};

/// DeviceSession over the WebDriver wire protocol (Appium-style automation server).
///
/// Endpoints used, relative to the base URL:
///   POST   /session                          create
///   GET    /session/{id}/source              capture
///   POST   /session/{id}/element             find {using, value}
///   POST   /session/{id}/element/{eid}/click tap
///   POST   /session/{id}/element/{eid}/value type {text}
///   POST   /session/{id}/back                back
///   POST   /session/{id}/execute/sync        scroll gesture on the scrollable container
///   DELETE /session/{id}                     close
class WebDriverSession final: public DeviceSession
{
  public:
    /// Creates a session. Throws Error{TransportError} or Error{SessionRejected}.
    [[nodiscard]] static auto open(std::string base_url,
                                   nlohmann::json const& capabilities,
                                   std::chrono::milliseconds timeout = std::chrono::seconds(30))
        -> std::unique_ptr<WebDriverSession>;

    ~WebDriverSession() override;
    WebDriverSession(WebDriverSession const&) = delete;
    auto operator=(WebDriverSession const&) -> WebDriverSession& = delete;

    [[nodiscard]] auto capture_source() -> screen::RawScreen override;
    void execute(screen::Locator const& locator, Action const& action) override;
    void close() override;
    [[nodiscard]] auto tag() const -> std::string override { return "webdriver"; }

    [[nodiscard]] auto state() const -> WdSessionState const& { return _state; }

    /// Scroll fraction of the container height used per scroll step.
    static constexpr double ScrollPercent = 0.75;

  private:
    WebDriverSession(WdSessionState state, std::chrono::milliseconds timeout);

    struct Reply
    {
        int status = 0;
        nlohmann::json body;
    };

    auto send(std::string const& method, std::string const& path, nlohmann::json const* body) -> Reply;
    auto find_element(nlohmann::json const& query) -> std::string;
    void require_open() const;
    [[noreturn]] void raise_for(Reply const& reply, ErrorCode fallback) const;

    WdSessionState _state;
    std::chrono::milliseconds _timeout;
};

} // namespace droidpilot::device
