// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <droidpilot/action.hpp>
#include <droidpilot/screen/refine.hpp>
#include <droidpilot/screen/ui_tree.hpp>

#include <string>

namespace droidpilot::device
{

/// A live connection to one device (real or simulated), used by one agent
/// session at a time. After execute() returns, capture_source() observes the
/// post-action state.
class DeviceSession
{
  public:
    virtual ~DeviceSession() = default;

    [[nodiscard]] virtual auto capture_source() -> screen::RawScreen = 0;
    /// Throws Error{ElementNotFound}, Error{ActionRejected}, Error{TransportError}
    /// or Error{SessionGone}.
    virtual void execute(screen::Locator const& locator, Action const& action) = 0;
    /// Idempotent.
    virtual void close() = 0;
    [[nodiscard]] virtual auto tag() const -> std::string = 0;
};

[[nodiscard]] auto now_ms() -> std::int64_t;

} // namespace droidpilot::device
