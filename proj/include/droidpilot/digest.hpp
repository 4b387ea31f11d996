// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace droidpilot
{

/// 64-bit FNV-1a over the bytes of `text`, as 16 lowercase hex digits.
/// Stable across platforms and runs.
[[nodiscard]] auto digest_hex(std::string_view text) -> std::string;

} // namespace droidpilot
