// SPDX-License-Identifier: Apache-2.0
#include <droidpilot/digest.hpp>

#include <cstdint>

namespace droidpilot
{

auto digest_hex(std::string_view text) -> std::string
{
    constexpr std::uint64_t offsetBasis = 0xcbf29ce484222325ULL;
    constexpr std::uint64_t prime = 0x100000001b3ULL;

    auto hash = offsetBasis;
    for (auto const ch: text)
    {
        hash ^= static_cast<std::uint8_t>(ch);
        hash *= prime;
    }

    constexpr char digits[] = "0123456789abcdef";
    auto out = std::string(16, '0');
    for (auto i = 15; i >= 0; --i)
    {
        out[static_cast<std::size_t>(i)] = digits[hash & 0xF];
        hash >>= 4;
    }
    return out;
}

} // namespace droidpilot
