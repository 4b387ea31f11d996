// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <droidpilot/error.hpp>

#include <httplib.h>

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

namespace droidpilot::detail
{

struct Url
{
    std::string origin; // scheme://host[:port]
    std::string path;   // always starts with '/', no trailing slash unless root
};

/// Splits an http URL into origin and path. Throws Error{InvalidInput}.
inline auto parse_url(std::string_view url) -> Url
{
    auto const schemeEnd = url.find("://");
    if (schemeEnd == std::string_view::npos)
        throw Error(ErrorCode::InvalidInput, "URL without scheme: " + std::string(url));
    auto const scheme = url.substr(0, schemeEnd);
    if (scheme != "http")
        throw Error(ErrorCode::InvalidInput, "unsupported URL scheme '" + std::string(scheme) + "'");
    auto const hostStart = schemeEnd + 3;
    auto const pathStart = url.find('/', hostStart);
    auto out = Url {};
    out.origin = std::string(url.substr(0, pathStart));
    out.path = pathStart == std::string_view::npos ? "/" : std::string(url.substr(pathStart));
    if (out.origin.size() <= hostStart)
        throw Error(ErrorCode::InvalidInput, "URL without host: " + std::string(url));
    while (out.path.size() > 1 && out.path.back() == '/')
        out.path.pop_back();
    return out;
}

inline auto make_client(Url const& url, std::chrono::milliseconds timeout) -> std::unique_ptr<httplib::Client>
{
    auto client = std::make_unique<httplib::Client>(url.origin);
    auto const secs = static_cast<time_t>(timeout.count() / 1000);
    auto const usecs = static_cast<time_t>((timeout.count() % 1000) * 1000);
    client->set_connection_timeout(secs, usecs);
    client->set_read_timeout(secs, usecs);
    client->set_write_timeout(secs, usecs);
    client->set_keep_alive(false);
    return client;
}

inline auto is_timeout(httplib::Error error) -> bool
{
    return error == httplib::Error::ConnectionTimeout || error == httplib::Error::Read;
}

} // namespace droidpilot::detail
