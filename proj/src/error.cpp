// SPDX-License-Identifier: Apache-2.0
#include <droidpilot/error.hpp>

namespace droidpilot
{

auto to_string(ErrorCode code) -> std::string_view
{
    switch (code)
    {
        case ErrorCode::MalformedXml: return "MalformedXml";
        case ErrorCode::EmptyDocument: return "EmptyDocument";
        case ErrorCode::UnknownElement: return "UnknownElement";
        case ErrorCode::NoJsonFound: return "NoJsonFound";
        case ErrorCode::MissingField: return "MissingField";
        case ErrorCode::TypeMismatch: return "TypeMismatch";
        case ErrorCode::TextOnNonInput: return "TextOnNonInput";
        case ErrorCode::InconsistentTermination: return "InconsistentTermination";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::TransportError: return "TransportError";
        case ErrorCode::ScriptExhausted: return "ScriptExhausted";
        case ErrorCode::SinkWriteError: return "SinkWriteError";
        case ErrorCode::SessionRejected: return "SessionRejected";
        case ErrorCode::SessionGone: return "SessionGone";
        case ErrorCode::ElementNotFound: return "ElementNotFound";
        case ErrorCode::ActionRejected: return "ActionRejected";
        case ErrorCode::SpecParseError: return "SpecParseError";
        case ErrorCode::DanglingReference: return "DanglingReference";
        case ErrorCode::NoPath: return "NoPath";
        case ErrorCode::MissingRecording: return "MissingRecording";
        case ErrorCode::InvalidInput: return "InvalidInput";
    }
    return "Unknown";
}

namespace
{
auto compose(ErrorCode code, std::string const& detail) -> std::string
{
    auto message = std::string(to_string(code));
    if (!detail.empty())
        message += ": " + detail;
    return message;
}
} // namespace

Error::Error(ErrorCode code, std::string detail):
    std::runtime_error(compose(code, detail)), _code(code), _detail(std::move(detail))
{
}

} // namespace droidpilot
