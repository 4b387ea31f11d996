// SPDX-License-Identifier: Apache-2.0
#include <droidpilot/error.hpp>
#include <droidpilot/screen/ui_tree.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>

namespace droidpilot::screen
{

auto UiNode::attr(std::string_view name) const -> std::optional<std::string_view>
{
    for (auto const& [key, value]: attributes)
        if (key == name)
            return std::string_view(value);
    return std::nullopt;
}

auto UiNode::attr_or_empty(std::string_view name) const -> std::string_view
{
    return attr(name).value_or(std::string_view {});
}

auto UiNode::flag(std::string_view name) const -> bool
{
    return attr(name) == std::optional<std::string_view>("true");
}

namespace
{

// Minimal non-validating XML reader for hierarchy dumps: elements, attributes,
// character/entity references, comments, processing instructions, CDATA and a
// DOCTYPE declaration. Character data between elements is discarded.
class XmlReader
{
  public:
    explicit XmlReader(std::string_view source): _src(source) {}

    auto read() -> UiNode
    {
        skip_misc();
        if (at_end())
            throw Error(ErrorCode::EmptyDocument, "no root element");
        if (peek() != '<')
            fail("content before root element");

        auto root = std::optional<UiNode> {};
        // Stack of open elements; children are attached when an element closes.
        auto open = std::vector<UiNode> {};
        auto nextIndex = 0;

        while (true)
        {
            if (at_end())
                fail("unexpected end of document inside <" + (open.empty() ? std::string("?") : open.back().tag) + ">");

            if (peek() != '<')
            {
                if (open.empty())
                    fail("text outside root element");
                skip_text();
                continue;
            }

            if (starts_with("<!--"))
            {
                skip_comment();
                continue;
            }
            if (starts_with("<![CDATA["))
            {
                if (open.empty())
                    fail("CDATA outside root element");
                skip_until("]]>", "unterminated CDATA section");
                continue;
            }
            if (starts_with("<?"))
            {
                skip_until("?>", "unterminated processing instruction");
                continue;
            }
            if (starts_with("</"))
            {
                _pos += 2;
                auto const name = read_name();
                skip_ws();
                expect('>');
                if (open.empty() || open.back().tag != name)
                    fail("mismatched closing tag </" + std::string(name) + ">");
                auto node = std::move(open.back());
                open.pop_back();
                if (open.empty())
                {
                    root = std::move(node);
                    break;
                }
                open.back().children.push_back(std::move(node));
                continue;
            }
            if (starts_with("<!"))
                fail("unexpected markup declaration");

            ++_pos; // '<'
            auto node = UiNode {};
            node.tag = std::string(read_name());
            node.doc_index = nextIndex++;
            auto const selfClosing = read_attributes(node);
            auto const cls = node.attr("class");
            node.class_name = cls ? std::string(*cls) : node.tag;

            if (selfClosing)
            {
                if (open.empty())
                {
                    root = std::move(node);
                    break;
                }
                open.back().children.push_back(std::move(node));
            }
            else
            {
                open.push_back(std::move(node));
            }
        }

        skip_misc();
        if (!at_end())
            fail("content after root element");
        return std::move(*root);
    }

  private:
    [[noreturn]] void fail(std::string const& what) const
    {
        throw Error(ErrorCode::MalformedXml, what + " (offset " + std::to_string(_pos) + ")");
    }

    [[nodiscard]] auto at_end() const -> bool { return _pos >= _src.size(); }
    [[nodiscard]] auto peek() const -> char { return _src[_pos]; }
    [[nodiscard]] auto starts_with(std::string_view prefix) const -> bool
    {
        return _src.substr(_pos, prefix.size()) == prefix;
    }

    static auto is_space(char c) -> bool { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
    static auto is_name_start(char c) -> bool
    {
        auto const u = static_cast<unsigned char>(c);
        return std::isalpha(u) || c == '_' || c == ':' || u >= 0x80;
    }
    static auto is_name_char(char c) -> bool
    {
        auto const u = static_cast<unsigned char>(c);
        return is_name_start(c) || std::isdigit(u) || c == '-' || c == '.';
    }

    void skip_ws()
    {
        while (!at_end() && is_space(peek()))
            ++_pos;
    }

    void expect(char c)
    {
        if (at_end() || peek() != c)
            fail(std::string("expected '") + c + "'");
        ++_pos;
    }

    void skip_until(std::string_view terminator, char const* what)
    {
        auto const end = _src.find(terminator, _pos);
        if (end == std::string_view::npos)
            fail(what);
        _pos = end + terminator.size();
    }

    void skip_comment() { skip_until("-->", "unterminated comment"); }

    void skip_text()
    {
        while (!at_end() && peek() != '<')
        {
            if (peek() == '&')
                (void) read_reference();
            else
                ++_pos;
        }
    }

    // Whitespace, comments, processing instructions and DOCTYPE outside the root.
    void skip_misc()
    {
        while (true)
        {
            skip_ws();
            if (starts_with("<!--"))
                skip_comment();
            else if (starts_with("<?"))
                skip_until("?>", "unterminated processing instruction");
            else if (starts_with("<!DOCTYPE"))
                skip_doctype();
            else
                return;
        }
    }

    void skip_doctype()
    {
        auto depth = 0;
        while (!at_end())
        {
            auto const c = _src[_pos++];
            if (c == '[')
                ++depth;
            else if (c == ']')
                --depth;
            else if (c == '>' && depth == 0)
                return;
        }
        fail("unterminated DOCTYPE");
    }

    auto read_name() -> std::string_view
    {
        auto const start = _pos;
        if (at_end() || !is_name_start(peek()))
            fail("expected a name");
        while (!at_end() && is_name_char(peek()))
            ++_pos;
        return _src.substr(start, _pos - start);
    }

    // Returns true for a self-closing tag.
    auto read_attributes(UiNode& node) -> bool
    {
        while (true)
        {
            auto const hadSpace = !at_end() && is_space(peek());
            skip_ws();
            if (at_end())
                fail("unexpected end of document in tag <" + node.tag + ">");
            if (starts_with("/>"))
            {
                _pos += 2;
                return true;
            }
            if (peek() == '>')
            {
                ++_pos;
                return false;
            }
            if (!hadSpace)
                fail("expected whitespace before attribute");
            auto name = std::string(read_name());
            skip_ws();
            expect('=');
            skip_ws();
            auto value = read_attribute_value();
            if (node.attr(name))
                fail("duplicate attribute '" + name + "'");
            node.attributes.emplace_back(std::move(name), std::move(value));
        }
    }

    auto read_attribute_value() -> std::string
    {
        if (at_end() || (peek() != '"' && peek() != '\''))
            fail("expected quoted attribute value");
        auto const quote = _src[_pos++];
        auto value = std::string {};
        while (true)
        {
            if (at_end())
                fail("unterminated attribute value");
            auto const c = peek();
            if (c == quote)
            {
                ++_pos;
                return value;
            }
            if (c == '<')
                fail("'<' in attribute value");
            if (c == '&')
                value += read_reference();
            else
            {
                value += is_space(c) ? ' ' : c;
                ++_pos;
            }
        }
    }

    auto read_reference() -> std::string
    {
        auto const end = _src.find(';', _pos);
        if (end == std::string_view::npos || end - _pos > 12)
            fail("unterminated entity reference");
        auto const entity = _src.substr(_pos + 1, end - _pos - 1);
        _pos = end + 1;
        if (entity == "amp")
            return "&";
        if (entity == "lt")
            return "<";
        if (entity == "gt")
            return ">";
        if (entity == "quot")
            return "\"";
        if (entity == "apos")
            return "'";
        if (entity.size() >= 2 && entity[0] == '#')
        {
            auto const hex = entity[1] == 'x';
            auto const digits = entity.substr(hex ? 2 : 1);
            if (digits.empty())
                fail("empty character reference");
            auto code = std::uint32_t { 0 };
            for (auto const d: digits)
            {
                auto const u = static_cast<unsigned char>(d);
                std::uint32_t v = 0;
                if (std::isdigit(u))
                    v = static_cast<std::uint32_t>(d - '0');
                else if (hex && std::isxdigit(u))
                    v = static_cast<std::uint32_t>(std::tolower(u) - 'a' + 10);
                else
                    fail("bad character reference");
                code = code * (hex ? 16 : 10) + v;
                if (code > 0x10FFFF)
                    fail("character reference out of range");
            }
            if (code == 0)
                fail("NUL character reference");
            return encode_utf8(code);
        }
        fail("unknown entity '&" + std::string(entity) + ";'");
    }

    static auto encode_utf8(std::uint32_t code) -> std::string
    {
        auto out = std::string {};
        if (code < 0x80)
            out += static_cast<char>(code);
        else if (code < 0x800)
        {
            out += static_cast<char>(0xC0 | (code >> 6));
            out += static_cast<char>(0x80 | (code & 0x3F));
        }
        else if (code < 0x10000)
        {
            out += static_cast<char>(0xE0 | (code >> 12));
            out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (code & 0x3F));
        }
        else
        {
            out += static_cast<char>(0xF0 | (code >> 18));
            out += static_cast<char>(0x80 | ((code >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (code & 0x3F));
        }
        return out;
    }

    std::string_view _src;
    std::size_t _pos = 0;
};

void escape_into(std::string& out, std::string_view text)
{
    for (auto const c: text)
    {
        switch (c)
        {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\n': out += "&#10;"; break;
            case '\r': out += "&#13;"; break;
            case '\t': out += "&#9;"; break;
            default: out += c;
        }
    }
}

void write_node(std::string& out, UiNode const& node, int depth)
{
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += '<';
    out += node.tag;
    for (auto const& [key, value]: node.attributes)
    {
        out += ' ';
        out += key;
        out += "=\"";
        escape_into(out, value);
        out += '"';
    }
    if (node.children.empty())
    {
        out += " />\n";
        return;
    }
    out += ">\n";
    for (auto const& child: node.children)
        write_node(out, child, depth + 1);
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += "</";
    out += node.tag;
    out += ">\n";
}

} // namespace

auto parse_xml(std::string_view source) -> UiNode
{
    return XmlReader(source).read();
}

auto parse_screen(RawScreen const& raw) -> UiNode
{
    return parse_xml(raw.source);
}

auto to_xml(UiNode const& root) -> std::string
{
    auto out = std::string("<?xml version='1.0' encoding='UTF-8' standalone='yes' ?>\n");
    write_node(out, root, 0);
    return out;
}

auto node_at(UiNode const& root, std::span<int const> path) -> UiNode const*
{
    auto const* node = &root;
    for (auto const index: path)
    {
        if (index < 0 || static_cast<std::size_t>(index) >= node->children.size())
            return nullptr;
        node = &node->children[static_cast<std::size_t>(index)];
    }
    return node;
}

auto count_nodes(UiNode const& root) -> std::size_t
{
    auto total = std::size_t { 1 };
    for (auto const& child: root.children)
        total += count_nodes(child);
    return total;
}

} // namespace droidpilot::screen
