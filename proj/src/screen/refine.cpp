// SPDX-License-Identifier: Apache-2.0
#include <droidpilot/digest.hpp>
#include <droidpilot/error.hpp>
#include <droidpilot/screen/refine.hpp>

#include <algorithm>

namespace droidpilot::screen
{

namespace
{

auto ends_with_any(std::string_view text, std::vector<std::string> const& suffixes) -> bool
{
    return std::any_of(suffixes.begin(), suffixes.end(), [&](auto const& suffix) { return text.ends_with(suffix); });
}

auto resource_suffix(std::string_view resourceId) -> std::string_view
{
    auto const slash = resourceId.rfind('/');
    return slash == std::string_view::npos ? resourceId : resourceId.substr(slash + 1);
}

auto short_class_name(std::string_view className) -> std::string_view
{
    auto const dot = className.rfind('.');
    return dot == std::string_view::npos ? className : className.substr(dot + 1);
}

auto is_image(UiNode const& node, RefineOptions const& options) -> bool
{
    return ends_with_any(node.class_name, options.image_suffixes);
}

auto own_text(UiNode const& node) -> std::string_view
{
    auto const text = node.attr_or_empty("text");
    return text.empty() ? node.attr_or_empty("content-desc") : text;
}

struct PendingElement
{
    RefinedElement element;
    std::vector<std::string> descendant_text;
    std::string resource_id;
    std::string class_name;
};

class Refiner
{
  public:
    Refiner(IconLabeler const& labeler, RefineOptions const& options): _labeler(labeler), _options(options) {}

    void walk(UiNode const& node, std::vector<int>& path, int enclosing)
    {
        if (node.flag("scrollable"))
            _hasScrollable = true;

        auto nextEnclosing = enclosing;
        if (is_interactive(node, _options))
        {
            auto pending = PendingElement {};
            auto& element = pending.element;
            element.source_path = path;
            element.enabled = node.attr_or_empty("enabled") != "false";
            if (ends_with_any(node.class_name, _options.editable_suffixes))
                element.kind = ElementKind::Input;
            else if (node.flag("checkable"))
            {
                element.kind = ElementKind::Check;
                element.checked = node.flag("checked");
            }
            else
                element.kind = ElementKind::Tap;
            element.input_capable = element.kind == ElementKind::Input;

            element.label = std::string(own_text(node));
            if (element.label.empty() && is_image(node, _options))
                element.label = _labeler.label(node);
            pending.resource_id = std::string(node.attr_or_empty("resource-id"));
            pending.class_name = node.class_name;

            nextEnclosing = static_cast<int>(_pending.size());
            _pending.push_back(std::move(pending));
        }
        else
        {
            auto info = std::string(own_text(node));
            auto const iconOnly = info.empty() && is_image(node, _options);
            if (iconOnly)
                info = _labeler.label(node);

            if (!info.empty())
            {
                if (enclosing >= 0)
                    _pending[static_cast<std::size_t>(enclosing)].descendant_text.push_back(std::move(info));
                else if (!iconOnly || info != FallbackIconLabel)
                    _context.push_back(std::move(info));
            }
        }

        for (auto i = 0; i < static_cast<int>(node.children.size()); ++i)
        {
            path.push_back(i);
            walk(node.children[static_cast<std::size_t>(i)], path, nextEnclosing);
            path.pop_back();
        }
    }

    auto finish(std::shared_ptr<RawScreen const> origin, std::shared_ptr<UiNode const> tree) -> RefinedScreen
    {
        auto screen = RefinedScreen {};
        screen.origin = std::move(origin);
        screen.tree = std::move(tree);
        screen.context_lines = std::move(_context);

        for (auto& pending: _pending)
        {
            auto& element = pending.element;
            if (element.label.empty() || element.label == FallbackIconLabel)
            {
                auto joined = std::string {};
                for (auto const& text: pending.descendant_text)
                {
                    if (text == FallbackIconLabel)
                        continue;
                    if (!joined.empty())
                        joined += ' ';
                    joined += text;
                }
                if (!joined.empty())
                    element.label = std::move(joined);
            }
            if (element.label.empty())
                element.label = std::string(resource_suffix(pending.resource_id));
            if (element.label.empty())
                element.label = std::string(short_class_name(pending.class_name));

            element.id = static_cast<int>(screen.elements.size());
            screen.elements.push_back(std::move(element));
        }

        auto addSynthetic = [&](ElementKind kind, std::string label) {
            auto element = RefinedElement {};
            element.id = static_cast<int>(screen.elements.size());
            element.kind = kind;
            element.label = std::move(label);
            screen.elements.push_back(std::move(element));
        };
        if (_hasScrollable)
        {
            addSynthetic(ElementKind::SyntheticScrollUp, "Scroll Up");
            addSynthetic(ElementKind::SyntheticScrollDown, "Scroll Down");
        }
        addSynthetic(ElementKind::SyntheticBack, "Back");

        screen.screen_hash = digest_hex(render(screen));
        return screen;
    }

  private:
    IconLabeler const& _labeler;
    RefineOptions const& _options;
    std::vector<PendingElement> _pending;
    std::vector<std::string> _context;
    bool _hasScrollable = false;
};

void append_escaped(std::string& out, std::string_view text, bool quoted)
{
    for (auto const c: text)
    {
        switch (c)
        {
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            case '"':
                if (quoted)
                    out += "\\\"";
                else
                    out += c;
                break;
            default: out += c;
        }
    }
}

} // namespace

TableIconLabeler::TableIconLabeler(): _table(bundled_table())
{
}

TableIconLabeler::TableIconLabeler(std::map<std::string, std::string, std::less<>> table): _table(std::move(table))
{
}

auto TableIconLabeler::bundled_table() -> std::map<std::string, std::string, std::less<>>
{
    return {
        { "ic_add", "Add" },
        { "ic_arrow_back", "Navigate up" },
        { "ic_back", "Navigate up" },
        { "ic_call", "Call" },
        { "ic_camera", "Camera" },
        { "ic_check", "Done" },
        { "ic_close", "Close" },
        { "ic_delete", "Delete" },
        { "ic_done", "Done" },
        { "ic_edit", "Edit" },
        { "ic_email", "Email" },
        { "ic_favorite", "Favorite" },
        { "ic_home", "Home" },
        { "ic_info", "Info" },
        { "ic_menu", "Menu" },
        { "ic_more_vert", "More options" },
        { "ic_refresh", "Refresh" },
        { "ic_save", "Save" },
        { "ic_search", "Search" },
        { "ic_send", "Send" },
        { "ic_settings", "Settings" },
        { "ic_share", "Share" },
        { "ic_star", "Favorite" },
    };
}

auto TableIconLabeler::label(UiNode const& node) const -> std::string
{
    if (auto const desc = node.attr_or_empty("content-desc"); !desc.empty())
        return std::string(desc);
    if (auto const rid = node.attr_or_empty("resource-id"); !rid.empty())
        if (auto const it = _table.find(resource_suffix(rid)); it != _table.end())
            return it->second;
    return std::string(FallbackIconLabel);
}

auto to_string(ElementKind kind) -> std::string_view
{
    switch (kind)
    {
        case ElementKind::Tap: return "tap";
        case ElementKind::Input: return "input";
        case ElementKind::Check: return "check";
        case ElementKind::SyntheticBack: return "back";
        case ElementKind::SyntheticScrollUp: return "scroll-up";
        case ElementKind::SyntheticScrollDown: return "scroll-down";
    }
    return "tap";
}

auto RefinedScreen::find(int id) const -> RefinedElement const*
{
    if (id < 0 || static_cast<std::size_t>(id) >= elements.size())
        return nullptr;
    return &elements[static_cast<std::size_t>(id)];
}

auto RefinedScreen::back_id() const -> int
{
    return static_cast<int>(elements.size()) - 1;
}

auto is_interactive(UiNode const& node, RefineOptions const& options) -> bool
{
    return node.flag("clickable") || node.flag("checkable") || ends_with_any(node.class_name, options.editable_suffixes);
}

auto refine(UiNode const& root,
            IconLabeler const& labeler,
            RefineOptions const& options,
            std::shared_ptr<RawScreen const> origin) -> RefinedScreen
{
    auto refiner = Refiner(labeler, options);
    auto path = std::vector<int> {};
    refiner.walk(root, path, -1);
    return refiner.finish(std::move(origin), std::make_shared<UiNode const>(root));
}

auto refine_raw(RawScreen const& raw, RefineOptions const& options) -> RefinedScreen
{
    auto const labeler = TableIconLabeler {};
    auto origin = std::make_shared<RawScreen const>(raw);
    return refine(parse_screen(*origin), labeler, options, origin);
}

auto render(RefinedScreen const& screen) -> std::string
{
    auto out = std::string {};
    for (auto const& element: screen.elements)
    {
        out += '[';
        out += std::to_string(element.id);
        out += "] ";
        out += to_string(element.kind);
        out += " \"";
        append_escaped(out, element.label, true);
        out += '"';
        if (element.input_capable)
            out += " (accepts text)";
        if (element.checked)
            out += *element.checked ? " (checked)" : " (unchecked)";
        if (!element.enabled)
            out += " (disabled)";
        out += '\n';
    }
    for (auto const& line: screen.context_lines)
    {
        out += "- ";
        append_escaped(out, line, false);
        out += '\n';
    }
    return out;
}

auto ByIndexPath::xpath() const -> std::string
{
    auto out = std::string("/*");
    for (auto const index: path)
        out += "/*[" + std::to_string(index + 1) + "]";
    return out;
}

namespace
{
auto count_resource_id(UiNode const& node, std::string_view rid) -> int
{
    auto count = node.attr_or_empty("resource-id") == rid ? 1 : 0;
    for (auto const& child: node.children)
        count += count_resource_id(child, rid);
    return count;
}
} // namespace

auto resolve_locator(RefinedScreen const& screen, int id) -> Locator
{
    auto const* element = screen.find(id);
    if (!element)
        throw Error(ErrorCode::UnknownElement, "no element with id " + std::to_string(id));

    switch (element->kind)
    {
        case ElementKind::SyntheticBack: return Navigate { NavCommand::Back };
        case ElementKind::SyntheticScrollUp: return Navigate { NavCommand::ScrollUp };
        case ElementKind::SyntheticScrollDown: return Navigate { NavCommand::ScrollDown };
        default: break;
    }

    if (screen.tree)
    {
        auto const* node = node_at(*screen.tree, element->source_path);
        if (!node)
            throw Error(ErrorCode::UnknownElement, "element " + std::to_string(id) + " has no source node");
        auto const rid = node->attr_or_empty("resource-id");
        if (!rid.empty() && count_resource_id(*screen.tree, rid) == 1)
            return ByResourceId { std::string(rid) };
    }
    return ByIndexPath { element->source_path };
}

auto describe(Locator const& locator) -> std::string
{
    struct Visitor
    {
        auto operator()(ByResourceId const& l) const -> std::string { return "resource-id=" + l.value; }
        auto operator()(ByIndexPath const& l) const -> std::string { return "xpath=" + l.xpath(); }
        auto operator()(Navigate const& l) const -> std::string
        {
            switch (l.command)
            {
                case NavCommand::Back: return "nav=back";
                case NavCommand::ScrollUp: return "nav=scroll-up";
                case NavCommand::ScrollDown: return "nav=scroll-down";
            }
            return "nav=back";
        }
    };
    return std::visit(Visitor {}, locator);
}

} // namespace droidpilot::screen
