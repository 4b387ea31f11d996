// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <droidpilot/screen/ui_tree.hpp>

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace droidpilot::screen
{

/// Label returned when nothing better is known about an icon.
inline constexpr std::string_view FallbackIconLabel = "icon";

/// Turns an image node into a short textual label.
class IconLabeler
{
  public:
    virtual ~IconLabeler() = default;
    [[nodiscard]] virtual auto label(UiNode const& node) const -> std::string = 0;
};

/// Default labeler: content-desc, then the resource-id suffix looked up in a
/// name table, then FallbackIconLabel.
class TableIconLabeler final: public IconLabeler
{
  public:
    TableIconLabeler();
    explicit TableIconLabeler(std::map<std::string, std::string, std::less<>> table);

    [[nodiscard]] auto label(UiNode const& node) const -> std::string override;
    [[nodiscard]] auto table() const noexcept -> auto const& { return _table; }

    /// The bundled resource-name to label table.
    [[nodiscard]] static auto bundled_table() -> std::map<std::string, std::string, std::less<>>;

  private:
    std::map<std::string, std::string, std::less<>> _table;
};

struct RefineOptions
{
    /// Class-name suffixes treated as text inputs.
    std::vector<std::string> editable_suffixes { "EditText", "AutoCompleteTextView" };
    /// Class-name suffixes treated as icons.
    std::vector<std::string> image_suffixes { "ImageView", "ImageButton" };
};

enum class ElementKind
{
    Tap,
    Input,
    Check,
    SyntheticBack,
    SyntheticScrollUp,
    SyntheticScrollDown,
};

/// Short name used in the rendered representation ("tap", "input", "back", ...).
[[nodiscard]] auto to_string(ElementKind kind) -> std::string_view;

struct RefinedElement
{
    int id = 0;
    ElementKind kind = ElementKind::Tap;
    std::string label;
    std::vector<int> source_path; // empty for synthetic elements
    bool input_capable = false;
    bool enabled = true;
    std::optional<bool> checked; // set for Check elements only

    [[nodiscard]] auto is_synthetic() const noexcept -> bool
    {
        return kind == ElementKind::SyntheticBack || kind == ElementKind::SyntheticScrollUp
               || kind == ElementKind::SyntheticScrollDown;
    }

    auto operator==(RefinedElement const&) const -> bool = default;
};

/// The compact representation the agent reasons over.
struct RefinedScreen
{
    std::vector<RefinedElement> elements;
    std::vector<std::string> context_lines;
    std::string screen_hash;
    std::shared_ptr<RawScreen const> origin;
    std::shared_ptr<UiNode const> tree;

    [[nodiscard]] auto find(int id) const -> RefinedElement const*;
    [[nodiscard]] auto back_id() const -> int;
};

[[nodiscard]] auto is_interactive(UiNode const& node, RefineOptions const& options = {}) -> bool;

[[nodiscard]] auto refine(UiNode const& root,
                          IconLabeler const& labeler,
                          RefineOptions const& options = {},
                          std::shared_ptr<RawScreen const> origin = nullptr) -> RefinedScreen;

/// Convenience: parse + refine with the default labeler.
[[nodiscard]] auto refine_raw(RawScreen const& raw, RefineOptions const& options = {}) -> RefinedScreen;

/// Deterministic text form embedded in prompts. One line per element
/// (`[<id>] <kind> "<label>"` plus markers), then context lines prefixed `- `.
[[nodiscard]] auto render(RefinedScreen const& screen) -> std::string;

enum class NavCommand
{
    Back,
    ScrollUp,
    ScrollDown,
};

struct ByResourceId
{
    std::string value;
    auto operator==(ByResourceId const&) const -> bool = default;
};

struct ByIndexPath
{
    std::vector<int> path;
    /// Absolute path expression, e.g. `/*/*[1]/*[3]` (1-based child positions).
    [[nodiscard]] auto xpath() const -> std::string;
    auto operator==(ByIndexPath const&) const -> bool = default;
};

struct Navigate
{
    NavCommand command = NavCommand::Back;
    auto operator==(Navigate const&) const -> bool = default;
};

using Locator = std::variant<ByResourceId, ByIndexPath, Navigate>;

/// Throws Error{UnknownElement} when `id` is not on the screen.
[[nodiscard]] auto resolve_locator(RefinedScreen const& screen, int id) -> Locator;

[[nodiscard]] auto describe(Locator const& locator) -> std::string;

} // namespace droidpilot::screen
