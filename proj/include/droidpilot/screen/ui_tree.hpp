// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace droidpilot::screen
{

/// A UI-hierarchy dump as captured from a device backend.
struct RawScreen
{
    std::string source;
    std::int64_t captured_at = 0; // ms since epoch
    std::string backend_tag;
};

using Attribute = std::pair<std::string, std::string>;

/// One element of a parsed hierarchy. Attributes keep document order.
struct UiNode
{
    std::string tag; // element name as written in the document
    std::string class_name;
    std::vector<Attribute> attributes;
    std::vector<UiNode> children;
    int doc_index = 0;

    /// Value of attribute `name`, or nullopt when absent.
    [[nodiscard]] auto attr(std::string_view name) const -> std::optional<std::string_view>;
    /// Value of attribute `name`, or empty when absent.
    [[nodiscard]] auto attr_or_empty(std::string_view name) const -> std::string_view;
    /// True iff attribute `name` is exactly "true".
    [[nodiscard]] auto flag(std::string_view name) const -> bool;
};

/// Parses the XML source of `raw` into a node tree. The root is the document element;
/// doc_index is assigned in pre-order. Element names become class_name unless the
/// element carries a `class` attribute (the `<node class=...>` dump dialect).
/// Throws Error{MalformedXml} or Error{EmptyDocument}.
[[nodiscard]] auto parse_screen(RawScreen const& raw) -> UiNode;
[[nodiscard]] auto parse_xml(std::string_view source) -> UiNode;

/// Writes the tree back to XML (tags and attributes in their original order).
[[nodiscard]] auto to_xml(UiNode const& root) -> std::string;

/// Follows a child-index path from `root`; nullptr if the path leaves the tree.
[[nodiscard]] auto node_at(UiNode const& root, std::span<int const> path) -> UiNode const*;

/// Number of nodes in the tree rooted at `root`.
[[nodiscard]] auto count_nodes(UiNode const& root) -> std::size_t;

} // namespace droidpilot::screen
