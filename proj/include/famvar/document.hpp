#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace famvar {

using ElementId = std::string;

/// A node of a model document (an action, decision, object, ...). Variant
/// elements carry the "variant" stereotype and a tag naming the variant or
/// value they realize.
struct DocElement {
    ElementId id;
    std::string kind;
    std::string label;
    std::optional<std::string> stereotype;
    std::optional<std::string> tag;

    friend bool operator==(const DocElement&, const DocElement&) = default;
};

struct DocEdge {
    ElementId from;
    ElementId to;

    friend bool operator==(const DocEdge&, const DocEdge&) = default;
};

/// Generic element graph standing in for a UML diagram.
struct ModelDocument {
    std::string name;
    std::string kind;
    std::vector<DocElement> elements;
    std::vector<DocEdge> edges;

    const DocElement* find(std::string_view id) const {
        for (const auto& e : elements) {
            if (e.id == id) return &e;
        }
        return nullptr;
    }

    friend bool operator==(const ModelDocument&, const ModelDocument&) = default;
};

inline constexpr std::string_view variant_stereotype = "variant";

}  // namespace famvar
