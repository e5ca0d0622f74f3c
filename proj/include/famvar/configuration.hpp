#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "famvar/model.hpp"

namespace famvar {

/// Stakeholder input for deriving one product.
struct Requirements {
    AreaId area;
    std::vector<ValueId> pins;        ///< values the product must have
    std::vector<VariantId> excludes;  ///< capabilities explicitly not wanted

    friend bool operator==(const Requirements&, const Requirements&) = default;
};

/// Final include/exclude decision for one variant.
struct VariantChoice {
    VariantId variant;
    bool included = false;
    std::vector<ValueId> values;  ///< empty when excluded

    friend bool operator==(const VariantChoice&, const VariantChoice&) = default;
};

/// A total assignment over a model's variants, in model order.
struct Configuration {
    AreaId area;
    std::vector<VariantChoice> choices;

    const VariantChoice* find(std::string_view variant) const {
        for (const auto& c : choices) {
            if (c.variant == variant) return &c;
        }
        return nullptr;
    }

    bool selects(std::string_view ref) const {
        auto* c = find(owner_of(ref));
        if (!c || !c->included) return false;
        if (is_variant_id(ref)) return true;
        return std::find(c->values.begin(), c->values.end(), ref) != c->values.end();
    }

    friend bool operator==(const Configuration&, const Configuration&) = default;
};

enum class StateKind { undecided, excluded, included, forced_included, forced_excluded };

inline std::string_view to_string(StateKind k) {
    switch (k) {
        case StateKind::undecided: return "undecided";
        case StateKind::excluded: return "excluded";
        case StateKind::included: return "included";
        case StateKind::forced_included: return "forcedIncluded";
        case StateKind::forced_excluded: return "forcedExcluded";
    }
    return "undecided";
}

/// Live selection state of a variant during customization. Forced states
/// record the id of the decision (or pin) that caused them.
struct VariantState {
    StateKind kind = StateKind::undecided;
    std::vector<ValueId> selected;  ///< model order
    RefId cause;

    bool is_included() const { return kind == StateKind::included || kind == StateKind::forced_included; }
    bool is_excluded() const { return kind == StateKind::excluded || kind == StateKind::forced_excluded; }
    /// Excluded, or included with at least one value chosen.
    bool is_decided() const { return is_excluded() || (is_included() && !selected.empty()); }

    friend bool operator==(const VariantState&, const VariantState&) = default;
};

struct StateEntry {
    VariantId variant;
    VariantState state;

    friend bool operator==(const StateEntry&, const StateEntry&) = default;
};

/// Per-variant states in model order.
using StateMap = std::vector<StateEntry>;

inline const VariantState* find_state(const StateMap& states, std::string_view variant) {
    for (const auto& e : states) {
        if (e.variant == variant) return &e.state;
    }
    return nullptr;
}

}  // namespace famvar
