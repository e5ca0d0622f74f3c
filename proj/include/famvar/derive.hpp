#pragma once

/// Decision-table and feature-tree derivation.

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "famvar/configuration.hpp"
#include "famvar/configure.hpp"
#include "famvar/model.hpp"
#include "famvar/xml.hpp"

namespace famvar {

struct Choice {
    ValueId id;
    std::string name;

    friend bool operator==(const Choice&, const Choice&) = default;
};

/// One decision an application engineer has to make. Dependent variants are
/// subordinated under the variant owning their first dependency target.
struct DecisionEntry {
    VariantId variant;
    std::string description;
    std::vector<RefId> guard;  ///< the variant's dependency targets; empty at top level
    std::vector<Choice> choices;
    VariantId trace;
    std::vector<DecisionEntry> children;

    friend bool operator==(const DecisionEntry&, const DecisionEntry&) = default;
};

struct DecisionTable {
    std::vector<DecisionEntry> entries;

    friend bool operator==(const DecisionTable&, const DecisionTable&) = default;
};

inline std::size_t count_entries(const std::vector<DecisionEntry>& entries) {
    std::size_t n = 0;
    for (const auto& e : entries) n += 1 + count_entries(e.children);
    return n;
}

/// Pre-order walk over the forest.
inline void visit_entries(const std::vector<DecisionEntry>& entries,
                          const std::function<void(const DecisionEntry&, std::size_t depth)>& fn,
                          std::size_t depth = 0) {
    for (const auto& e : entries) {
        fn(e, depth);
        visit_entries(e.children, fn, depth + 1);
    }
}

inline DecisionTable derive_decision_table(const FamilyModel& model) {
    require_valid(model);
    std::map<VariantId, std::vector<const Variant*>> children;
    std::vector<const Variant*> roots;
    for (const auto& var : model.variants) {
        if (var.depends_on.empty()) {
            roots.push_back(&var);
        } else {
            children[owner_of(var.depends_on.front())].push_back(&var);
        }
    }
    std::function<DecisionEntry(const Variant&)> build = [&](const Variant& var) {
        DecisionEntry e;
        e.variant = var.id;
        e.description = var.question;
        e.guard = var.depends_on;
        for (const auto& v : var.values) e.choices.push_back({v.id, v.name});
        e.trace = var.id;
        if (auto it = children.find(var.id); it != children.end()) {
            for (const auto* c : it->second) e.children.push_back(build(*c));
        }
        return e;
    };
    DecisionTable table;
    for (const auto* r : roots) table.entries.push_back(build(*r));
    return table;
}

namespace detail {

/// Removes entries failing `keep`; children of a removed entry take its place.
inline std::vector<DecisionEntry> filter_entries(const std::vector<DecisionEntry>& entries,
                                                 const std::function<bool(const DecisionEntry&)>& keep) {
    std::vector<DecisionEntry> out;
    for (const auto& e : entries) {
        auto kids = filter_entries(e.children, keep);
        if (keep(e)) {
            DecisionEntry copy = e;
            copy.children = std::move(kids);
            out.push_back(std::move(copy));
        } else {
            for (auto& k : kids) out.push_back(std::move(k));
        }
    }
    return out;
}

}  // namespace detail

/// Restricts a full decision table to the decisions still open after
/// customization: removed variants disappear, and so do variants whose
/// values were fixed by the requirements. Choices follow the reduced model.
inline DecisionTable reduce_decision_table(const DecisionTable& table, const FamilyModel& customized,
                                           const Requirements& reqs) {
    std::set<VariantId> in_table;
    visit_entries(table.entries, [&](const DecisionEntry& e, std::size_t) { in_table.insert(e.variant); });
    for (const auto& var : customized.variants) {
        if (!in_table.count(var.id)) {
            throw error("MISMATCHED_MODEL", var.id, "variant of the customized model is missing from the table");
        }
    }

    ModelIndex index(customized);
    std::vector<RefId> pins;
    for (const auto& p : reqs.pins) {
        if (index.value(p)) pins.push_back(p);
    }
    std::set<VariantId> resolved;
    for (const auto& id : dependency_closure(customized, pins)) {
        if (is_value_id(id)) resolved.insert(owner_of(id));
    }

    DecisionTable out;
    out.entries = detail::filter_entries(table.entries, [&](const DecisionEntry& e) {
        return index.variant(e.variant) != nullptr && !resolved.count(e.variant);
    });
    std::function<void(std::vector<DecisionEntry>&)> refresh = [&](std::vector<DecisionEntry>& entries) {
        for (auto& e : entries) {
            std::erase_if(e.choices, [&](const Choice& c) { return !index.value(c.id); });
            refresh(e.children);
        }
    };
    refresh(out.entries);
    return out;
}

/// Entries of `table` whose variant is not yet decided in `states`.
inline DecisionTable open_entries(const DecisionTable& table, const StateMap& states) {
    DecisionTable out;
    out.entries = detail::filter_entries(table.entries, [&](const DecisionEntry& e) {
        const auto* st = find_state(states, e.variant);
        return st && !st->is_decided();
    });
    return out;
}

/// Indented plain text: two spaces per subordination level, guards as "[when ...]".
inline std::string render_decision_table(const DecisionTable& table) {
    std::string out;
    visit_entries(table.entries, [&](const DecisionEntry& e, std::size_t depth) {
        out.append(depth * 2, ' ');
        out += e.trace;
        if (!e.guard.empty()) {
            out += " [when ";
            for (std::size_t i = 0; i < e.guard.size(); ++i) {
                if (i > 0) out += ", ";
                out += e.guard[i];
            }
            out += "]";
        }
        out += " " + (e.description.empty() ? std::string("(no question)") : e.description) + " {";
        for (std::size_t i = 0; i < e.choices.size(); ++i) {
            if (i > 0) out += ", ";
            out += e.choices[i].id + " " + e.choices[i].name;
        }
        out += "}\n";
    });
    return out;
}

inline std::string serialize_decision_table(const DecisionTable& table) {
    xml::Writer w;
    if (table.entries.empty()) {
        w.leaf("decisionTable");
        return std::move(w).str();
    }
    w.open("decisionTable");
    std::function<void(const DecisionEntry&)> emit = [&](const DecisionEntry& e) {
        w.open("entry", {{"variant", e.variant}, {"description", e.description}, {"trace", e.trace}});
        for (const auto& g : e.guard) w.leaf("guard", {{"ref", g}});
        for (const auto& c : e.choices) w.leaf("choice", {{"ref", c.id}, {"name", c.name}});
        for (const auto& child : e.children) emit(child);
        w.close();
    };
    for (const auto& e : table.entries) emit(e);
    w.close();
    return std::move(w).str();
}

// ---------------------------------------------------------------------------
// Feature tree

enum class FeatureKind { mandatory, optional, alternative_group, or_group, leaf };

inline std::string_view to_string(FeatureKind k) {
    switch (k) {
        case FeatureKind::mandatory: return "mandatory";
        case FeatureKind::optional: return "optional";
        case FeatureKind::alternative_group: return "alternative";
        case FeatureKind::or_group: return "or";
        case FeatureKind::leaf: return "leaf";
    }
    return "leaf";
}

struct FeatureNode {
    std::string id;  ///< family name, variant id, "<variant>.group" or value id
    std::string name;
    FeatureKind kind = FeatureKind::leaf;
    std::vector<FeatureNode> children;

    friend bool operator==(const FeatureNode&, const FeatureNode&) = default;
};

/// Root = family (mandatory); each variant is optional (or mandatory when
/// flagged) and groups its values by relation. A single value is attached
/// directly as a leaf.
inline FeatureNode export_feature_tree(const FamilyModel& model) {
    require_valid(model);
    FeatureNode root{model.name, model.name, FeatureKind::mandatory, {}};
    for (const auto& var : model.variants) {
        FeatureNode node{var.id, var.name, var.mandatory ? FeatureKind::mandatory : FeatureKind::optional, {}};
        std::vector<FeatureNode> leaves;
        for (const auto& v : var.values) leaves.push_back({v.id, v.name, FeatureKind::leaf, {}});
        if (leaves.size() == 1) {
            node.children = std::move(leaves);
        } else {
            auto kind = var.relation == Relation::alternative ? FeatureKind::alternative_group : FeatureKind::or_group;
            node.children.push_back({var.id + ".group", std::string(to_string(kind)), kind, std::move(leaves)});
        }
        root.children.push_back(std::move(node));
    }
    return root;
}

inline std::string render_feature_tree(const FeatureNode& root) {
    std::string out;
    std::function<void(const FeatureNode&, std::size_t)> emit = [&](const FeatureNode& n, std::size_t depth) {
        out.append(depth * 2, ' ');
        if (n.kind == FeatureKind::alternative_group || n.kind == FeatureKind::or_group) {
            out += "<" + std::string(to_string(n.kind)) + ">\n";
        } else {
            out += n.name + " [" + std::string(to_string(n.kind)) + "]\n";
        }
        for (const auto& c : n.children) emit(c, depth + 1);
    };
    emit(root, 0);
    return out;
}

namespace detail {

inline std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

}  // namespace detail

/// Graphviz digraph. Groups are drawn as small points between a variant and
/// its values; optional variants get a hollow arrowhead.
inline std::string feature_tree_dot(const FeatureNode& root) {
    std::string out = "digraph features {\n  node [shape=box];\n";
    std::function<void(const FeatureNode&)> emit = [&](const FeatureNode& n) {
        out += "  " + detail::dot_quote(n.id) + " [label=" + detail::dot_quote(n.name);
        if (n.kind == FeatureKind::alternative_group || n.kind == FeatureKind::or_group) {
            out += ", shape=" + std::string(n.kind == FeatureKind::alternative_group ? "triangle" : "invtriangle");
        }
        out += "];\n";
        for (const auto& c : n.children) {
            out += "  " + detail::dot_quote(n.id) + " -> " + detail::dot_quote(c.id);
            if (c.kind == FeatureKind::optional) out += " [arrowhead=odot]";
            if (c.kind == FeatureKind::mandatory) out += " [arrowhead=dot]";
            out += ";\n";
            emit(c);
        }
    };
    emit(root);
    return out + "}\n";
}

inline std::string serialize_feature_tree(const FeatureNode& root) {
    xml::Writer w;
    std::function<void(const FeatureNode&)> emit = [&](const FeatureNode& n) {
        xml::Writer::Attrs attrs{{"id", n.id}, {"name", n.name}, {"kind", to_string(n.kind)}};
        if (n.children.empty()) {
            w.leaf("feature", attrs);
            return;
        }
        w.open("feature", attrs);
        for (const auto& c : n.children) emit(c);
        w.close();
    };
    emit(root);
    return std::move(w).str();
}

}  // namespace famvar
