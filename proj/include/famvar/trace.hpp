#pragma once

/// Traceability between variants and tagged model-document elements.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "famvar/configuration.hpp"
#include "famvar/document.hpp"
#include "famvar/model.hpp"

namespace famvar {

inline Diagnostics check_traces(const ModelDocument& doc, const FamilyModel& model) {
    ModelIndex index(model);
    Diagnostics out;
    for (const auto& el : doc.elements) {
        if (el.stereotype == variant_stereotype && !el.tag) {
            out.push_back({"UNTAGGED_VARIANT_ELEMENT", el.id, "element '" + el.label + "' is a variant but has no tag"});
        }
        if (el.tag && !(is_ref_id(*el.tag) && index.contains(*el.tag))) {
            out.push_back({"DANGLING_TRACE", el.id, "tag '" + *el.tag + "' has no counterpart in the variant model"});
        }
    }
    return out;
}

struct ElementRef {
    std::string document;
    ElementId element;

    friend bool operator==(const ElementRef&, const ElementRef&) = default;
};

/// Elements realizing `id`. A variant query also returns elements tagged
/// with any of its values.
inline std::vector<ElementRef> trace_forward(const FamilyModel& model, const RefId& id,
                                             const std::vector<ModelDocument>& docs) {
    ModelIndex index(model);
    if (!index.contains(id)) throw error("UNKNOWN_ID", id, "id does not exist in the model");
    bool variant_query = is_variant_id(id);
    std::vector<ElementRef> out;
    for (const auto& doc : docs) {
        for (const auto& el : doc.elements) {
            if (!el.tag) continue;
            if (*el.tag == id || (variant_query && is_value_id(*el.tag) && owner_of(*el.tag) == id)) {
                out.push_back({doc.name, el.id});
            }
        }
    }
    return out;
}

/// Tag of the first element named `element` across `docs`.
inline std::optional<RefId> trace_backward(const std::vector<ModelDocument>& docs, const ElementId& element) {
    for (const auto& doc : docs) {
        if (const auto* el = doc.find(element)) return el->tag;
    }
    throw error("UNKNOWN_ID", element, "no such element");
}

/// Drops elements whose tag names an excluded variant or an unselected
/// value. A dropped element with exactly one incoming and one outgoing edge
/// is bridged (predecessor -> successor); other dropped elements just lose
/// their edges. Untagged elements always stay.
inline ModelDocument customize_document(const ModelDocument& doc, const FamilyModel& model,
                                        const Configuration& config) {
    auto diags = check_traces(doc, model);
    std::erase_if(diags, [](const Diagnostic& d) { return d.code != "DANGLING_TRACE"; });
    if (!diags.empty()) throw error("DANGLING_TRACE", std::move(diags));
    for (const auto& var : model.variants) {
        if (!config.find(var.id)) throw error("INCOMPLETE_CONFIGURATION", var.id, "variant has no decision");
    }

    auto dropped = [&](const DocElement& el) { return el.tag && !config.selects(*el.tag); };

    ModelDocument out = doc;
    for (const auto& el : doc.elements) {
        if (!dropped(el)) continue;
        auto& edges = out.edges;
        auto is_in = [&](const DocEdge& e) { return e.to == el.id && e.from != el.id; };
        auto is_out = [&](const DocEdge& e) { return e.from == el.id && e.to != el.id; };
        auto in_count = std::count_if(edges.begin(), edges.end(), is_in);
        auto out_count = std::count_if(edges.begin(), edges.end(), is_out);
        if (in_count == 1 && out_count == 1) {
            auto in = std::find_if(edges.begin(), edges.end(), is_in);
            auto succ = std::find_if(edges.begin(), edges.end(), is_out)->to;
            DocEdge bridge{in->from, succ};
            bool exists = std::find(edges.begin(), edges.end(), bridge) != edges.end();
            if (bridge.from != bridge.to && !exists) {
                *in = bridge;
            }
        }
        std::erase_if(edges, [&](const DocEdge& e) { return e.from == el.id || e.to == el.id; });
    }
    std::erase_if(out.elements, dropped);
    return out;
}

}  // namespace famvar
