#pragma once

/// XML interchange for variant models, requirements, configurations and
/// model documents, plus the plain-text variant table.

#include <algorithm>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "famvar/configuration.hpp"
#include "famvar/document.hpp"
#include "famvar/model.hpp"
#include "famvar/xml.hpp"

namespace famvar {

// ---------------------------------------------------------------------------
// Variant model

namespace detail {

inline bool parse_bool(xml::Reader& r, std::string_view key, bool fallback) {
    auto v = r.optional(key);
    if (!v) return fallback;
    if (*v == "true") return true;
    if (*v == "false") return false;
    throw error("SCHEMA", r.location(), "attribute '" + std::string(key) + "' must be true or false");
}

inline RefId read_dependency(const xml::Element& el) {
    xml::Reader r(el);
    auto ref = r.required("ref");
    r.finish();
    for (const auto& child : el.children) r.unknown_child(child);
    return ref;
}

inline VariantValue read_value(const xml::Element& el) {
    xml::Reader r(el);
    VariantValue value;
    value.id = r.required("id");
    value.name = r.required("name");
    r.finish();
    for (const auto& child : el.children) {
        if (child.name == "dependsOn") {
            value.depends_on.push_back(read_dependency(child));
        } else {
            r.unknown_child(child);
        }
    }
    return value;
}

inline Variant read_variant(const xml::Element& el) {
    xml::Reader r(el);
    Variant var;
    var.id = r.required("id");
    var.name = r.required("name");
    auto relation = r.required("relation");
    if (auto rel = parse_relation(relation)) {
        var.relation = *rel;
    } else {
        throw error("SCHEMA", r.location(), "relation must be 'alternative' or 'or'");
    }
    var.mandatory = parse_bool(r, "mandatory", false);
    var.question = r.optional("question").value_or("");
    r.finish();

    for (const auto& child : el.children) {
        if (child.name == "applicableTo") {
            xml::Reader cr(child);
            var.applicable_areas.push_back(cr.required("area"));
            cr.finish();
            for (const auto& c : child.children) cr.unknown_child(c);
        } else if (child.name == "dependsOn") {
            var.depends_on.push_back(read_dependency(child));
        } else if (child.name == "value") {
            var.values.push_back(read_value(child));
        } else {
            r.unknown_child(child);
        }
    }
    if (var.applicable_areas.empty()) {
        throw error("SCHEMA", r.location(), "variant needs at least one <applicableTo>");
    }
    if (var.values.empty()) {
        throw error("SCHEMA", r.location(), "variant needs at least one <value>");
    }
    return var;
}

}  // namespace detail

/// Parses and validates a variant-model document. Structural problems raise
/// SYNTAX or SCHEMA; validation findings raise SCHEMA carrying the
/// validate_model diagnostics.
inline FamilyModel parse_family_model(std::string_view text) {
    auto root = xml::parse(text);
    xml::expect_root(root, "family");
    xml::Reader r(root);
    FamilyModel model;
    model.name = r.required("name");
    r.finish();

    bool seen_areas = false;
    for (const auto& child : root.children) {
        if (child.name == "areas") {
            xml::Reader ar(child);
            ar.finish();
            if (seen_areas) throw error("SCHEMA", ar.location(), "duplicate <areas>");
            seen_areas = true;
            for (const auto& area : child.children) {
                if (area.name != "area") ar.unknown_child(area);
                xml::Reader a(area);
                model.areas.push_back(a.required("id"));
                a.finish();
                for (const auto& c : area.children) a.unknown_child(c);
            }
        } else if (child.name == "variant") {
            model.variants.push_back(detail::read_variant(child));
        } else {
            r.unknown_child(child);
        }
    }
    if (model.variants.empty()) {
        throw error("SCHEMA", r.location(), "family needs at least one <variant>");
    }
    auto diags = validate_model(model);
    if (!diags.empty()) throw error("SCHEMA", std::move(diags));
    return model;
}

/// Canonical XML for a valid, non-empty model.
inline std::string serialize_family_model(const FamilyModel& model) {
    require_valid(model);
    if (model.variants.empty()) {
        throw error("INVALID_MODEL", model.name, "a family needs at least one variant");
    }
    xml::Writer w;
    w.open("family", {{"name", model.name}});
    if (model.areas.empty()) {
        w.leaf("areas");
    } else {
        w.open("areas");
        for (const auto& area : model.areas) w.leaf("area", {{"id", area}});
        w.close();
    }
    for (const auto& var : model.variants) {
        w.open("variant", {{"id", var.id},
                           {"name", var.name},
                           {"relation", to_string(var.relation)},
                           {"mandatory", var.mandatory ? "true" : "false"},
                           {"question", var.question}});
        for (const auto& area : var.applicable_areas) w.leaf("applicableTo", {{"area", area}});
        for (const auto& dep : var.depends_on) w.leaf("dependsOn", {{"ref", dep}});
        for (const auto& val : var.values) {
            if (val.depends_on.empty()) {
                w.leaf("value", {{"id", val.id}, {"name", val.name}});
            } else {
                w.open("value", {{"id", val.id}, {"name", val.name}});
                for (const auto& dep : val.depends_on) w.leaf("dependsOn", {{"ref", dep}});
                w.close();
            }
        }
        w.close();
    }
    w.close();
    return std::move(w).str();
}

// ---------------------------------------------------------------------------
// Requirements

namespace detail {

inline void check_requirements_against(const Requirements& reqs, const FamilyModel& model) {
    if (!model.declares_area(reqs.area)) {
        throw error("UNKNOWN_ID", reqs.area, "area is not declared by the model");
    }
    ModelIndex index(model);
    for (const auto& pin : reqs.pins) {
        if (!index.value(pin)) throw error("UNKNOWN_ID", pin, "pinned value does not exist");
    }
    for (const auto& ex : reqs.excludes) {
        if (!index.variant(ex)) throw error("UNKNOWN_ID", ex, "excluded variant does not exist");
    }
}

}  // namespace detail

/// Parses a requirements document. When `model` is given, ids and the area
/// are also resolved against it (UNKNOWN_ID).
inline Requirements parse_requirements(std::string_view text, const FamilyModel* model = nullptr) {
    auto root = xml::parse(text);
    xml::expect_root(root, "requirements");
    xml::Reader r(root);
    Requirements reqs;
    reqs.area = r.required("area");
    r.finish();
    if (reqs.area.empty()) throw error("SCHEMA", r.location(), "area must not be empty");

    std::set<std::string> seen;
    for (const auto& child : root.children) {
        xml::Reader cr(child);
        if (child.name != "pin" && child.name != "exclude") r.unknown_child(child);
        auto ref = cr.required("ref");
        cr.finish();
        for (const auto& c : child.children) cr.unknown_child(c);
        if (!seen.insert(ref).second) throw error("SCHEMA", cr.location(), "duplicate reference '" + ref + "'");
        if (child.name == "pin") {
            if (!is_value_id(ref)) throw error("SCHEMA", cr.location(), "pin must reference a value id");
            reqs.pins.push_back(ref);
        } else {
            if (!is_variant_id(ref)) throw error("SCHEMA", cr.location(), "exclude must reference a variant id");
            reqs.excludes.push_back(ref);
        }
    }
    for (const auto& pin : reqs.pins) {
        if (std::find(reqs.excludes.begin(), reqs.excludes.end(), owner_of(pin)) != reqs.excludes.end()) {
            throw error("SCHEMA", pin, "pinned value belongs to excluded variant " + owner_of(pin));
        }
    }
    if (model) detail::check_requirements_against(reqs, *model);
    return reqs;
}

inline std::string serialize_requirements(const Requirements& reqs) {
    xml::Writer w;
    if (reqs.pins.empty() && reqs.excludes.empty()) {
        w.leaf("requirements", {{"area", reqs.area}});
        return std::move(w).str();
    }
    w.open("requirements", {{"area", reqs.area}});
    for (const auto& pin : reqs.pins) w.leaf("pin", {{"ref", pin}});
    for (const auto& ex : reqs.excludes) w.leaf("exclude", {{"ref", ex}});
    w.close();
    return std::move(w).str();
}

// ---------------------------------------------------------------------------
// Configuration

inline Configuration parse_configuration(std::string_view text, const FamilyModel* model = nullptr) {
    auto root = xml::parse(text);
    xml::expect_root(root, "configuration");
    xml::Reader r(root);
    Configuration config;
    config.area = r.required("area");
    r.finish();

    std::set<std::string> seen;
    for (const auto& child : root.children) {
        if (child.name != "variant") r.unknown_child(child);
        xml::Reader vr(child);
        VariantChoice choice;
        choice.variant = vr.required("ref");
        auto state = vr.required("state");
        vr.finish();
        if (!is_variant_id(choice.variant)) throw error("SCHEMA", vr.location(), "ref must be a variant id");
        if (state == "included") {
            choice.included = true;
        } else if (state != "excluded") {
            throw error("SCHEMA", vr.location(), "state must be 'included' or 'excluded'");
        }
        if (!seen.insert(choice.variant).second) {
            throw error("SCHEMA", vr.location(), "variant listed twice");
        }
        for (const auto& v : child.children) {
            if (v.name != "value") vr.unknown_child(v);
            xml::Reader val(v);
            auto ref = val.required("ref");
            val.finish();
            for (const auto& c : v.children) val.unknown_child(c);
            if (!is_value_id(ref) || owner_of(ref) != choice.variant) {
                throw error("SCHEMA", val.location(), "value '" + ref + "' does not belong to " + choice.variant);
            }
            if (!choice.included) throw error("SCHEMA", val.location(), "excluded variant cannot select values");
            if (std::find(choice.values.begin(), choice.values.end(), ref) != choice.values.end()) {
                throw error("SCHEMA", val.location(), "value selected twice");
            }
            choice.values.push_back(ref);
        }
        config.choices.push_back(std::move(choice));
    }

    if (model) {
        if (!model->declares_area(config.area)) throw error("UNKNOWN_ID", config.area, "area is not declared");
        ModelIndex index(*model);
        for (const auto& c : config.choices) {
            if (!index.variant(c.variant)) throw error("UNKNOWN_ID", c.variant, "variant does not exist");
            for (const auto& v : c.values) {
                if (!index.value(v)) throw error("UNKNOWN_ID", v, "value does not exist");
            }
        }
    }
    return config;
}

inline std::string serialize_configuration(const Configuration& config) {
    xml::Writer w;
    if (config.choices.empty()) {
        w.leaf("configuration", {{"area", config.area}});
        return std::move(w).str();
    }
    w.open("configuration", {{"area", config.area}});
    for (const auto& c : config.choices) {
        std::string_view state = c.included ? "included" : "excluded";
        if (c.values.empty()) {
            w.leaf("variant", {{"ref", c.variant}, {"state", state}});
        } else {
            w.open("variant", {{"ref", c.variant}, {"state", state}});
            for (const auto& v : c.values) w.leaf("value", {{"ref", v}});
            w.close();
        }
    }
    w.close();
    return std::move(w).str();
}

// ---------------------------------------------------------------------------
// Model documents

/// Tags written as "V.<k>" are read as "V<k>".
inline std::string canonical_tag(std::string tag) {
    if (tag.size() > 2 && tag[0] == 'V' && tag[1] == '.') tag.erase(1, 1);
    return tag;
}

inline ModelDocument parse_model_document(std::string_view text) {
    auto root = xml::parse(text);
    xml::expect_root(root, "modelDoc");
    xml::Reader r(root);
    ModelDocument doc;
    doc.name = r.required("name");
    doc.kind = r.required("kind");
    r.finish();

    std::set<std::string> ids;
    for (const auto& child : root.children) {
        xml::Reader cr(child);
        if (child.name == "element") {
            DocElement el;
            el.id = cr.required("id");
            el.kind = cr.required("kind");
            el.label = cr.required("label");
            el.stereotype = cr.optional("stereotype");
            if (auto tag = cr.optional("tag")) el.tag = canonical_tag(*tag);
            cr.finish();
            if (!ids.insert(el.id).second) throw error("SCHEMA", cr.location(), "duplicate element id '" + el.id + "'");
            doc.elements.push_back(std::move(el));
        } else if (child.name == "edge") {
            DocEdge edge{cr.required("from"), cr.required("to")};
            cr.finish();
            doc.edges.push_back(std::move(edge));
        } else {
            r.unknown_child(child);
        }
        for (const auto& c : child.children) cr.unknown_child(c);
    }
    for (const auto& e : doc.edges) {
        if (!ids.count(e.from) || !ids.count(e.to)) {
            throw error("SCHEMA", e.from + "->" + e.to, "edge references an unknown element");
        }
    }
    return doc;
}

inline std::string serialize_model_document(const ModelDocument& doc) {
    xml::Writer w;
    if (doc.elements.empty() && doc.edges.empty()) {
        w.leaf("modelDoc", {{"name", doc.name}, {"kind", doc.kind}});
        return std::move(w).str();
    }
    w.open("modelDoc", {{"name", doc.name}, {"kind", doc.kind}});
    for (const auto& el : doc.elements) {
        xml::Writer::Attrs attrs{{"id", el.id}, {"kind", el.kind}, {"label", el.label}};
        if (el.stereotype) attrs.emplace_back("stereotype", *el.stereotype);
        if (el.tag) attrs.emplace_back("tag", *el.tag);
        w.leaf("element", attrs);
    }
    for (const auto& e : doc.edges) w.leaf("edge", {{"from", e.from}, {"to", e.to}});
    w.close();
    return std::move(w).str();
}

// ---------------------------------------------------------------------------
// Tabular rendering

namespace detail {

/// Display width in code points (UTF-8 continuation bytes do not count).
inline std::size_t display_width(std::string_view s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

template <typename Range>
std::string join(const Range& items, std::string_view sep) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += sep;
        out += item;
    }
    return out;
}

}  // namespace detail

/// Fixed-column text table, one row per variant in model order.
inline std::string render_table(const FamilyModel& model) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"Variant", "Values", "Relation", "Applicable Area", "Dependency"});
    for (const auto& var : model.variants) {
        std::vector<std::string> values;
        for (const auto& v : var.values) values.push_back(v.id + " " + v.name);
        bool everywhere = std::find(var.applicable_areas.begin(), var.applicable_areas.end(), all_areas) !=
                          var.applicable_areas.end();
        rows.push_back({var.id + ". " + var.name,
                        detail::join(values, "; "),
                        var.relation == Relation::alternative ? "Alternative" : "OR",
                        everywhere ? "All" : detail::join(var.applicable_areas, ", "),
                        var.depends_on.empty() ? "None" : detail::join(var.depends_on, ", ")});
    }

    std::vector<std::size_t> widths(5, 0);
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], detail::display_width(row[c]));
    }

    auto emit = [&](const std::vector<std::string>& row) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) line += " | ";
            line += row[c];
            if (c + 1 < row.size()) line.append(widths[c] - detail::display_width(row[c]), ' ');
        }
        return line + "\n";
    };

    std::string out = emit(rows.front());
    for (std::size_t c = 0; c < widths.size(); ++c) {
        if (c > 0) out += "-+-";
        out.append(widths[c], '-');
    }
    out += "\n";
    for (std::size_t i = 1; i < rows.size(); ++i) out += emit(rows[i]);
    return out;
}

}  // namespace famvar
