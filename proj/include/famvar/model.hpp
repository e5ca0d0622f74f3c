#pragma once

/// Variant-model data types and structural validation.
///
/// A family model lists variants ("V<k>") with named values ("V<k>.<j>"),
/// a value relation (alternative / or), the areas where the variant is
/// offered and requires-style dependencies on other variants or values.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "famvar/diagnostic.hpp"

namespace famvar {

using AreaId = std::string;
using VariantId = std::string;
using ValueId = std::string;
/// Either a VariantId or a ValueId.
using RefId = std::string;

inline constexpr std::string_view all_areas = "ALL";

enum class Relation { alternative, or_ };

inline std::string_view to_string(Relation r) {
    return r == Relation::alternative ? "alternative" : "or";
}

inline std::optional<Relation> parse_relation(std::string_view s) {
    if (s == "alternative") return Relation::alternative;
    if (s == "or") return Relation::or_;
    return std::nullopt;
}

struct VariantValue {
    ValueId id;
    std::string name;
    std::vector<RefId> depends_on;

    friend bool operator==(const VariantValue&, const VariantValue&) = default;
};

struct Variant {
    VariantId id;
    std::string name;
    std::string question;
    Relation relation = Relation::or_;
    bool mandatory = false;
    std::vector<AreaId> applicable_areas;
    std::vector<RefId> depends_on;
    std::vector<VariantValue> values;

    bool applicable_to(std::string_view area) const {
        return std::any_of(applicable_areas.begin(), applicable_areas.end(),
                           [&](const AreaId& a) { return a == all_areas || a == area; });
    }

    const VariantValue* find_value(std::string_view value_id) const {
        for (const auto& v : values) {
            if (v.id == value_id) return &v;
        }
        return nullptr;
    }

    friend bool operator==(const Variant&, const Variant&) = default;
};

struct FamilyModel {
    std::string name;
    std::vector<AreaId> areas;
    std::vector<Variant> variants;

    bool declares_area(std::string_view area) const {
        return std::find(areas.begin(), areas.end(), area) != areas.end();
    }

    const Variant* find_variant(std::string_view id) const {
        for (const auto& v : variants) {
            if (v.id == id) return &v;
        }
        return nullptr;
    }

    friend bool operator==(const FamilyModel&, const FamilyModel&) = default;
};

// ---------------------------------------------------------------------------
// Id syntax

namespace detail {

inline bool is_positive_integer(std::string_view s) {
    if (s.empty() || s.front() == '0') return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace detail

/// "V<k>" with k a positive integer without leading zeros.
inline bool is_variant_id(std::string_view s) {
    return s.size() >= 2 && s.front() == 'V' && detail::is_positive_integer(s.substr(1));
}

/// "V<k>.<j>".
inline bool is_value_id(std::string_view s) {
    auto dot = s.find('.');
    if (dot == std::string_view::npos) return false;
    return is_variant_id(s.substr(0, dot)) && detail::is_positive_integer(s.substr(dot + 1));
}

inline bool is_ref_id(std::string_view s) { return is_variant_id(s) || is_value_id(s); }

/// Variant part of a ref: "V3.2" -> "V3", "V3" -> "V3".
inline VariantId owner_of(std::string_view ref) {
    return std::string(ref.substr(0, ref.find('.')));
}

/// Numeric ordering key for ids, so that V10 sorts after V2.
inline std::pair<long, long> id_ordinal(std::string_view ref) {
    long k = 0, j = 0;
    auto dot = ref.find('.');
    auto head = ref.substr(1, dot == std::string_view::npos ? std::string_view::npos : dot - 1);
    std::from_chars(head.data(), head.data() + head.size(), k);
    if (dot != std::string_view::npos) {
        auto tail = ref.substr(dot + 1);
        std::from_chars(tail.data(), tail.data() + tail.size(), j);
    }
    return {k, j};
}

// ---------------------------------------------------------------------------
// Index

/// Position lookup over a model. The model must outlive the index.
class ModelIndex {
public:
    struct Location {
        std::size_t variant;
        std::optional<std::size_t> value;
    };

    explicit ModelIndex(const FamilyModel& model) : model_(&model) {
        for (std::size_t i = 0; i < model.variants.size(); ++i) {
            const auto& var = model.variants[i];
            locations_.try_emplace(var.id, Location{i, std::nullopt});
            for (std::size_t j = 0; j < var.values.size(); ++j) {
                locations_.try_emplace(var.values[j].id, Location{i, j});
            }
        }
    }

    const FamilyModel& model() const { return *model_; }

    bool contains(std::string_view id) const { return locations_.count(std::string(id)) != 0; }

    std::optional<Location> locate(std::string_view id) const {
        auto it = locations_.find(std::string(id));
        if (it == locations_.end()) return std::nullopt;
        return it->second;
    }

    const Variant* variant(std::string_view id) const {
        auto loc = locate(id);
        if (!loc || loc->value) return nullptr;
        return &model_->variants[loc->variant];
    }

    const VariantValue* value(std::string_view id) const {
        auto loc = locate(id);
        if (!loc || !loc->value) return nullptr;
        return &model_->variants[loc->variant].values[*loc->value];
    }

    /// Owning variant of any ref (the variant itself for a variant ref).
    const Variant* owner(std::string_view id) const {
        auto loc = locate(id);
        if (!loc) return nullptr;
        return &model_->variants[loc->variant];
    }

    std::optional<std::size_t> variant_position(std::string_view id) const {
        auto loc = locate(id);
        if (!loc) return std::nullopt;
        return loc->variant;
    }

private:
    const FamilyModel* model_;
    std::unordered_map<std::string, Location> locations_;
};

// ---------------------------------------------------------------------------
// Validation

namespace detail {

struct RankedDiagnostic {
    long position;
    Diagnostic diagnostic;
};

/// Tarjan's strongly-connected components over variant positions.
class SccFinder {
public:
    explicit SccFinder(const std::vector<std::vector<std::size_t>>& adjacency)
        : adj_(adjacency),
          index_(adjacency.size(), -1),
          low_(adjacency.size(), 0),
          on_stack_(adjacency.size(), false) {}

    std::vector<std::vector<std::size_t>> run() {
        for (std::size_t v = 0; v < adj_.size(); ++v) {
            if (index_[v] < 0) visit(v);
        }
        return std::move(components_);
    }

private:
    void visit(std::size_t v) {
        index_[v] = low_[v] = counter_++;
        stack_.push_back(v);
        on_stack_[v] = true;
        for (auto w : adj_[v]) {
            if (index_[w] < 0) {
                visit(w);
                low_[v] = std::min(low_[v], low_[w]);
            } else if (on_stack_[w]) {
                low_[v] = std::min(low_[v], index_[w]);
            }
        }
        if (low_[v] == index_[v]) {
            std::vector<std::size_t> component;
            std::size_t w;
            do {
                w = stack_.back();
                stack_.pop_back();
                on_stack_[w] = false;
                component.push_back(w);
            } while (w != v);
            std::sort(component.begin(), component.end());
            components_.push_back(std::move(component));
        }
    }

    const std::vector<std::vector<std::size_t>>& adj_;
    std::vector<long> index_;
    std::vector<long> low_;
    std::vector<bool> on_stack_;
    std::vector<std::size_t> stack_;
    std::vector<std::vector<std::size_t>> components_;
    long counter_ = 0;
};

}  // namespace detail

/// Structural well-formedness check. Returns one diagnostic per violation,
/// ordered by model position and then by code; an empty list means the model
/// is well-formed. A model with no variants is accepted here.
inline Diagnostics validate_model(const FamilyModel& model) {
    std::vector<detail::RankedDiagnostic> found;
    auto report = [&](long pos, std::string code, std::string subject, std::string message) {
        found.push_back({pos, Diagnostic{std::move(code), std::move(subject), std::move(message)}});
    };

    std::set<std::string> declared;
    for (const auto& area : model.areas) {
        if (area.empty() || area == all_areas) {
            report(-1, "UNKNOWN_AREA", area, "reserved or empty token in the declared area list");
        } else if (!declared.insert(area).second) {
            report(-1, "DUPLICATE_ID", area, "area declared twice");
        }
    }

    // First occurrence of every id, so duplicates are attributed to the later one.
    std::map<std::string, long> first_seen;
    for (long i = 0; i < static_cast<long>(model.variants.size()); ++i) {
        const auto& var = model.variants[i];
        if (!first_seen.try_emplace(var.id, i).second) {
            report(i, "DUPLICATE_ID", var.id, "id already used");
        }
        for (const auto& val : var.values) {
            if (!first_seen.try_emplace(val.id, i).second) {
                report(i, "DUPLICATE_ID", val.id, "id already used");
            }
        }
    }

    ModelIndex index(model);
    std::vector<std::vector<std::size_t>> adjacency(model.variants.size());

    for (long i = 0; i < static_cast<long>(model.variants.size()); ++i) {
        const auto& var = model.variants[i];
        if (!is_variant_id(var.id)) {
            report(i, "BAD_NUMBERING", var.id, "variant id must have the form V<k>");
        }
        if (var.values.empty()) {
            report(i, "EMPTY_VALUES", var.id, "variant has no values");
        }
        if (var.applicable_areas.empty()) {
            report(i, "UNKNOWN_AREA", var.id, "variant has no applicable area");
        }
        for (const auto& area : var.applicable_areas) {
            if (area != all_areas && declared.count(area) == 0) {
                report(i, "UNKNOWN_AREA", var.id, "area '" + area + "' is not declared");
            }
        }
        for (const auto& val : var.values) {
            if (!is_value_id(val.id) || owner_of(val.id) != var.id) {
                report(i, "BAD_NUMBERING", val.id, "value id must have the form " + var.id + ".<j>");
            }
        }

        auto check_targets = [&](const std::vector<RefId>& targets, const std::string& who) {
            for (const auto& target : targets) {
                auto loc = index.locate(target);
                if (!is_ref_id(target) || !loc) {
                    report(i, "DANGLING_DEPENDENCY", who, "dependency target '" + target + "' does not exist");
                    continue;
                }
                if (loc->variant == static_cast<std::size_t>(i) &&
                    model.variants[loc->variant].id == var.id) {
                    report(i, "SELF_DEPENDENCY", who, "depends on its own variant ('" + target + "')");
                    continue;
                }
                adjacency[i].push_back(loc->variant);
            }
        };
        check_targets(var.depends_on, var.id);
        for (const auto& val : var.values) check_targets(val.depends_on, val.id);
    }

    for (auto& edges : adjacency) {
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    }
    for (const auto& component : detail::SccFinder(adjacency).run()) {
        if (component.size() < 2) continue;
        std::string members;
        for (auto pos : component) {
            if (!members.empty()) members += " -> ";
            members += model.variants[pos].id;
        }
        report(static_cast<long>(component.front()), "DEPENDENCY_CYCLE",
               model.variants[component.front()].id, "dependency cycle among " + members);
    }

    std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        if (a.position != b.position) return a.position < b.position;
        return a.diagnostic.code < b.diagnostic.code;
    });
    Diagnostics out;
    out.reserve(found.size());
    for (auto& f : found) out.push_back(std::move(f.diagnostic));
    return out;
}

/// Throws INVALID_MODEL when validate_model reports anything.
inline void require_valid(const FamilyModel& model) {
    auto diags = validate_model(model);
    if (!diags.empty()) throw error("INVALID_MODEL", std::move(diags));
}

}  // namespace famvar
