#pragma once

/// Customization engine: area pruning, dependency closure, requirement
/// application, configuration validation and exhaustive enumeration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "famvar/configuration.hpp"
#include "famvar/model.hpp"

namespace famvar {

// ---------------------------------------------------------------------------
// Pruning

namespace detail {

/// Drops values and variants whose dependencies point at ids that no longer
/// exist, until nothing changes. Variants left without values are dropped.
inline void remove_unsatisfiable(FamilyModel& model) {
    for (bool changed = true; changed;) {
        changed = false;
        std::unordered_set<std::string> ids;
        for (const auto& var : model.variants) {
            ids.insert(var.id);
            for (const auto& val : var.values) ids.insert(val.id);
        }
        auto satisfiable = [&](const std::vector<RefId>& deps) {
            return std::all_of(deps.begin(), deps.end(), [&](const RefId& d) { return ids.count(d) != 0; });
        };
        for (auto& var : model.variants) {
            auto before = var.values.size();
            std::erase_if(var.values, [&](const VariantValue& v) { return !satisfiable(v.depends_on); });
            changed = changed || var.values.size() != before;
        }
        auto before = model.variants.size();
        std::erase_if(model.variants,
                      [&](const Variant& v) { return v.values.empty() || !satisfiable(v.depends_on); });
        changed = changed || model.variants.size() != before;
    }
}

}  // namespace detail

/// Keeps the variants offered in `area`, then removes whatever can no
/// longer have its dependencies met.
inline FamilyModel prune_by_area(const FamilyModel& model, const AreaId& area) {
    if (!model.declares_area(area)) throw error("UNKNOWN_AREA", area, "area is not declared by the model");
    FamilyModel out = model;
    std::erase_if(out.variants, [&](const Variant& v) { return !v.applicable_to(area); });
    detail::remove_unsatisfiable(out);
    return out;
}

// ---------------------------------------------------------------------------
// Closure

/// Least superset of `seed` closed under: a value requires its variant and
/// its own dependencies; a variant requires its dependencies. Returned in
/// depth-first discovery order, without duplicates.
inline std::vector<RefId> dependency_closure(const FamilyModel& model, const std::vector<RefId>& seed) {
    ModelIndex index(model);
    for (const auto& s : seed) {
        if (!index.contains(s)) throw error("UNKNOWN_ID", s, "id does not exist in the model");
    }
    std::vector<RefId> out;
    std::unordered_set<std::string> seen;
    std::function<void(const RefId&)> visit = [&](const RefId& id) {
        if (!seen.insert(id).second) return;
        out.push_back(id);
        if (const auto* val = index.value(id)) {
            visit(owner_of(id));
            for (const auto& d : val->depends_on) visit(d);
        } else if (const auto* var = index.variant(id)) {
            for (const auto& d : var->depends_on) visit(d);
        }
    };
    for (const auto& s : seed) visit(s);
    return out;
}

// ---------------------------------------------------------------------------
// Requirements

/// Reduced model plus the states fixed by the requirements; everything not
/// pinned, forced or mandatory is left undecided.
struct Customization {
    FamilyModel model;
    StateMap states;
};

inline Customization apply_requirements(const FamilyModel& model, const Requirements& reqs) {
    require_valid(model);
    if (!model.declares_area(reqs.area)) throw error("UNKNOWN_AREA", reqs.area, "area is not declared by the model");
    ModelIndex full(model);
    for (const auto& pin : reqs.pins) {
        if (!full.value(pin)) throw error("UNKNOWN_ID", pin, "pinned value does not exist");
    }
    for (const auto& ex : reqs.excludes) {
        if (!full.variant(ex)) throw error("UNKNOWN_ID", ex, "excluded variant does not exist");
        if (full.variant(ex)->mandatory) throw error("PIN_CONFLICT", ex, "mandatory variant cannot be excluded");
    }

    FamilyModel reduced = prune_by_area(model, reqs.area);
    std::erase_if(reduced.variants, [&](const Variant& v) {
        return std::find(reqs.excludes.begin(), reqs.excludes.end(), v.id) != reqs.excludes.end();
    });
    detail::remove_unsatisfiable(reduced);

    // Which pin first demanded each id, and the demanded values per variant.
    std::map<RefId, RefId> cause;
    for (const auto& pin : reqs.pins) {
        for (const auto& id : dependency_closure(model, {pin})) cause.try_emplace(id, pin);
    }
    ModelIndex kept(reduced);
    std::map<VariantId, std::set<ValueId>> demanded;
    for (const auto& [id, pin] : cause) {
        if (!kept.contains(id)) {
            throw error("PIN_CONFLICT", id, "required by pin " + pin + " but removed for area " + reqs.area +
                                                " or by an exclusion");
        }
        if (is_value_id(id)) demanded[owner_of(id)].insert(id);
    }
    for (const auto& [variant, values] : demanded) {
        if (values.size() > 1 && kept.variant(variant)->relation == Relation::alternative) {
            auto it = values.begin();
            throw error("ALTERNATIVE_CONFLICT", variant,
                        "alternative variant demands both " + *it + " and " + *std::next(it));
        }
    }

    for (auto& var : reduced.variants) {
        auto it = demanded.find(var.id);
        if (it == demanded.end()) continue;
        std::erase_if(var.values, [&](const VariantValue& v) { return it->second.count(v.id) == 0; });
    }
    detail::remove_unsatisfiable(reduced);

    Customization out;
    for (const auto& var : reduced.variants) {
        VariantState st;
        for (const auto& val : var.values) {
            if (cause.count(val.id)) st.selected.push_back(val.id);
        }
        bool pinned = std::any_of(var.values.begin(), var.values.end(), [&](const VariantValue& v) {
            return std::find(reqs.pins.begin(), reqs.pins.end(), v.id) != reqs.pins.end();
        });
        if (pinned) {
            st.kind = StateKind::included;
        } else if (auto c = cause.find(var.id); c != cause.end()) {
            st.kind = StateKind::forced_included;
            st.cause = c->second;
        } else if (var.mandatory) {
            st.kind = StateKind::forced_included;
            st.cause = var.id;
        }
        out.states.push_back({var.id, std::move(st)});
    }
    out.model = std::move(reduced);
    return out;
}

// ---------------------------------------------------------------------------
// Validation of a complete configuration

/// Empty iff `config` is a legal product of `model` in its area. Diagnostics
/// are grouped by variant in model order, then by code.
inline Diagnostics validate_configuration(const FamilyModel& model, const Configuration& config) {
    struct Ranked {
        std::size_t position;
        Diagnostic diagnostic;
    };
    std::vector<Ranked> found;
    ModelIndex index(model);
    auto report = [&](std::size_t pos, std::string code, std::string subject, std::string message) {
        found.push_back({pos, Diagnostic{std::move(code), std::move(subject), std::move(message)}});
    };
    const std::size_t tail = model.variants.size();

    for (const auto& choice : config.choices) {
        if (!index.variant(choice.variant)) {
            report(tail, "UNKNOWN_ID", choice.variant, "variant does not exist");
            continue;
        }
        for (const auto& v : choice.values) {
            if (!index.value(v) || owner_of(v) != choice.variant) {
                report(*index.variant_position(choice.variant), "UNKNOWN_ID", v,
                       "value does not belong to " + choice.variant);
            }
        }
    }

    for (std::size_t i = 0; i < model.variants.size(); ++i) {
        const auto& var = model.variants[i];
        const auto* choice = config.find(var.id);
        if (!choice) {
            report(i, "INCOMPLETE_CONFIGURATION", var.id, "variant has no decision");
            continue;
        }
        bool applicable = var.applicable_to(config.area);
        if (!choice->included) {
            if (!choice->values.empty()) {
                report(i, "INCONSISTENT_SELECTION", var.id, "excluded variant selects values");
            }
            if (var.mandatory && applicable) {
                report(i, "MANDATORY_VIOLATION", var.id, "mandatory variant is excluded");
            }
            continue;
        }
        if (!applicable) {
            report(i, "AREA_VIOLATION", var.id, "variant is not offered in area " + config.area);
        }
        if (var.relation == Relation::alternative && choice->values.size() != 1) {
            report(i, "ALTERNATIVE_VIOLATION", var.id,
                   "alternative variant selects " + std::to_string(choice->values.size()) + " values");
        }
        if (var.relation == Relation::or_ && choice->values.empty()) {
            report(i, "OR_VIOLATION", var.id, "or variant selects no value");
        }
        for (const auto& dep : var.depends_on) {
            if (!config.selects(dep)) report(i, "DEPENDENCY_VIOLATION", var.id, "requires " + dep);
        }
        for (const auto& v : choice->values) {
            const auto* val = var.find_value(v);
            if (!val) continue;
            for (const auto& dep : val->depends_on) {
                if (!config.selects(dep)) report(i, "DEPENDENCY_VIOLATION", v, "requires " + dep);
            }
        }
    }

    std::stable_sort(found.begin(), found.end(), [](const Ranked& a, const Ranked& b) {
        if (a.position != b.position) return a.position < b.position;
        return a.diagnostic.code < b.diagnostic.code;
    });
    Diagnostics out;
    for (auto& f : found) out.push_back(std::move(f.diagnostic));
    return out;
}

// ---------------------------------------------------------------------------
// Enumeration

inline constexpr std::uint64_t default_max_space = 10'000'000;

namespace detail {

/// Nonempty subsets of {0..n-1} as ascending index lists, in lexicographic order.
inline void lexicographic_subsets(std::size_t n, std::size_t from, std::vector<std::size_t>& prefix,
                                  std::vector<std::vector<std::size_t>>& out) {
    for (std::size_t i = from; i < n; ++i) {
        prefix.push_back(i);
        out.push_back(prefix);
        lexicographic_subsets(n, i + 1, prefix, out);
        prefix.pop_back();
    }
}

/// Candidate choices for one variant: excluded first (unless required),
/// then every selection its relation admits.
inline std::vector<VariantChoice> variant_options(const Variant& var, const AreaId& area) {
    std::vector<VariantChoice> out;
    bool applicable = var.applicable_to(area);
    if (!(var.mandatory && applicable)) out.push_back({var.id, false, {}});
    if (!applicable) return out;
    if (var.relation == Relation::alternative) {
        for (const auto& v : var.values) out.push_back({var.id, true, {v.id}});
    } else {
        std::vector<std::vector<std::size_t>> subsets;
        std::vector<std::size_t> prefix;
        lexicographic_subsets(var.values.size(), 0, prefix, subsets);
        for (const auto& s : subsets) {
            VariantChoice c{var.id, true, {}};
            for (auto j : s) c.values.push_back(var.values[j].id);
            out.push_back(std::move(c));
        }
    }
    return out;
}

/// Number of admissible selections without materializing them.
inline long double option_count(const Variant& var, const AreaId& area) {
    bool applicable = var.applicable_to(area);
    long double n = (var.mandatory && applicable) ? 0 : 1;
    if (!applicable) return n;
    if (var.relation == Relation::alternative) return n + static_cast<long double>(var.values.size());
    return n + std::pow(2.0L, static_cast<long double>(var.values.size())) - 1;
}

}  // namespace detail

/// Size of the unfiltered per-variant state product for `area`.
inline long double state_space_size(const FamilyModel& model, const AreaId& area) {
    long double total = 1;
    for (const auto& var : model.variants) total *= detail::option_count(var, area);
    return total;
}

/// Calls `visit` with every valid configuration, in lexicographic order over
/// model order (excluded before included, value subsets lexicographically).
inline void for_each_product(const FamilyModel& model, const AreaId& area,
                             const std::function<void(const Configuration&)>& visit,
                             std::uint64_t max_space = default_max_space) {
    require_valid(model);
    if (!model.declares_area(area)) throw error("UNKNOWN_AREA", area, "area is not declared by the model");
    auto space = state_space_size(model, area);
    if (space > static_cast<long double>(max_space)) {
        throw error("SPACE_TOO_LARGE", model.name,
                    "state space exceeds the limit of " + std::to_string(max_space));
    }

    const std::size_t n = model.variants.size();
    ModelIndex index(model);
    std::vector<std::vector<VariantChoice>> options;
    for (const auto& var : model.variants) options.push_back(detail::variant_options(var, area));

    Configuration config;
    config.area = area;
    config.choices.resize(n);

    // A dependency of variant `i` becomes checkable once its target's owner is assigned.
    auto owner_pos = [&](const RefId& ref) { return *index.variant_position(ref); };
    auto consistent_up_to = [&](std::size_t depth) {
        auto holds = [&](const RefId& dep) {
            const auto& c = config.choices[owner_pos(dep)];
            if (!c.included) return false;
            return is_variant_id(dep) || std::find(c.values.begin(), c.values.end(), dep) != c.values.end();
        };
        for (std::size_t i = 0; i <= depth; ++i) {
            const auto& c = config.choices[i];
            if (!c.included) continue;
            const auto& var = model.variants[i];
            for (const auto& dep : var.depends_on) {
                auto p = owner_pos(dep);
                if ((i == depth ? p <= depth : p == depth) && !holds(dep)) return false;
            }
            for (const auto& v : c.values) {
                for (const auto& dep : var.find_value(v)->depends_on) {
                    auto p = owner_pos(dep);
                    if ((i == depth ? p <= depth : p == depth) && !holds(dep)) return false;
                }
            }
        }
        return true;
    };

    std::function<void(std::size_t)> descend = [&](std::size_t depth) {
        if (depth == n) {
            if (validate_configuration(model, config).empty()) visit(config);
            return;
        }
        for (const auto& option : options[depth]) {
            config.choices[depth] = option;
            if (consistent_up_to(depth)) descend(depth + 1);
        }
    };
    descend(0);
}

inline std::vector<Configuration> enumerate_products(const FamilyModel& model, const AreaId& area,
                                                     std::uint64_t max_space = default_max_space) {
    std::vector<Configuration> out;
    for_each_product(model, area, [&](const Configuration& c) { out.push_back(c); }, max_space);
    return out;
}

inline std::uint64_t count_products(const FamilyModel& model, const AreaId& area,
                                    std::uint64_t max_space = default_max_space) {
    std::uint64_t count = 0;
    for_each_product(model, area, [&](const Configuration&) { ++count; }, max_space);
    return count;
}

}  // namespace famvar
