#pragma once

/// Interactive configuration sessions with dependency propagation.
///
/// A session's states are a function of its decisions: explicit includes
/// pull in their dependency closure as forced inclusions, explicit excludes
/// (and values ruled out by an alternative binding) force out every variant
/// whose dependencies can no longer hold. Decisions that would make the two
/// sets overlap are rejected as conflicts and leave the session unchanged.

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "famvar/configuration.hpp"
#include "famvar/configure.hpp"
#include "famvar/derive.hpp"
#include "famvar/model.hpp"

namespace famvar {

struct Decision {
    enum class Action { include, exclude };

    Action action = Action::include;
    RefId ref;  ///< a value for include, a variant for exclude

    static Decision include(RefId value) { return {Action::include, std::move(value)}; }
    static Decision exclude(VariantId variant) { return {Action::exclude, std::move(variant)}; }

    friend bool operator==(const Decision&, const Decision&) = default;
};

inline std::string_view to_string(Decision::Action a) {
    return a == Decision::Action::include ? "include" : "exclude";
}

struct Consequence {
    enum class Kind { forces_value, forces_variant, forces_exclusion, conflict };

    Kind kind;
    RefId subject;  ///< for conflicts: the demanded id
    RefId cause;    ///< for conflicts: the contradicting id

    friend bool operator==(const Consequence&, const Consequence&) = default;
};

inline std::string_view to_string(Consequence::Kind k) {
    switch (k) {
        case Consequence::Kind::forces_value: return "FORCES_VALUE";
        case Consequence::Kind::forces_variant: return "FORCES_VARIANT";
        case Consequence::Kind::forces_exclusion: return "FORCES_EXCLUSION";
        case Consequence::Kind::conflict: return "CONFLICT";
    }
    return "CONFLICT";
}

/// One line per consequence, e.g. "FORCES V1=V1.2 because V3.1".
inline std::string format_consequence(const Consequence& c) {
    switch (c.kind) {
        case Consequence::Kind::forces_value:
            return "FORCES " + owner_of(c.subject) + "=" + c.subject + " because " + c.cause;
        case Consequence::Kind::forces_variant: return "FORCES " + c.subject + " because " + c.cause;
        case Consequence::Kind::forces_exclusion: return "EXCLUDES " + c.subject + " because " + c.cause;
        case Consequence::Kind::conflict: return "CONFLICT " + c.subject + " contradicts " + c.cause;
    }
    return {};
}

struct Session {
    std::shared_ptr<const FamilyModel> model;  ///< already pruned to `area`
    AreaId area;
    std::vector<Decision> requirements;  ///< pins; applied first, never retracted
    std::vector<Decision> log;
    StateMap states;
};

struct DecisionOutcome {
    Session session;
    std::vector<Consequence> consequences;

    bool conflicted() const {
        return !consequences.empty() && consequences.front().kind == Consequence::Kind::conflict;
    }
};

namespace detail {

struct Evaluation {
    StateMap states;
    std::vector<RefId> required;  ///< closure of all includes, discovery order
    std::set<VariantId> excluded;
    std::optional<Consequence> conflict;
};

/// Computes states from a decision sequence. `latest`, when set, is the
/// decision whose consequences are being checked; conflicts name it.
inline Evaluation evaluate(const FamilyModel& model, const std::vector<Decision>& decisions,
                           const Decision* latest = nullptr) {
    ModelIndex index(model);
    Evaluation ev;

    std::set<VariantId> explicit_include;
    std::map<VariantId, RefId> explicit_exclude;
    std::map<RefId, RefId> required_by;  // id -> first decision demanding it
    auto require = [&](const RefId& seed, const RefId& cause) {
        for (const auto& id : dependency_closure(model, {seed})) {
            if (required_by.try_emplace(id, cause).second) ev.required.push_back(id);
        }
    };
    for (const auto& d : decisions) {
        if (d.action == Decision::Action::include) {
            explicit_include.insert(owner_of(d.ref));
            require(d.ref, d.ref);
        } else {
            explicit_exclude.try_emplace(d.ref, d.ref);
        }
    }
    for (const auto& var : model.variants) {
        if (var.mandatory) require(var.id, var.id);
    }

    auto demanded_id = [&](const RefId& fallback) { return latest ? latest->ref : fallback; };

    // Alternative variants bound to one value.
    std::map<VariantId, std::vector<ValueId>> required_values;
    for (const auto& id : ev.required) {
        if (is_value_id(id)) required_values[owner_of(id)].push_back(id);
    }
    for (const auto& var : model.variants) {
        auto it = required_values.find(var.id);
        if (var.relation != Relation::alternative || it == required_values.end() || it->second.size() < 2) continue;
        const auto& vals = it->second;
        // Name the value the latest decision brought in, against the other one.
        ValueId fresh = vals.back(), other = vals.front();
        if (latest) {
            for (const auto& v : vals) {
                if (required_by[v] == latest->ref) fresh = v;
            }
            for (const auto& v : vals) {
                if (v != fresh) {
                    other = v;
                    break;
                }
            }
        }
        ev.conflict = Consequence{Consequence::Kind::conflict, demanded_id(fresh), other};
        return ev;
    }

    // Exclusion fixpoint over variants and dead values.
    std::map<VariantId, RefId> excluded = explicit_exclude;
    std::map<ValueId, RefId> dead;
    for (const auto& var : model.variants) {
        auto it = required_values.find(var.id);
        if (var.relation != Relation::alternative || it == required_values.end()) continue;
        for (const auto& v : var.values) {
            if (v.id != it->second.front()) dead.try_emplace(v.id, required_by[it->second.front()]);
        }
    }
    auto blocked = [&](const RefId& dep) -> std::optional<RefId> {
        if (auto e = excluded.find(owner_of(dep)); e != excluded.end()) return e->second;
        if (is_value_id(dep)) {
            if (auto d = dead.find(dep); d != dead.end()) return d->second;
        }
        return std::nullopt;
    };
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& var : model.variants) {
            if (!excluded.count(var.id)) {
                for (const auto& dep : var.depends_on) {
                    if (auto why = blocked(dep)) {
                        excluded.emplace(var.id, *why);
                        changed = true;
                        break;
                    }
                }
            }
            if (excluded.count(var.id)) continue;
            for (const auto& val : var.values) {
                if (dead.count(val.id)) continue;
                for (const auto& dep : val.depends_on) {
                    if (auto why = blocked(dep)) {
                        dead.emplace(val.id, *why);
                        changed = true;
                        break;
                    }
                }
            }
        }
    }

    for (const auto& id : ev.required) {
        std::optional<RefId> against;
        if (auto e = excluded.find(owner_of(id)); e != excluded.end()) {
            against = e->second;
        } else if (auto d = dead.find(id); d != dead.end()) {
            against = d->second;
        }
        if (!against) continue;
        // Whichever side the latest decision is on, report the other side.
        RefId other = *against;
        if (latest && other == latest->ref) other = required_by[id];
        ev.conflict = Consequence{Consequence::Kind::conflict, demanded_id(id), other};
        return ev;
    }

    for (const auto& [v, cause] : excluded) ev.excluded.insert(v);
    for (const auto& var : model.variants) {
        VariantState st;
        if (required_by.count(var.id)) {
            for (const auto& v : var.values) {
                if (required_by.count(v.id)) st.selected.push_back(v.id);
            }
            if (explicit_include.count(var.id)) {
                st.kind = StateKind::included;
            } else {
                st.kind = StateKind::forced_included;
                st.cause = required_by[var.id];
            }
        } else if (auto e = excluded.find(var.id); e != excluded.end()) {
            st.kind = explicit_exclude.count(var.id) ? StateKind::excluded : StateKind::forced_excluded;
            if (st.kind == StateKind::forced_excluded) st.cause = e->second;
        }
        ev.states.push_back({var.id, std::move(st)});
    }
    return ev;
}

inline std::vector<Decision> all_decisions(const Session& s) {
    std::vector<Decision> out = s.requirements;
    out.insert(out.end(), s.log.begin(), s.log.end());
    return out;
}

inline void check_decision(const Session& s, const Decision& d) {
    ModelIndex index(*s.model);
    if (d.action == Decision::Action::include && !index.value(d.ref)) {
        throw error("UNKNOWN_ID", d.ref, "include needs a value of the session model");
    }
    if (d.action == Decision::Action::exclude && !index.variant(d.ref)) {
        throw error("UNKNOWN_ID", d.ref, "exclude needs a variant of the session model");
    }
}

/// Log after `d`: earlier free decisions on the same variant that `d`
/// contradicts are dropped, then `d` is appended.
inline std::vector<Decision> supersede(const Session& s, const Decision& d) {
    const auto* var = s.model->find_variant(owner_of(d.ref));
    std::vector<Decision> log;
    for (const auto& prior : s.log) {
        if (owner_of(prior.ref) != owner_of(d.ref)) {
            log.push_back(prior);
            continue;
        }
        bool contradicts = false;
        if (d.action == Decision::Action::exclude) {
            contradicts = true;
        } else if (prior.action == Decision::Action::exclude) {
            contradicts = true;
        } else if (var->relation == Relation::alternative && prior.ref != d.ref) {
            contradicts = true;
        }
        if (!contradicts) log.push_back(prior);
    }
    log.push_back(d);
    return log;
}

struct Trial {
    std::vector<Decision> log;
    Evaluation before;
    Evaluation after;
};

inline std::vector<Consequence> consequences_of(const Session& s, const Decision& d, const Trial& t) {
    if (t.after.conflict) return {*t.after.conflict};
    std::vector<Consequence> out;
    std::set<RefId> had(t.before.required.begin(), t.before.required.end());
    if (d.action == Decision::Action::include) {
        for (const auto& id : dependency_closure(*s.model, {d.ref})) {
            if (id == d.ref || had.count(id)) continue;
            out.push_back({is_value_id(id) ? Consequence::Kind::forces_value : Consequence::Kind::forces_variant, id,
                           d.ref});
        }
    }
    for (const auto& var : s.model->variants) {
        if (var.id == d.ref || !t.after.excluded.count(var.id) || t.before.excluded.count(var.id)) continue;
        out.push_back({Consequence::Kind::forces_exclusion, var.id, d.ref});
    }
    return out;
}

inline Trial try_decision(const Session& s, const Decision& d) {
    check_decision(s, d);
    Trial t;
    t.log = supersede(s, d);
    std::vector<Decision> all = s.requirements;
    t.before = evaluate(*s.model, all_decisions(s));
    all.insert(all.end(), t.log.begin(), t.log.end());
    t.after = evaluate(*s.model, all, &d);
    return t;
}

}  // namespace detail

/// Starts a session on `model` pruned to `area`. Pins become permanent
/// include decisions; they must not conflict.
inline Session new_session(const FamilyModel& model, const AreaId& area, const std::vector<ValueId>& pins = {}) {
    require_valid(model);
    Session s;
    s.model = std::make_shared<const FamilyModel>(prune_by_area(model, area));
    s.area = area;
    ModelIndex index(*s.model);
    for (const auto& p : pins) {
        if (!index.value(p)) throw error("UNKNOWN_ID", p, "pinned value is not part of the session model");
        s.requirements.push_back(Decision::include(p));
    }
    auto ev = detail::evaluate(*s.model, s.requirements);
    if (ev.conflict) throw error("PIN_CONFLICT", ev.conflict->subject, "pins contradict " + ev.conflict->cause);
    s.states = std::move(ev.states);
    return s;
}

/// Consequences `d` would have, without changing the session.
inline std::vector<Consequence> preview_decision(const Session& s, const Decision& d) {
    for (const auto& prior : s.log) {
        if (prior == d) return {};
    }
    auto t = detail::try_decision(s, d);
    return detail::consequences_of(s, d, t);
}

/// Applies `d`. On conflict the returned session equals `s` and the only
/// consequence is the CONFLICT.
inline DecisionOutcome apply_decision(const Session& s, const Decision& d) {
    for (const auto& prior : s.log) {
        if (prior == d) return {s, {}};
    }
    auto t = detail::try_decision(s, d);
    auto consequences = detail::consequences_of(s, d, t);
    if (t.after.conflict) return {s, std::move(consequences)};
    Session next = s;
    next.log = std::move(t.log);
    next.states = std::move(t.after.states);
    return {std::move(next), std::move(consequences)};
}

/// Removes the logged decision on `ref` and replays the rest.
inline Session retract_decision(const Session& s, const RefId& ref) {
    Session next = s;
    auto it = std::find_if(next.log.begin(), next.log.end(), [&](const Decision& d) { return d.ref == ref; });
    if (it == next.log.end()) throw error("UNKNOWN_ID", ref, "no such decision in the session log");
    next.log.erase(it);
    next.states = detail::evaluate(*next.model, detail::all_decisions(next)).states;
    return next;
}

/// Replays a full decision list from scratch. Stops at the first conflict.
inline DecisionOutcome replay(Session s, const std::vector<Decision>& decisions) {
    std::vector<Consequence> all;
    for (const auto& d : decisions) {
        auto out = apply_decision(s, d);
        all.insert(all.end(), out.consequences.begin(), out.consequences.end());
        if (out.conflicted()) return {std::move(s), {out.consequences.front()}};
        s = std::move(out.session);
    }
    return {std::move(s), std::move(all)};
}

inline bool is_complete(const Session& s) {
    return std::all_of(s.states.begin(), s.states.end(), [](const StateEntry& e) { return e.state.is_decided(); });
}

/// Open decision-table entries for the session, in table order.
inline DecisionTable open_decisions(const Session& s) {
    return open_entries(derive_decision_table(*s.model), s.states);
}

/// Final configuration over `full` (variants outside the session model are
/// reported excluded). Throws INCOMPLETE_CONFIGURATION while decisions remain.
inline Configuration to_configuration(const Session& s, const FamilyModel& full) {
    Configuration config;
    config.area = s.area;
    for (const auto& var : full.variants) {
        const auto* st = find_state(s.states, var.id);
        if (!st) {
            config.choices.push_back({var.id, false, {}});
            continue;
        }
        if (!st->is_decided()) throw error("INCOMPLETE_CONFIGURATION", var.id, "variant is still undecided");
        config.choices.push_back({var.id, st->is_included(), st->is_included() ? st->selected : std::vector<ValueId>{}});
    }
    return config;
}

inline Configuration to_configuration(const Session& s) { return to_configuration(s, *s.model); }

/// The model reduced to one product: included variants with their selected values.
inline FamilyModel product_model(const FamilyModel& model, const Configuration& config) {
    FamilyModel out = model;
    std::erase_if(out.variants, [&](const Variant& v) {
        const auto* c = config.find(v.id);
        return !c || !c->included;
    });
    for (auto& var : out.variants) {
        const auto* c = config.find(var.id);
        std::erase_if(var.values, [&](const VariantValue& v) {
            return std::find(c->values.begin(), c->values.end(), v.id) == c->values.end();
        });
    }
    return out;
}

}  // namespace famvar
