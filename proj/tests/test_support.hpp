#pragma once

// Shared fixtures, random model generation and brute-force oracles for the
// test suites. Nothing here calls into the code paths it is used to check.

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "famvar/famvar.hpp"

namespace famvar::testing {

inline std::string fixture_path(const std::string& name) { return std::string(FAMVAR_FIXTURES) + "/" + name; }

inline std::string read_fixture(const std::string& name) {
    std::ifstream in(fixture_path(name), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline FamilyModel hall_booking() { return parse_family_model(read_fixture("hall_booking.xml")); }

inline Variant make_variant(std::string id, Relation rel, std::vector<std::string> value_names,
                            std::vector<AreaId> areas = {"ALL"}, std::vector<RefId> deps = {}) {
    Variant v;
    v.id = id;
    v.name = "Variant " + id;
    v.question = "Pick " + id + "?";
    v.relation = rel;
    v.applicable_areas = std::move(areas);
    v.depends_on = std::move(deps);
    for (std::size_t j = 0; j < value_names.size(); ++j) {
        v.values.push_back({id + "." + std::to_string(j + 1), value_names[j], {}});
    }
    return v;
}

// ---------------------------------------------------------------------------
// Random models

struct GeneratorLimits {
    int max_variants = 6;
    int max_values = 3;
};

inline std::string random_text(std::mt19937& rng) {
    static const std::vector<std::string> pieces = {"a", "B", "c", " ", "&", "<", ">", "\"", "'", "\xC3\xA9", "1", "\t",
                                                    "x", "Z", "-", "\n"};
    std::uniform_int_distribution<int> len(1, 8);
    std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
    std::string out;
    for (int i = 0, n = len(rng); i < n; ++i) out += pieces[pick(rng)];
    return out;
}

/// A well-formed model: dependencies only point at variants earlier in a
/// random topological order, so the reference graph is acyclic. Mandatory
/// variants never carry dependencies.
inline FamilyModel random_model(std::mt19937& rng, GeneratorLimits limits = {}) {
    std::uniform_int_distribution<int> nvars(1, limits.max_variants);
    std::uniform_int_distribution<int> nvals(1, limits.max_values);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    FamilyModel m;
    m.name = random_text(rng);
    m.areas = {"A", "B"};
    int n = nvars(rng);

    std::vector<int> topo(n);
    for (int i = 0; i < n; ++i) topo[i] = i;
    std::shuffle(topo.begin(), topo.end(), rng);
    std::vector<int> rank(n);
    for (int i = 0; i < n; ++i) rank[topo[i]] = i;

    for (int i = 0; i < n; ++i) {
        Variant v;
        v.id = "V" + std::to_string(i + 1);
        v.name = random_text(rng);
        v.question = coin(rng) < 0.8 ? random_text(rng) : "";
        v.relation = coin(rng) < 0.5 ? Relation::alternative : Relation::or_;
        double a = coin(rng);
        v.applicable_areas = a < 0.5 ? std::vector<AreaId>{"ALL"}
                             : a < 0.7 ? std::vector<AreaId>{"A"}
                             : a < 0.9 ? std::vector<AreaId>{"B"}
                                       : std::vector<AreaId>{"A", "B"};
        int k = nvals(rng);
        for (int j = 0; j < k; ++j) v.values.push_back({v.id + "." + std::to_string(j + 1), random_text(rng), {}});
        m.variants.push_back(std::move(v));
    }

    auto random_target = [&](int i) -> std::optional<RefId> {
        std::vector<int> earlier;
        for (int j = 0; j < n; ++j) {
            if (rank[j] < rank[i]) earlier.push_back(j);
        }
        if (earlier.empty()) return std::nullopt;
        const auto& t = m.variants[earlier[std::uniform_int_distribution<std::size_t>(0, earlier.size() - 1)(rng)]];
        if (coin(rng) < 0.4) return t.id;
        return t.values[std::uniform_int_distribution<std::size_t>(0, t.values.size() - 1)(rng)].id;
    };

    for (int i = 0; i < n; ++i) {
        auto& v = m.variants[i];
        double r = coin(rng);
        int deps = r < 0.5 ? 0 : r < 0.85 ? 1 : 2;
        for (int d = 0; d < deps; ++d) {
            if (auto t = random_target(i); t && std::find(v.depends_on.begin(), v.depends_on.end(), *t) == v.depends_on.end()) {
                v.depends_on.push_back(*t);
            }
        }
        for (auto& val : v.values) {
            if (coin(rng) < 0.15) {
                if (auto t = random_target(i)) val.depends_on.push_back(*t);
            }
        }
        bool free_of_deps = v.depends_on.empty() &&
                            std::all_of(v.values.begin(), v.values.end(), [](const auto& x) { return x.depends_on.empty(); });
        v.mandatory = free_of_deps && coin(rng) < 0.1;
    }
    return m;
}

// ---------------------------------------------------------------------------
// Oracles

/// Cycle presence via boolean transitive closure (Floyd-Warshall), ignoring
/// self edges and dangling targets.
inline bool has_cycle_by_closure(const FamilyModel& m) {
    std::size_t n = m.variants.size();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    auto pos = [&](const std::string& ref) -> long {
        auto owner = ref.substr(0, ref.find('.'));
        for (std::size_t i = 0; i < n; ++i) {
            if (m.variants[i].id == owner) return static_cast<long>(i);
        }
        return -1;
    };
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<RefId> all = m.variants[i].depends_on;
        for (const auto& v : m.variants[i].values) all.insert(all.end(), v.depends_on.begin(), v.depends_on.end());
        for (const auto& d : all) {
            long j = pos(d);
            if (j >= 0 && static_cast<std::size_t>(j) != i) reach[i][j] = true;
        }
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (reach[i][k] && reach[k][j]) reach[i][j] = true;
    for (std::size_t i = 0; i < n; ++i)
        if (reach[i][i]) return true;
    return false;
}

/// Every assignment from the full per-variant product (excluded plus every
/// relation-admissible value subset, via bitmasks), kept when
/// validate_configuration accepts it. Sorted for set comparison.
inline std::vector<Configuration> brute_force_products(const FamilyModel& m, const AreaId& area) {
    std::vector<std::vector<VariantChoice>> per;
    for (const auto& v : m.variants) {
        std::vector<VariantChoice> opts{{v.id, false, {}}};
        std::size_t k = v.values.size();
        for (std::size_t mask = 1; mask < (std::size_t{1} << k); ++mask) {
            VariantChoice c{v.id, true, {}};
            for (std::size_t j = 0; j < k; ++j)
                if (mask & (std::size_t{1} << j)) c.values.push_back(v.values[j].id);
            if (v.relation == Relation::alternative && c.values.size() != 1) continue;
            opts.push_back(std::move(c));
        }
        per.push_back(std::move(opts));
    }
    std::vector<Configuration> out;
    std::vector<std::size_t> idx(per.size(), 0);
    while (true) {
        Configuration c{area, {}};
        for (std::size_t i = 0; i < per.size(); ++i) c.choices.push_back(per[i][idx[i]]);
        if (validate_configuration(m, c).empty()) out.push_back(c);
        std::size_t i = 0;
        while (i < per.size() && ++idx[i] == per[i].size()) idx[i++] = 0;
        if (i == per.size()) break;
    }
    auto key = [](const Configuration& c) { return serialize_configuration(c); };
    std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    return out;
}

/// Restricts a configuration to the variants of `m` (missing ones excluded).
inline Configuration restrict_to(const Configuration& c, const FamilyModel& m) {
    Configuration out{c.area, {}};
    for (const auto& v : m.variants) {
        if (const auto* ch = c.find(v.id)) out.choices.push_back(*ch);
        else out.choices.push_back({v.id, false, {}});
    }
    return out;
}

/// Set-semantics view of a closure result.
inline std::set<RefId> as_set(const std::vector<RefId>& v) { return {v.begin(), v.end()}; }

/// States with causes removed, for order-independent comparisons.
inline StateMap without_causes(StateMap s) {
    for (auto& e : s) e.state.cause.clear();
    return s;
}

}  // namespace famvar::testing
