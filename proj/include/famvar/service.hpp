#pragma once

/// Session-oriented JSON API over the engines. `Service::handle` is
/// transport independent; famvar/http.hpp mounts it on an HTTP server.
///
///   POST   /models                         variant-model XML -> {modelId, diagnostics}
///   POST   /models/{id}/documents          model-document XML -> {document, diagnostics}
///   GET    /models/{id}/features | /table  derived views
///   POST   /sessions                       {modelId, area, pins?, excludes?}
///   GET    /sessions/{id}                  handle: id, creation time, model digest, area
///   GET    /sessions/{id}/decisions        open decision forest
///   POST   /sessions/{id}/decisions        {action, ref}
///   POST   /sessions/{id}/preview          {action, ref}, never mutates
///   DELETE /sessions/{id}/decisions/{ref}  retract and replay
///   POST   /sessions/{id}/finalize
///   GET    /sessions/{id}/log              replayable snapshot

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "famvar/configure.hpp"
#include "famvar/derive.hpp"
#include "famvar/io.hpp"
#include "famvar/session.hpp"
#include "famvar/trace.hpp"

namespace famvar {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// JSON views of domain types

inline json to_json(const Diagnostic& d) { return {{"code", d.code}, {"subject", d.subject}, {"message", d.message}}; }

inline json to_json(const Diagnostics& ds) {
    json out = json::array();
    for (const auto& d : ds) out.push_back(to_json(d));
    return out;
}

inline json to_json(const DecisionEntry& e) {
    json choices = json::array();
    for (const auto& c : e.choices) choices.push_back({{"id", c.id}, {"name", c.name}});
    json children = json::array();
    for (const auto& c : e.children) children.push_back(to_json(c));
    return {{"variant", e.variant}, {"description", e.description}, {"guard", e.guard},
            {"choices", choices},   {"trace", e.trace},             {"children", children}};
}

inline json to_json(const DecisionTable& t) {
    json out = json::array();
    for (const auto& e : t.entries) out.push_back(to_json(e));
    return out;
}

inline json to_json(const FeatureNode& n) {
    json children = json::array();
    for (const auto& c : n.children) children.push_back(to_json(c));
    return {{"id", n.id}, {"name", n.name}, {"kind", to_string(n.kind)}, {"children", children}};
}

inline json to_json(const StateMap& states) {
    json out = json::array();
    for (const auto& e : states) {
        out.push_back({{"variant", e.variant},
                       {"state", to_string(e.state.kind)},
                       {"selected", e.state.selected},
                       {"cause", e.state.cause}});
    }
    return out;
}

inline json to_json(const std::vector<Consequence>& cs) {
    json out = json::array();
    for (const auto& c : cs) {
        out.push_back({{"kind", to_string(c.kind)}, {"subject", c.subject}, {"cause", c.cause},
                       {"text", format_consequence(c)}});
    }
    return out;
}

/// 64-bit FNV-1a, hex encoded.
inline std::string digest(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------

class Service {
public:
    struct Response {
        int status = 200;
        json body = json::object();
    };

    Response handle(std::string_view method, std::string_view path, std::string_view body) {
        try {
            return route(method, split(path), body);
        } catch (const error& e) {
            int status = e.code() == "SYNTAX" || e.code() == "BAD_REQUEST" ? 400 : 422;
            return {status, {{"diagnostics", to_json(e.diagnostics())}}};
        } catch (const json::exception& e) {
            return {400, {{"diagnostics", json::array({to_json(Diagnostic{"BAD_REQUEST", "", e.what()})})}}};
        }
    }

    /// Replayable description of a session (model, requirements, log).
    json snapshot(const std::string& session_id) {
        auto entry = find_session(session_id);
        if (!entry) throw error("NOT_FOUND", session_id, "unknown session");
        std::lock_guard lock(entry->mutex);
        return snapshot_of(*entry);
    }

    /// Recreates a session from a snapshot by replaying its log.
    std::string restore(const json& snap) {
        auto created = create_session(snap);
        if (created.status != 200) throw error("BAD_REQUEST", "", created.body.dump());
        std::string id = created.body.at("sessionId");
        auto entry = find_session(id);
        std::lock_guard lock(entry->mutex);
        std::vector<Decision> log;
        for (const auto& d : snap.at("log")) log.push_back(parse_decision(d));
        auto out = replay(entry->session, log);
        if (out.conflicted()) throw error("CONFLICT", out.consequences.front().subject, "log does not replay");
        entry->session = std::move(out.session);
        return id;
    }

private:
    struct ModelEntry {
        std::shared_ptr<const FamilyModel> model;
        std::mutex docs_mutex;
        std::vector<ModelDocument> documents;
    };

    struct SessionEntry {
        std::mutex mutex;
        std::string model_id;
        std::string model_digest;
        std::string created_at;
        Requirements requirements;
        Session session;
    };

    static std::vector<std::string> split(std::string_view path) {
        std::vector<std::string> out;
        std::size_t i = 0;
        while (i < path.size()) {
            while (i < path.size() && path[i] == '/') ++i;
            auto j = path.find('/', i);
            if (j == std::string_view::npos) j = path.size();
            if (j > i) out.emplace_back(path.substr(i, j - i));
            i = j;
        }
        return out;
    }

    static Response not_found(const std::string& what) {
        return {404, {{"diagnostics", json::array({to_json(Diagnostic{"NOT_FOUND", what, "unknown resource"})})}}};
    }

    Response route(std::string_view method, const std::vector<std::string>& seg, std::string_view body) {
        if (seg.empty()) return not_found("/");
        if (seg[0] == "models") {
            if (seg.size() == 1 && method == "POST") return create_model(body);
            if (seg.size() == 3 && seg[2] == "documents" && method == "POST") return add_document(seg[1], body);
            if (seg.size() == 3 && method == "GET" && (seg[2] == "features" || seg[2] == "table")) {
                auto entry = find_model(seg[1]);
                if (!entry) return not_found(seg[1]);
                if (seg[2] == "features") return {200, to_json(export_feature_tree(*entry->model))};
                return {200, {{"entries", to_json(derive_decision_table(*entry->model))}}};
            }
        } else if (seg[0] == "sessions") {
            if (seg.size() == 1 && method == "POST") return create_session(json::parse(body));
            if (seg.size() < 2) return not_found("sessions");
            auto entry = find_session(seg[1]);
            if (!entry) return not_found(seg[1]);
            std::lock_guard lock(entry->mutex);
            if (seg.size() == 2 && method == "GET") {
                return {200, {{"sessionId", seg[1]},
                              {"createdAt", entry->created_at},
                              {"modelDigest", entry->model_digest},
                              {"area", entry->requirements.area}}};
            }
            if (seg.size() < 3) return not_found(seg[1]);
            const auto& verb = seg[2];
            if (verb == "decisions" && seg.size() == 3 && method == "GET") {
                return {200, {{"openDecisions", to_json(open_decisions(entry->session))}}};
            }
            if (verb == "decisions" && seg.size() == 3 && method == "POST") {
                auto d = parse_decision(json::parse(body));
                auto out = apply_decision(entry->session, d);
                if (out.conflicted()) return {409, {{"consequences", to_json(out.consequences)}}};
                entry->session = std::move(out.session);
                return {200, session_view(*entry, to_json(out.consequences))};
            }
            if (verb == "decisions" && seg.size() == 4 && method == "DELETE") {
                bool logged = std::any_of(entry->session.log.begin(), entry->session.log.end(),
                                          [&](const Decision& d) { return d.ref == seg[3]; });
                if (!logged) return not_found(seg[3]);
                entry->session = retract_decision(entry->session, seg[3]);
                return {200, session_view(*entry, std::nullopt)};
            }
            if (verb == "preview" && seg.size() == 3 && method == "POST") {
                auto d = parse_decision(json::parse(body));
                return {200, {{"consequences", to_json(preview_decision(entry->session, d))}}};
            }
            if (verb == "finalize" && seg.size() == 3 && method == "POST") return finalize(*entry);
            if (verb == "log" && seg.size() == 3 && method == "GET") return {200, snapshot_of(*entry)};
        }
        return not_found(std::string(method) + " /" + (seg.empty() ? "" : seg[0]));
    }

    Response create_model(std::string_view body) {
        FamilyModel model = parse_family_model(body);
        auto canonical = serialize_family_model(model);
        std::string id = "m" + digest(canonical);
        std::unique_lock lock(registry_mutex_);
        if (!models_.count(id)) {
            auto entry = std::make_shared<ModelEntry>();
            entry->model = std::make_shared<const FamilyModel>(std::move(model));
            models_.emplace(id, std::move(entry));
        }
        return {200, {{"modelId", id}, {"diagnostics", json::array()}}};
    }

    Response add_document(const std::string& model_id, std::string_view body) {
        auto entry = find_model(model_id);
        if (!entry) return not_found(model_id);
        auto doc = parse_model_document(body);
        auto diags = check_traces(doc, *entry->model);
        if (!diags.empty()) return {422, {{"document", doc.name}, {"diagnostics", to_json(diags)}}};
        std::lock_guard lock(entry->docs_mutex);
        std::erase_if(entry->documents, [&](const ModelDocument& d) { return d.name == doc.name; });
        entry->documents.push_back(doc);
        return {200, {{"document", doc.name}, {"diagnostics", json::array()}}};
    }

    Response create_session(const json& req) {
        if (!req.is_object() || !req.contains("modelId") || !req.contains("area")) {
            throw error("BAD_REQUEST", "", "modelId and area are required");
        }
        std::string model_id = req.at("modelId");
        auto model_entry = find_model(model_id);
        if (!model_entry) return not_found(model_id);

        Requirements reqs;
        reqs.area = req.at("area");
        if (req.contains("pins")) reqs.pins = req.at("pins").get<std::vector<std::string>>();
        if (req.contains("excludes")) reqs.excludes = req.at("excludes").get<std::vector<std::string>>();
        auto custom = apply_requirements(*model_entry->model, reqs);

        auto entry = std::make_shared<SessionEntry>();
        entry->model_id = model_id;
        entry->model_digest = model_id.substr(1);
        entry->created_at = utc_now();
        entry->session = new_session(custom.model, reqs.area, reqs.pins);
        entry->requirements = std::move(reqs);

        std::string id = fresh_id();
        {
            std::unique_lock lock(registry_mutex_);
            sessions_.emplace(id, entry);
        }
        std::lock_guard lock(entry->mutex);
        json view = session_view(*entry, std::nullopt);
        json body = {{"sessionId", id}};
        body["reducedModel"] = entry->session.model->variants.empty()
                                   ? json(nullptr)
                                   : json(serialize_family_model(*entry->session.model));
        body.update(view);
        return {200, body};
    }

    Response finalize(SessionEntry& entry) {
        if (!is_complete(entry.session)) {
            return {409, {{"openDecisions", to_json(open_decisions(entry.session))}}};
        }
        auto model_entry = find_model(entry.model_id);
        const auto& full = *model_entry->model;
        auto config = to_configuration(entry.session, full);
        auto product = product_model(full, config);
        json docs = json::array();
        {
            std::lock_guard lock(model_entry->docs_mutex);
            for (const auto& doc : model_entry->documents) {
                docs.push_back(serialize_model_document(customize_document(doc, full, config)));
            }
        }
        json body = {{"configuration", serialize_configuration(config)}, {"documents", docs}};
        body["customizedModel"] = product.variants.empty() ? json(nullptr) : json(serialize_family_model(product));
        return {200, body};
    }

    static json session_view(const SessionEntry& entry, std::optional<json> consequences) {
        json out;
        if (consequences) out["consequences"] = *consequences;
        out["openDecisions"] = to_json(open_decisions(entry.session));
        out["configuration"] = to_json(entry.session.states);
        return out;
    }

    static json snapshot_of(const SessionEntry& entry) {
        json log = json::array();
        for (const auto& d : entry.session.log) log.push_back({{"action", to_string(d.action)}, {"ref", d.ref}});
        return {{"modelId", entry.model_id},
                {"modelDigest", entry.model_digest},
                {"area", entry.requirements.area},
                {"pins", entry.requirements.pins},
                {"excludes", entry.requirements.excludes},
                {"log", log}};
    }

    static Decision parse_decision(const json& req) {
        if (!req.is_object() || !req.contains("action") || !req.contains("ref")) {
            throw error("BAD_REQUEST", "", "action and ref are required");
        }
        std::string action = req.at("action");
        std::string ref = req.at("ref");
        if (action == "include") return Decision::include(ref);
        if (action == "exclude") return Decision::exclude(ref);
        throw error("BAD_REQUEST", action, "action must be 'include' or 'exclude'");
    }

    std::shared_ptr<ModelEntry> find_model(const std::string& id) {
        std::shared_lock lock(registry_mutex_);
        auto it = models_.find(id);
        return it == models_.end() ? nullptr : it->second;
    }

    std::shared_ptr<SessionEntry> find_session(const std::string& id) {
        std::shared_lock lock(registry_mutex_);
        auto it = sessions_.find(id);
        return it == sessions_.end() ? nullptr : it->second;
    }

    static std::string utc_now() {
        auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    std::string fresh_id() {
        std::lock_guard lock(rng_mutex_);
        char buf[33];
        unsigned long long hi = (static_cast<unsigned long long>(random_()) << 32) | random_();
        unsigned long long lo = (static_cast<unsigned long long>(random_()) << 32) | random_();
        std::snprintf(buf, sizeof buf, "%016llx%016llx", hi, lo);
        return buf;
    }

    std::shared_mutex registry_mutex_;
    std::map<std::string, std::shared_ptr<ModelEntry>> models_;
    std::map<std::string, std::shared_ptr<SessionEntry>> sessions_;
    std::mutex rng_mutex_;
    std::random_device random_;
};

}  // namespace famvar
