#pragma once

/// Minimal XML element tree on top of expat, plus a canonical writer.
///
/// Only what the interchange formats need: elements and attributes. Text
/// content other than whitespace is rejected by the schema readers; DOCTYPE
/// declarations are refused outright.

#include <expat.h>

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "famvar/diagnostic.hpp"

namespace famvar::xml {

struct Element {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<Element> children;
    bool has_text = false;
    long line = 0;

    const std::string* attribute(std::string_view key) const {
        for (const auto& [k, v] : attributes) {
            if (k == key) return &v;
        }
        return nullptr;
    }
};

namespace detail {

struct ParseState {
    XML_Parser parser = nullptr;
    std::vector<Element*> open;
    std::unique_ptr<Element> root;
    std::string failure;
};

inline void on_start(void* user, const XML_Char* name, const XML_Char** attrs) {
    auto* st = static_cast<ParseState*>(user);
    Element el;
    el.name = name;
    el.line = static_cast<long>(XML_GetCurrentLineNumber(st->parser));
    for (auto** a = attrs; *a != nullptr; a += 2) {
        el.attributes.emplace_back(a[0], a[1]);
    }
    if (st->open.empty()) {
        st->root = std::make_unique<Element>(std::move(el));
        st->open.push_back(st->root.get());
    } else {
        auto& kids = st->open.back()->children;
        kids.push_back(std::move(el));
        st->open.push_back(&kids.back());
    }
}

inline void on_end(void* user, const XML_Char*) {
    static_cast<ParseState*>(user)->open.pop_back();
}

inline void on_text(void* user, const XML_Char* s, int len) {
    auto* st = static_cast<ParseState*>(user);
    if (st->open.empty()) return;
    for (int i = 0; i < len; ++i) {
        char c = s[i];
        if (c != ' ' && c != '\t' && c != '\n' && c != '\r') {
            st->open.back()->has_text = true;
            return;
        }
    }
}

inline void on_doctype(void* user, const XML_Char*, const XML_Char*, const XML_Char*, int) {
    auto* st = static_cast<ParseState*>(user);
    st->failure = "DOCTYPE declarations are not allowed";
    XML_StopParser(st->parser, XML_FALSE);
}

}  // namespace detail

/// Parses a complete UTF-8 document. Throws error("SYNTAX") on malformed input.
inline Element parse(std::string_view text) {
    detail::ParseState st;
    std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
        XML_ParserCreate("UTF-8"), &XML_ParserFree);
    if (!parser) throw error("SYNTAX", "", "cannot allocate XML parser");
    st.parser = parser.get();
    XML_SetUserData(st.parser, &st);
    XML_SetElementHandler(st.parser, detail::on_start, detail::on_end);
    XML_SetCharacterDataHandler(st.parser, detail::on_text);
    XML_SetStartDoctypeDeclHandler(st.parser, detail::on_doctype);

    auto status = XML_Parse(st.parser, text.data(), static_cast<int>(text.size()), XML_TRUE);
    if (status != XML_STATUS_OK || !st.failure.empty()) {
        std::string where = std::to_string(XML_GetCurrentLineNumber(st.parser)) + ":" +
                            std::to_string(XML_GetCurrentColumnNumber(st.parser));
        std::string why = st.failure.empty() ? XML_ErrorString(XML_GetErrorCode(st.parser)) : st.failure;
        throw error("SYNTAX", where, why);
    }
    if (!st.root) throw error("SYNTAX", "1:0", "no root element");
    return std::move(*st.root);
}

/// Strict attribute access: every attribute must be consumed or finish() fails.
class Reader {
public:
    explicit Reader(const Element& el) : el_(el) {}

    const Element& element() const { return el_; }

    std::string location() const { return "<" + el_.name + "> line " + std::to_string(el_.line); }

    std::string required(std::string_view key) {
        auto v = optional(key);
        if (!v) throw error("SCHEMA", location(), "missing required attribute '" + std::string(key) + "'");
        return *v;
    }

    std::optional<std::string> optional(std::string_view key) {
        consumed_.insert(std::string(key));
        if (auto* v = el_.attribute(key)) return *v;
        return std::nullopt;
    }

    /// Rejects unconsumed attributes and non-whitespace text.
    void finish() const {
        for (const auto& [k, v] : el_.attributes) {
            if (consumed_.count(k) == 0) {
                throw error("SCHEMA", location(), "unknown attribute '" + k + "'");
            }
        }
        if (el_.has_text) throw error("SCHEMA", location(), "unexpected text content");
    }

    [[noreturn]] void unknown_child(const Element& child) const {
        throw error("SCHEMA", "<" + child.name + "> line " + std::to_string(child.line),
                    "unexpected element inside <" + el_.name + ">");
    }

private:
    const Element& el_;
    std::set<std::string> consumed_;
};

inline void expect_root(const Element& el, std::string_view name) {
    if (el.name != name) {
        throw error("SCHEMA", "<" + el.name + "> line " + std::to_string(el.line),
                    "expected root element <" + std::string(name) + ">");
    }
}

/// Escapes for attribute values. Whitespace controls become character
/// references so attribute normalization cannot alter them.
inline std::string escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\n': out += "&#10;"; break;
            case '\r': out += "&#13;"; break;
            case '\t': out += "&#9;"; break;
            default: out += c;
        }
    }
    return out;
}

/// Writes the canonical form: declaration line, two-space indent, LF endings,
/// attributes in the order given, empty elements self-closed.
class Writer {
public:
    Writer() { out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"; }

    using Attrs = std::vector<std::pair<std::string_view, std::string_view>>;

    void open(std::string_view name, const Attrs& attrs = {}) {
        start_tag(name, attrs);
        out_ += ">\n";
        stack_.emplace_back(name);
    }

    void leaf(std::string_view name, const Attrs& attrs = {}) {
        start_tag(name, attrs);
        out_ += "/>\n";
    }

    void close() {
        indent(stack_.size() - 1);
        out_ += "</" + stack_.back() + ">\n";
        stack_.pop_back();
    }

    std::string str() && { return std::move(out_); }

private:
    void indent(std::size_t depth) { out_.append(depth * 2, ' '); }

    void start_tag(std::string_view name, const Attrs& attrs) {
        indent(stack_.size());
        out_ += '<';
        out_ += name;
        for (const auto& [k, v] : attrs) {
            out_ += ' ';
            out_ += k;
            out_ += "=\"";
            out_ += escape(v);
            out_ += '"';
        }
    }

    std::string out_;
    std::vector<std::string> stack_;
};

}  // namespace famvar::xml
