// famvar: batch front end for variant models.
//
// Exit status: 0 success, 1 diagnostics/validation failure, 2 usage or I/O error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "famvar/famvar.hpp"
#include "famvar/http.hpp"

namespace fs = std::filesystem;
using namespace famvar;

namespace {

struct IoFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot write " + path.string());
    out << content;
    if (!out) throw IoFailure("cannot write " + path.string());
}

void require_format(const std::string& format, std::initializer_list<std::string_view> allowed) {
    for (auto a : allowed) {
        if (format == a) return;
    }
    throw UsageFailure("unsupported --format '" + format + "' for this subcommand");
}

std::string diagnostics_xml(const Diagnostics& diags) {
    xml::Writer w;
    if (diags.empty()) {
        w.leaf("diagnostics");
        return std::move(w).str();
    }
    w.open("diagnostics");
    for (const auto& d : diags) w.leaf("diagnostic", {{"code", d.code}, {"subject", d.subject}, {"message", d.message}});
    w.close();
    return std::move(w).str();
}

std::string diagnostics_text(const Diagnostics& diags) {
    std::string out;
    for (const auto& d : diags) out += format_diagnostic(d) + "\n";
    return out;
}

std::string configuration_line(const Configuration& c) {
    std::string line;
    for (const auto& choice : c.choices) {
        if (!line.empty()) line += ' ';
        line += choice.variant + "=";
        if (!choice.included) {
            line += "-";
            continue;
        }
        for (std::size_t i = 0; i < choice.values.size(); ++i) {
            if (i > 0) line += '+';
            line += choice.values[i];
        }
    }
    return line + "\n";
}

std::string states_text(const StateMap& states) {
    std::string out;
    for (const auto& e : states) {
        out += e.variant + " " + std::string(to_string(e.state.kind));
        for (std::size_t i = 0; i < e.state.selected.size(); ++i) out += (i == 0 ? " " : "+") + e.state.selected[i];
        if (!e.state.cause.empty()) out += " (because " + e.state.cause + ")";
        out += "\n";
    }
    return out;
}

std::string document_text(const ModelDocument& doc) {
    std::string out = doc.name + " (" + doc.kind + ")\n";
    for (const auto& el : doc.elements) {
        out += "  " + el.id + " " + el.kind + " \"" + el.label + "\"";
        if (el.stereotype) out += " <<" + *el.stereotype + ">>";
        if (el.tag) out += " {" + *el.tag + "}";
        out += "\n";
    }
    for (const auto& e : doc.edges) out += "  " + e.from + " -> " + e.to + "\n";
    return out;
}

std::string document_dot(const ModelDocument& doc) {
    auto q = [](const std::string& s) {
        std::string out = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        return out + "\"";
    };
    std::string out = "digraph " + q(doc.name) + " {\n";
    for (const auto& el : doc.elements) {
        std::string label = el.label;
        if (el.tag) label += "\n{" + *el.tag + "}";
        out += "  " + q(el.id) + " [label=" + q(label) + "];\n";
    }
    for (const auto& e : doc.edges) out += "  " + q(e.from) + " -> " + q(e.to) + ";\n";
    return out + "}\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"famvar - variability models for system families"};
    app.require_subcommand(1);

    std::string model_path, reqs_path, config_path, out_dir, area, format, element, trace_id;
    std::string host = "127.0.0.1";
    std::vector<std::string> doc_paths, decide, exclude;
    bool count_only = false;
    std::uint64_t max_space = default_max_space;
    int port = 8080;

    std::map<CLI::App*, std::string> formats;
    auto add_format = [&](CLI::App* cmd, std::string fallback) {
        formats[cmd] = fallback;
        cmd->add_option("--format", formats[cmd], "Output format (xml|text|dot)")->default_val(fallback);
    };

    auto* validate = app.add_subcommand("validate", "Check a variant model for well-formedness");
    validate->add_option("model", model_path)->required();
    add_format(validate, "text");

    auto* table = app.add_subcommand("table", "Render the variant model");
    table->add_option("model", model_path)->required();
    add_format(table, "text");

    auto* decisions = app.add_subcommand("decisions", "Derive the decision table (reduced when requirements are given)");
    decisions->add_option("model", model_path)->required();
    decisions->add_option("requirements", reqs_path);
    add_format(decisions, "text");

    auto* customize = app.add_subcommand("customize", "Apply requirements: reduced model and decision table");
    customize->add_option("model", model_path)->required();
    customize->add_option("requirements", reqs_path)->required();
    customize->add_option("-o", out_dir, "Output directory for model.xml and decisions.txt");
    add_format(customize, "xml");

    auto* enumerate = app.add_subcommand("enumerate", "List or count every valid product");
    enumerate->add_option("model", model_path)->required();
    enumerate->add_option("--area", area)->required();
    enumerate->add_flag("--count", count_only, "Print only the number of products");
    enumerate->add_option("--max-space", max_space, "Largest state space to explore")
        ->envname("FAMVAR_MAX_SPACE");
    add_format(enumerate, "text");

    auto* configure = app.add_subcommand("configure", "Run a scripted decision session");
    configure->add_option("model", model_path)->required();
    configure->add_option("--area", area)->required();
    configure->add_option("--decide", decide, "Values to include, in order")->delimiter(',');
    configure->add_option("--exclude", exclude, "Variants to exclude, applied after --decide")->delimiter(',');
    add_format(configure, "text");

    auto* trace = app.add_subcommand("trace", "Check traces, or follow them forward (--id) / backward (--element)");
    trace->add_option("model", model_path)->required();
    trace->add_option("documents", doc_paths)->required();
    auto* id_opt = trace->add_option("--id", trace_id, "Variant or value to trace forward");
    trace->add_option("--element", element, "Element to trace backward")->excludes(id_opt);
    add_format(trace, "text");

    auto* customize_doc = app.add_subcommand("customize-doc", "Derive a customized model document");
    customize_doc->add_option("model", model_path)->required();
    customize_doc->add_option("configuration", config_path)->required();
    customize_doc->add_option("document", doc_paths)->required()->expected(1);
    customize_doc->add_option("-o", out_dir, "Output directory");
    add_format(customize_doc, "xml");

    auto* features = app.add_subcommand("export-features", "Feature tree of the variant model");
    features->add_option("model", model_path)->required();
    add_format(features, "text");

    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP/JSON configuration service");
    serve_cmd->add_option("--port", port);
    serve_cmd->add_option("--host", host);
    add_format(serve_cmd, "text");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    format = formats.at(app.get_subcommands().front());

    try {
        if (*validate) {
            require_format(format, {"text", "xml"});
            Diagnostics diags;
            try {
                parse_family_model(read_file(model_path));
            } catch (const error& e) {
                diags = e.diagnostics();
            }
            if (format == "xml") std::cout << diagnostics_xml(diags);
            else std::cout << diagnostics_text(diags);
            return diags.empty() ? 0 : 1;
        }

        if (*table) {
            require_format(format, {"text", "xml"});
            auto model = parse_family_model(read_file(model_path));
            std::cout << (format == "xml" ? serialize_family_model(model) : render_table(model));
            return 0;
        }

        if (*decisions) {
            require_format(format, {"text", "xml"});
            auto model = parse_family_model(read_file(model_path));
            auto tbl = derive_decision_table(model);
            if (!reqs_path.empty()) {
                auto reqs = parse_requirements(read_file(reqs_path), &model);
                tbl = reduce_decision_table(tbl, apply_requirements(model, reqs).model, reqs);
            }
            std::cout << (format == "xml" ? serialize_decision_table(tbl) : render_decision_table(tbl));
            return 0;
        }

        if (*customize) {
            require_format(format, {"text", "xml"});
            auto model = parse_family_model(read_file(model_path));
            auto reqs = parse_requirements(read_file(reqs_path), &model);
            auto custom = apply_requirements(model, reqs);
            auto reduced = reduce_decision_table(derive_decision_table(model), custom.model, reqs);
            auto model_out = format == "xml" ? serialize_family_model(custom.model) : render_table(custom.model);
            if (out_dir.empty()) {
                std::cout << model_out << "\n" << render_decision_table(reduced);
                return 0;
            }
            fs::create_directories(out_dir);
            write_file(fs::path(out_dir) / (format == "xml" ? "model.xml" : "model.txt"), model_out);
            write_file(fs::path(out_dir) / "decisions.txt", render_decision_table(reduced));
            return 0;
        }

        if (*enumerate) {
            require_format(format, {"text", "xml"});
            auto model = parse_family_model(read_file(model_path));
            if (count_only) {
                std::cout << count_products(model, area, max_space) << "\n";
                return 0;
            }
            if (format == "text") {
                for_each_product(model, area, [](const Configuration& c) { std::cout << configuration_line(c); },
                                 max_space);
                return 0;
            }
            xml::Writer w;
            w.open("products", {{"area", area}});
            for_each_product(
                model, area,
                [&](const Configuration& c) {
                    w.open("configuration");
                    for (const auto& choice : c.choices) {
                        std::string_view state = choice.included ? "included" : "excluded";
                        if (choice.values.empty()) {
                            w.leaf("variant", {{"ref", choice.variant}, {"state", state}});
                            continue;
                        }
                        w.open("variant", {{"ref", choice.variant}, {"state", state}});
                        for (const auto& v : choice.values) w.leaf("value", {{"ref", v}});
                        w.close();
                    }
                    w.close();
                },
                max_space);
            w.close();
            std::cout << std::move(w).str();
            return 0;
        }

        if (*configure) {
            require_format(format, {"text", "xml"});
            auto model = parse_family_model(read_file(model_path));
            auto session = new_session(model, area);
            std::vector<Decision> script;
            for (const auto& d : decide) script.push_back(Decision::include(d));
            for (const auto& x : exclude) script.push_back(Decision::exclude(x));
            auto& report = format == "xml" ? std::cerr : std::cout;
            for (const auto& d : script) {
                auto out = apply_decision(session, d);
                for (const auto& c : out.consequences) report << format_consequence(c) << "\n";
                if (out.conflicted()) return 1;
                session = std::move(out.session);
            }
            if (format == "xml") {
                std::cout << serialize_configuration(to_configuration(session, model));
                return 0;
            }
            std::cout << states_text(session.states);
            if (!is_complete(session)) std::cout << "OPEN\n" << render_decision_table(open_decisions(session));
            return 0;
        }

        if (*trace) {
            require_format(format, {"text"});
            auto model = parse_family_model(read_file(model_path));
            std::vector<ModelDocument> docs;
            for (const auto& p : doc_paths) docs.push_back(parse_model_document(read_file(p)));
            if (!trace_id.empty()) {
                for (const auto& hit : trace_forward(model, trace_id, docs)) {
                    std::cout << hit.document << ":" << hit.element << "\n";
                }
                return 0;
            }
            if (!element.empty()) {
                auto tag = trace_backward(docs, element);
                std::cout << (tag ? *tag : std::string("none")) << "\n";
                return 0;
            }
            Diagnostics all;
            for (const auto& doc : docs) {
                auto diags = check_traces(doc, model);
                all.insert(all.end(), diags.begin(), diags.end());
            }
            std::cout << diagnostics_text(all);
            return all.empty() ? 0 : 1;
        }

        if (*customize_doc) {
            require_format(format, {"text", "xml", "dot"});
            auto model = parse_family_model(read_file(model_path));
            auto config = parse_configuration(read_file(config_path), &model);
            auto doc = parse_model_document(read_file(doc_paths.front()));
            auto custom = customize_document(doc, model, config);
            std::string rendered = format == "xml"    ? serialize_model_document(custom)
                                   : format == "dot" ? document_dot(custom)
                                                     : document_text(custom);
            if (out_dir.empty()) {
                std::cout << rendered;
                return 0;
            }
            fs::create_directories(out_dir);
            auto ext = format == "xml" ? ".xml" : format == "dot" ? ".dot" : ".txt";
            write_file(fs::path(out_dir) / (fs::path(doc_paths.front()).stem().string() + ext), rendered);
            return 0;
        }

        if (*features) {
            require_format(format, {"text", "xml", "dot"});
            auto tree = export_feature_tree(parse_family_model(read_file(model_path)));
            std::cout << (format == "dot"   ? feature_tree_dot(tree)
                          : format == "xml" ? serialize_feature_tree(tree)
                                            : render_feature_tree(tree));
            return 0;
        }

        if (*serve_cmd) {
            Service service;
            std::cerr << "listening on " << host << ":" << port << "\n";
            return famvar::serve(service, host, port) ? 0 : 2;
        }
    } catch (const error& e) {
        std::cerr << diagnostics_text(e.diagnostics());
        return 1;
    } catch (const IoFailure& e) {
        std::cerr << "famvar: " << e.what() << "\n";
        return 2;
    } catch (const UsageFailure& e) {
        std::cerr << "famvar: " << e.what() << "\n\n" << app.help();
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "famvar: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
