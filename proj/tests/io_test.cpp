#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace famvar;
using namespace famvar::testing;

namespace {

std::string error_code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const error& e) {
        return e.code();
    }
    return "";
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::vector<std::string> cells(const std::string& row) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto bar = row.find(" | ", start);
        auto cell = row.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
        while (!cell.empty() && cell.back() == ' ') cell.pop_back();
        out.push_back(cell);
        if (bar == std::string::npos) break;
        start = bar + 3;
    }
    return out;
}

const char* minimal = R"(<?xml version="1.0" encoding="UTF-8"?>
<family name="Mini">
  <areas/>
  <variant id="V1" name="Only" relation="or">
    <applicableTo area="ALL"/>
    <value id="V1.1" name="One"/>
  </variant>
</family>
)";

}  // namespace

TEST(ParseFamilyModel, HallBookingStructure) {
    auto m = hall_booking();
    ASSERT_EQ(m.variants.size(), 5u);
    EXPECT_EQ(m.name, "Hall Booking System");
    EXPECT_EQ(m.areas, (std::vector<AreaId>{"Academic", "NonAcademic"}));
    EXPECT_EQ(m.variants[0].relation, Relation::alternative);
    EXPECT_EQ(m.variants[0].question, "What is the reservation mode?");
    EXPECT_EQ(m.variants[2].depends_on, std::vector<RefId>{"V1.2"});
    EXPECT_EQ(m.variants[4].depends_on, (std::vector<RefId>{"V2.3", "V1.2"}));
    EXPECT_EQ(m.variants[1].applicable_areas, std::vector<AreaId>{"NonAcademic"});
    EXPECT_FALSE(m.variants[3].mandatory);
}

TEST(ParseFamilyModel, MinimalDocument) {
    auto m = parse_family_model(minimal);
    ASSERT_EQ(m.variants.size(), 1u);
    EXPECT_TRUE(m.areas.empty());
    EXPECT_EQ(m.variants[0].question, "");
    EXPECT_EQ(m.variants[0].values[0].name, "One");
}

TEST(ParseFamilyModel, DanglingReferenceIsSchemaError) {
    auto text = read_fixture("hall_booking.xml");
    text.replace(text.find(R"(<dependsOn ref="V1.2"/>)"), 23, R"(<dependsOn ref="V1.9"/>)");
    try {
        parse_family_model(text);
        FAIL() << "expected an error";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), "SCHEMA");
        ASSERT_EQ(e.diagnostics().size(), 1u);
        EXPECT_EQ(e.diagnostics()[0].code, "DANGLING_DEPENDENCY");
        EXPECT_EQ(e.diagnostics()[0].subject, "V3");
    }
}

TEST(ParseFamilyModel, StrictSchema) {
    std::string base = minimal;
    auto with = [&](std::string from, std::string to) {
        auto t = base;
        t.replace(t.find(from), from.size(), to);
        return t;
    };
    EXPECT_EQ(error_code_of([&] { parse_family_model("<family name='x'>"); }), "SYNTAX");
    EXPECT_EQ(error_code_of([&] { parse_family_model(""); }), "SYNTAX");
    EXPECT_EQ(error_code_of([&] { parse_family_model(with("relation=\"or\"", "relation=\"or\" colour=\"red\"")); }), "SCHEMA");
    EXPECT_EQ(error_code_of([&] { parse_family_model(with("relation=\"or\"", "relation=\"xor\"")); }), "SCHEMA");
    EXPECT_EQ(error_code_of([&] { parse_family_model(with("relation=\"or\"", "")); }), "SCHEMA");
    EXPECT_EQ(error_code_of([&] { parse_family_model(with("<areas/>", "<areas/><note/>")); }), "SCHEMA");
    EXPECT_EQ(error_code_of([&] { parse_family_model(with("<areas/>", "<areas/>text")); }), "SCHEMA");
    EXPECT_EQ(error_code_of([&] { parse_family_model(with("<family", "<fam")); }), "SYNTAX");
    EXPECT_EQ(error_code_of([&] { parse_family_model("<familia name=\"x\"/>"); }), "SCHEMA");
    EXPECT_EQ(error_code_of([&] {
                  parse_family_model("<?xml version=\"1.0\"?><!DOCTYPE family [<!ENTITY x \"y\">]><family name=\"&x;\"/>");
              }),
              "SYNTAX");
    EXPECT_EQ(error_code_of([&] { parse_family_model(with(R"(<value id="V1.1" name="One"/>)", "")); }), "SCHEMA");
    EXPECT_EQ(error_code_of([&] { parse_family_model(with("relation=\"or\"", "relation=\"or\" mandatory=\"yes\"")); }), "SCHEMA");
}

TEST(ParseFamilyModel, NoVariantsIsSchemaError) {
    EXPECT_EQ(error_code_of([] { parse_family_model("<family name=\"x\"><areas/></family>"); }), "SCHEMA");
}

TEST(SerializeFamilyModel, CanonicalFixtureIsAFixedPoint) {
    auto text = read_fixture("hall_booking.xml");
    EXPECT_EQ(serialize_family_model(parse_family_model(text)), text);
}

TEST(SerializeFamilyModel, RejectsInvalidAndEmpty) {
    FamilyModel empty{"empty", {"A"}, {}};
    EXPECT_EQ(error_code_of([&] { serialize_family_model(empty); }), "INVALID_MODEL");
    auto m = hall_booking();
    m.variants[0].values.clear();
    EXPECT_EQ(error_code_of([&] { serialize_family_model(m); }), "INVALID_MODEL");
}

TEST(SerializeFamilyModel, EscapesAndValueDependencies) {
    auto m = hall_booking();
    m.variants[0].name = "Mode & \"kind\" <x>\tend\nnext";
    m.variants[4].values[0].depends_on = {"V3.1"};
    auto text = serialize_family_model(m);
    EXPECT_NE(text.find("Mode &amp; &quot;kind&quot; &lt;x&gt;&#9;end&#10;next"), std::string::npos);
    EXPECT_NE(text.find("    <value id=\"V5.1\" name=\"Block Discount\">\n      <dependsOn ref=\"V3.1\"/>\n    </value>\n"),
              std::string::npos);
    EXPECT_EQ(parse_family_model(text), m);
}

TEST(SerializeFamilyModelProperty, RoundTripAndCanonicalStability) {
    std::mt19937 rng(2024);
    for (int round = 0; round < 250; ++round) {
        auto m = random_model(rng);
        auto text = serialize_family_model(m);
        auto back = parse_family_model(text);
        ASSERT_EQ(back, m) << text;
        ASSERT_EQ(serialize_family_model(back), text);
        EXPECT_EQ(text.find('\r'), std::string::npos);
    }
}

TEST(ParseFamilyModelProperty, FuzzedInputNeverCrashes) {
    std::mt19937 rng(7);
    const auto base = read_fixture("hall_booking.xml");
    const std::string alphabet = "<>/=\"' &;#xV1.2\n";
    std::uniform_int_distribution<std::size_t> pos(0, base.size() - 1);
    std::uniform_int_distribution<std::size_t> ch(0, alphabet.size() - 1);
    std::uniform_int_distribution<int> edits(1, 6);
    int accepted = 0;
    for (int round = 0; round < 2000; ++round) {
        auto text = base;
        for (int e = edits(rng); e > 0; --e) {
            auto p = pos(rng) % text.size();
            switch (e % 3) {
                case 0: text[p] = alphabet[ch(rng)]; break;
                case 1: text.erase(p, 1); break;
                case 2: text.insert(p, 1, alphabet[ch(rng)]); break;
            }
        }
        try {
            parse_family_model(text);
            ++accepted;
        } catch (const error& e) {
            EXPECT_TRUE(e.code() == "SYNTAX" || e.code() == "SCHEMA") << e.code();
        }
    }
    EXPECT_LT(accepted, 2000);
}

// ---------------------------------------------------------------------------

TEST(ParseRequirements, AcademicPrintedPaper) {
    auto m = hall_booking();
    auto reqs = parse_requirements(read_fixture("academic_printed.xml"), &m);
    EXPECT_EQ(reqs, (Requirements{"Academic", {"V4.3"}, {}}));
}

TEST(ParseRequirements, AreaOnly) {
    auto reqs = parse_requirements(R"(<requirements area="NonAcademic"/>)");
    EXPECT_EQ(reqs, (Requirements{"NonAcademic", {}, {}}));
}

TEST(ParseRequirements, PinOfExcludedVariantIsSchemaError) {
    const char* text = R"(<requirements area="Academic"><pin ref="V4.3"/><exclude ref="V4"/></requirements>)";
    EXPECT_EQ(error_code_of([&] { parse_requirements(text); }), "SCHEMA");
}

TEST(ParseRequirements, Errors) {
    auto m = hall_booking();
    EXPECT_EQ(error_code_of([&] { parse_requirements(R"(<requirements area="Academic"><pin ref="V4"/></requirements>)"); }),
              "SCHEMA");
    EXPECT_EQ(error_code_of([&] { parse_requirements(R"(<requirements area="Academic"><exclude ref="V4.1"/></requirements>)"); }),
              "SCHEMA");
    EXPECT_EQ(error_code_of([&] { parse_requirements(R"(<requirements area="Academic"><pin ref="V4.1"/><pin ref="V4.1"/></requirements>)"); }),
              "SCHEMA");
    EXPECT_EQ(error_code_of([&] { parse_requirements(R"(<requirements/>)"); }), "SCHEMA");
    EXPECT_EQ(error_code_of([&] { parse_requirements(R"(<requirements area="Academic"><wish ref="V4.1"/></requirements>)"); }),
              "SCHEMA");
    EXPECT_EQ(error_code_of([&] { parse_requirements(R"(<requirements area="Academic"><pin ref="V9.1"/></requirements>)", &m); }),
              "UNKNOWN_ID");
    EXPECT_EQ(error_code_of([&] { parse_requirements(R"(<requirements area="Mars"/>)", &m); }), "UNKNOWN_ID");
    EXPECT_EQ(error_code_of([&] { parse_requirements(R"(<requirements area="Academic">)"); }), "SYNTAX");
}

TEST(SerializeRequirements, RoundTrip) {
    Requirements reqs{"Academic", {"V4.3", "V1.2"}, {"V2"}};
    auto text = serialize_requirements(reqs);
    EXPECT_EQ(text,
              "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<requirements area=\"Academic\">\n  <pin ref=\"V4.3\"/>\n"
              "  <pin ref=\"V1.2\"/>\n  <exclude ref=\"V2\"/>\n</requirements>\n");
    EXPECT_EQ(parse_requirements(text), reqs);
    EXPECT_EQ(serialize_requirements(parse_requirements(serialize_requirements({"A", {}, {}}))),
              serialize_requirements({"A", {}, {}}));
}

TEST(SerializeRequirementsProperty, RoundTripAndCanonicalStability) {
    std::mt19937 rng(2025);
    for (int round = 0; round < 250; ++round) {
        auto m = random_model(rng);
        Requirements reqs{round % 2 ? "A" : "B", {}, {}};
        for (const auto& v : m.variants) {
            switch (rng() % 3) {
                case 0: reqs.excludes.push_back(v.id); break;
                case 1: reqs.pins.push_back(v.values[rng() % v.values.size()].id); break;
                default: break;
            }
        }
        std::shuffle(reqs.pins.begin(), reqs.pins.end(), rng);
        auto text = serialize_requirements(reqs);
        auto back = parse_requirements(text, &m);
        ASSERT_EQ(back, reqs) << text;
        ASSERT_EQ(serialize_requirements(back), text);
    }
}

TEST(ConfigurationProperty, RoundTripAndCanonicalStability) {
    std::mt19937 rng(2026);
    for (int round = 0; round < 250; ++round) {
        auto m = random_model(rng);
        Configuration c{round % 2 ? "A" : "B", {}};
        for (const auto& v : m.variants) {
            VariantChoice ch{v.id, rng() % 2 == 0, {}};
            if (ch.included) {
                for (const auto& val : v.values) {
                    if (rng() % 2) ch.values.push_back(val.id);
                }
            }
            c.choices.push_back(std::move(ch));
        }
        auto text = serialize_configuration(c);
        auto back = parse_configuration(text, &m);
        ASSERT_EQ(back, c) << text;
        ASSERT_EQ(serialize_configuration(back), text);
    }
}

TEST(Configuration, RoundTripAndSchema) {
    Configuration c{"Academic", {{"V1", true, {"V1.2"}}, {"V2", false, {}}, {"V3", true, {"V3.1", "V3.2"}}}};
    auto text = serialize_configuration(c);
    EXPECT_EQ(text,
              "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<configuration area=\"Academic\">\n"
              "  <variant ref=\"V1\" state=\"included\">\n    <value ref=\"V1.2\"/>\n  </variant>\n"
              "  <variant ref=\"V2\" state=\"excluded\"/>\n"
              "  <variant ref=\"V3\" state=\"included\">\n    <value ref=\"V3.1\"/>\n    <value ref=\"V3.2\"/>\n  </variant>\n"
              "</configuration>\n");
    EXPECT_EQ(parse_configuration(text), c);
    EXPECT_EQ(serialize_configuration(parse_configuration(text)), text);

    auto bad = [](const char* body) {
        return error_code_of([&] { parse_configuration(std::string("<configuration area=\"A\">") + body + "</configuration>"); });
    };
    EXPECT_EQ(bad(R"(<variant ref="V1" state="excluded"><value ref="V1.1"/></variant>)"), "SCHEMA");
    EXPECT_EQ(bad(R"(<variant ref="V1" state="maybe"/>)"), "SCHEMA");
    EXPECT_EQ(bad(R"(<variant ref="V1" state="included"><value ref="V2.1"/></variant>)"), "SCHEMA");
    EXPECT_EQ(bad(R"(<variant ref="V1" state="included"/><variant ref="V1" state="excluded"/>)"), "SCHEMA");
    auto m = hall_booking();
    EXPECT_EQ(error_code_of([&] { parse_configuration(R"(<configuration area="Academic"><variant ref="V8" state="excluded"/></configuration>)", &m); }),
              "UNKNOWN_ID");
}

TEST(ModelDocumentIo, ParseCanonicalizesLegacyTagsAndRoundTrips) {
    auto doc = parse_model_document(read_fixture("reserve_hall.xml"));
    EXPECT_EQ(doc.name, "Reserve Hall");
    EXPECT_EQ(doc.kind, "activity");
    ASSERT_EQ(doc.elements.size(), 10u);
    EXPECT_EQ(doc.find("notify")->tag, std::optional<std::string>("V4"));
    EXPECT_EQ(doc.find("start")->tag, std::nullopt);
    auto text = serialize_model_document(doc);
    EXPECT_EQ(parse_model_document(text), doc);
    EXPECT_EQ(serialize_model_document(parse_model_document(text)), text);
}

TEST(ModelDocumentIo, SchemaErrors) {
    EXPECT_EQ(error_code_of([] {
                  parse_model_document(R"(<modelDoc name="d" kind="k"><element id="a" kind="x" label="A"/><edge from="a" to="b"/></modelDoc>)");
              }),
              "SCHEMA");
    EXPECT_EQ(error_code_of([] {
                  parse_model_document(R"(<modelDoc name="d" kind="k"><element id="a" kind="x" label="A"/><element id="a" kind="x" label="B"/></modelDoc>)");
              }),
              "SCHEMA");
    EXPECT_EQ(error_code_of([] { parse_model_document(R"(<modelDoc name="d"/>)"); }), "SCHEMA");
}

// ---------------------------------------------------------------------------

TEST(RenderTable, HallBookingRows) {
    auto lines = split_lines(render_table(hall_booking()));
    ASSERT_EQ(lines.size(), 7u);  // header, rule, 5 rows
    EXPECT_EQ(cells(lines[0]), (std::vector<std::string>{"Variant", "Values", "Relation", "Applicable Area", "Dependency"}));
    auto row1 = cells(lines[2]);
    EXPECT_EQ(row1, (std::vector<std::string>{"V1. Reservation Mode", "V1.1 Single; V1.2 Block", "Alternative", "All", "None"}));
    auto row3 = cells(lines[4]);
    EXPECT_EQ(row3[0], "V3. Block Reservation");
    EXPECT_EQ(row3[4], "V1.2");
    auto row5 = cells(lines[6]);
    EXPECT_EQ(row5[3], "NonAcademic");
    EXPECT_EQ(row5[4], "V2.3, V1.2");
    // Columns line up.
    EXPECT_EQ(lines[1].find("-+-"), lines[0].find(" | "));
    for (std::size_t i = 2; i < lines.size(); ++i) EXPECT_EQ(lines[i].find(" | "), lines[0].find(" | ")) << lines[i];
}

TEST(RenderTable, NoDependencyIsNone) {
    FamilyModel m{"one", {"A", "B"}, {make_variant("V1", Relation::or_, {"x", "y"}, {"A", "B"})}};
    auto lines = split_lines(render_table(m));
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(cells(lines[2]), (std::vector<std::string>{"V1. Variant V1", "V1.1 x; V1.2 y", "OR", "A, B", "None"}));
}

TEST(RenderTable, RowOrderFollowsModelOrder) {
    auto m = hall_booking();
    std::mt19937 rng(3);
    for (int round = 0; round < 10; ++round) {
        std::shuffle(m.variants.begin(), m.variants.end(), rng);
        auto lines = split_lines(render_table(m));
        for (std::size_t i = 0; i < m.variants.size(); ++i) {
            EXPECT_EQ(cells(lines[i + 2])[0], m.variants[i].id + ". " + m.variants[i].name);
        }
        EXPECT_EQ(render_table(m), render_table(m));
    }
}
