#include <gtest/gtest.h>

#include <algorithm>
#include <limits>

#include "ckg/error.hpp"
#include "ckg/exportio.hpp"
#include "ckg/fusion.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace ckg {
namespace {

KnowledgeGraph tiny() {
  KnowledgeGraph g;
  KnowledgeNode c;
  c.kind = EntityKind::Course;
  c.name = "Communication Principles";
  c.course = c.name;
  c.course_meta = CourseAttributes{"2022", "", {"Signals and Systems"}, {}};
  c.id = make_node_id(c.course, SourceKind::Textbook, c.kind, c.name, "t.md");
  c.provenance = {{SourceKind::Textbook, "t.md"}};
  KnowledgeNode p;
  p.kind = EntityKind::KnowledgePoint;
  p.name = "It's a \"matched\" filter\\";
  p.course = c.name;
  p.ranker = 1;
  p.level = 4;
  p.start = 12;
  p.word_frequency = 3;
  p.url = "t.md:9";
  p.descriptions = Descriptions{"line one\nline two", std::nullopt, "百科"};
  p.id = make_node_id(c.course, SourceKind::Textbook, p.kind, p.name, "t.md:9");
  p.provenance = {{SourceKind::Textbook, "t.md:9"}};
  g.scope.courses = {c.name};
  g.scope.sources = {SourceKind::Textbook};
  g.add_edge({c.id, p.id, EdgeType::HasPartOf, {"textbook"}});
  g.add_node(c);
  g.add_node(p);
  return g;
}

std::size_t count_lines(const std::string& s, std::string_view prefix) {
  std::size_t n = 0;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t end = s.find('\n', pos);
    if (std::string_view(s).substr(pos).starts_with(prefix)) ++n;
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return n;
}

TEST(Cypher, EmptyGraph) { EXPECT_EQ(emit_cypher(KnowledgeGraph{}), ""); }

TEST(Cypher, ThreeStatements) {
  const std::string script = emit_cypher(tiny());
  EXPECT_EQ(oracle::parse_cypher(script), (std::pair<std::size_t, std::size_t>{2, 1}));
  EXPECT_EQ(count_lines(script, "MERGE (n:Course"), 1u);
  EXPECT_EQ(count_lines(script, "MERGE (n:KnowledgePoint"), 1u);
  EXPECT_NE(script.find("n.name = 'It\\'s a \"matched\" filter\\\\'"), std::string::npos) << script;
  EXPECT_NE(script.find("n.description_wikiE = 'line one\\nline two'"), std::string::npos);
  EXPECT_NE(script.find("[r:hasPartOf]"), std::string::npos);
  EXPECT_EQ(emit_cypher(tiny()), script);
  EXPECT_EQ(emit_cypher(tiny(), false).find("provenance"), std::string::npos);
}

TEST(Cypher, Quote) {
  EXPECT_EQ(cypher_quote("plain"), "'plain'");
  EXPECT_EQ(cypher_quote("a'b\\c\td\re"), "'a\\'b\\\\c\\td\\re'");
}

TEST(Cypher, RejectsInvalidGraph) {
  KnowledgeGraph g = tiny();
  g.add_edge({"nowhere", g.nodes().begin()->first, EdgeType::HasPartOf, {}});
  try {
    emit_cypher(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidGraph);
  }
}

TEST(Cypher, GrammarOnRandomAndFusedGraphs) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const KnowledgeGraph g = fixture::random_linked_graph(seed);
    const auto [nodes, edges] = oracle::parse_cypher(emit_cypher(g));
    ASSERT_EQ(nodes, g.nodes().size()) << "seed " << seed;
    ASSERT_EQ(edges, g.edges().size()) << "seed " << seed;
  }
}

TEST(Json, RoundTrip) {
  const KnowledgeGraph g = tiny();
  const std::string text = emit_graph_json(g);
  EXPECT_EQ(load_graph_json(text), g);
  EXPECT_EQ(text.back(), '\n');
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const KnowledgeGraph r = fixture::random_linked_graph(seed);
    const std::string once = emit_graph_json(r);
    const KnowledgeGraph back = load_graph_json(once);
    ASSERT_EQ(back, r) << "seed " << seed;
    ASSERT_EQ(emit_graph_json(back), once);
  }
}

TEST(Json, EmptyGraphAndErrors) {
  const std::string text = emit_graph_json(KnowledgeGraph{});
  EXPECT_NE(text.find("\"nodes\": []"), std::string::npos) << text;
  EXPECT_NE(text.find("\"edges\": []"), std::string::npos);
  EXPECT_EQ(load_graph_json(text), KnowledgeGraph{});
  for (const char* bad : {"", "{", "[]", "{\"nodes\": 3}"}) {
    try {
      load_graph_json(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ParseError) << bad;
    }
  }
}

TEST(GraphML, Shape) {
  const KnowledgeGraph g = fixture::random_linked_graph(3);
  const std::string xml = emit_graphml(g);
  EXPECT_TRUE(xml.starts_with("<?xml"));
  EXPECT_EQ(count_lines(xml, "    <node "), g.nodes().size());
  EXPECT_EQ(count_lines(xml, "    <edge "), g.edges().size());
  EXPECT_EQ(emit_graphml(g), xml);
}

TEST(Dot, PenwidthAndCounts) {
  const std::vector<std::string> courses = {"A", "B \"quoted\"", "C"};
  const std::vector<WeightEdge> edges = {{0, 1, 1.0}, {1, 0, 0.333}, {2, 0, 0.25}};
  const std::string dot = emit_weight_graph_dot(courses, edges);
  EXPECT_NE(dot.find("penwidth=7.00"), std::string::npos) << dot;
  EXPECT_NE(dot.find("penwidth=3.00"), std::string::npos);
  EXPECT_NE(dot.find("penwidth=2.50"), std::string::npos);
  EXPECT_NE(dot.find("B \\\"quoted\\\""), std::string::npos);
  EXPECT_EQ(count_lines(dot, "  c") - courses.size(), edges.size());

  const std::string isolated = emit_weight_graph_dot(courses, std::span<const WeightEdge>{});
  EXPECT_EQ(isolated.find("--"), std::string::npos);
  EXPECT_EQ(count_lines(isolated, "  c"), courses.size());
}

const std::vector<Column> kCorrelationSchema = {{"course_i", ColumnType::Text, false},
                                           {"course_j", ColumnType::Text, false},
                                           {"Su", ColumnType::Number, false},
                                           {"Sv", ColumnType::Number, false},
                                           {"S", ColumnType::Number, false}};

TEST(Csv, CorrelationRow) {
  const std::vector<Row> rows = {
      {std::string("Communication Principles"), std::string("Signals and Systems"), 0.11389, 0.14008,
       overall_correlation(0.11389, 0.14008)}};
  EXPECT_EQ(emit_report_csv(rows, kCorrelationSchema),
            "course_i,course_j,Su,Sv,S\n"
            "Communication Principles,Signals and Systems,0.11389,0.14008,0.12699\n");
  EXPECT_EQ(emit_report_csv(std::span<const Row>{}, kCorrelationSchema), "course_i,course_j,Su,Sv,S\n");
}

TEST(Csv, FormatDecimal) {
  EXPECT_EQ(format_decimal(0.126985), "0.12699");
  EXPECT_EQ(format_decimal(-0.126985), "-0.12699");
  EXPECT_EQ(format_decimal(0.0), "0.00000");
  EXPECT_EQ(format_decimal(1.0), "1.00000");
  EXPECT_EQ(format_decimal(2.5, 0), "3");
  EXPECT_EQ(format_decimal(0.999995), "1.00000");
  EXPECT_EQ(format_decimal(1.005, 2), "1.01");
  EXPECT_EQ(format_decimal(1234.5678, 2), "1234.57");
  EXPECT_THROW(format_decimal(std::numeric_limits<double>::quiet_NaN()), Error);
}

TEST(Csv, ReparsesToInput) {
  std::mt19937_64 rng(41);
  const std::vector<std::string> texts = {"plain", "comma, inside", "quote \"x\"", "line\nbreak", "", "频谱", "cr\rhere"};
  const std::vector<Column> schema = {{"name", ColumnType::Text, false},
                                      {"value", ColumnType::Number, true},
                                      {"count", ColumnType::Integer, false}};
  std::vector<Row> rows;
  for (int i = 0; i < 200; ++i) {
    Row r;
    r.emplace_back(texts[fixture::pick(rng, texts.size())]);
    if (fixture::pick(rng, 4) == 0) r.emplace_back(std::monostate{});
    else r.emplace_back(static_cast<double>(fixture::pick(rng, 100000)) / 100000.0);
    r.emplace_back(static_cast<std::int64_t>(fixture::pick(rng, 1000)) - 500);
    rows.push_back(std::move(r));
  }
  const auto parsed = oracle::parse_csv(emit_report_csv(rows, schema));
  ASSERT_EQ(parsed.size(), rows.size() + 1);
  EXPECT_EQ(parsed[0], (std::vector<std::string>{"name", "value", "count"}));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ASSERT_EQ(parsed[i + 1].size(), 3u);
    EXPECT_EQ(parsed[i + 1][0], std::get<std::string>(rows[i][0]));
    if (std::holds_alternative<std::monostate>(rows[i][1])) EXPECT_EQ(parsed[i + 1][1], "");
    else EXPECT_NEAR(std::stod(parsed[i + 1][1]), std::get<double>(rows[i][1]), 5e-6);
    EXPECT_EQ(std::stoll(parsed[i + 1][2]), std::get<std::int64_t>(rows[i][2]));
  }
}

TEST(Csv, SchemaMismatch) {
  const std::vector<std::vector<Row>> bad = {
      {{std::string("a"), std::string("b"), 0.1, 0.2}},
      {{std::string("a"), std::string("b"), 0.1, 0.2, std::string("x")}},
      {{std::string("a"), std::string("b"), 0.1, std::monostate{}, 0.3}},
      {{std::string("a"), std::string("b"), 0.1, std::int64_t{2}, 0.3}},
  };
  for (const auto& rows : bad) {
    try {
      emit_report_csv(rows, kCorrelationSchema);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::SchemaMismatch);
    }
  }
}

TEST(Profile, Validate) {
  ExportProfile p{ExportFormat::CypherScript, "out.cypher", {{"include_provenance", "false"}}};
  EXPECT_NO_THROW(p.validate());
  EXPECT_FALSE(p.flag("include_provenance", true));
  p.options["include_provenance"] = "maybe";
  EXPECT_THROW(p.validate(), Error);
  ExportProfile dot{ExportFormat::Dot, "w.dot", {{"include_provenance", "true"}}};
  EXPECT_THROW(dot.validate(), Error);
  ExportProfile json{ExportFormat::GraphJson, "g.json", {{"colour", "red"}}};
  EXPECT_THROW(json.validate(), Error);
  EXPECT_EQ(parse_export_format("graphml"), ExportFormat::GraphML);
  EXPECT_THROW(parse_export_format("pdf"), Error);
}

}  // namespace
}  // namespace ckg
