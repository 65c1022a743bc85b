#include "ckg/exportio.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include <json.hpp>

#include "ckg/error.hpp"

namespace ckg {

namespace {

using nlohmann::json;

void require_valid(const KnowledgeGraph& g) {
  const auto violations = validate_graph(g);
  if (!violations.empty()) {
    const auto& v = violations.front();
    std::string subjects;
    for (const auto& s : v.subjects) subjects += (subjects.empty() ? "" : ",") + s;
    throw Error(ErrorCode::InvalidGraph, v.rule + " [" + subjects + "]: " + v.detail);
  }
}

std::string provenance_tag(const Provenance& p) { return std::string(to_string(p.source)) + ":" + p.locator; }

json node_to_json(const KnowledgeNode& n) {
  json j = json::object();
  j["id"] = n.id;
  j["kind"] = std::string(to_string(n.kind));
  j["name"] = n.name;
  if (n.ranker) j["ranker"] = *n.ranker;
  if (n.level) j["level"] = *n.level;
  j["url"] = n.url;
  if (n.start) j["start"] = *n.start;
  if (n.word_frequency) j["word_frequency"] = *n.word_frequency;
  if (n.descriptions) {
    json d = json::object();
    if (n.descriptions->wiki_en) d["wikiE"] = *n.descriptions->wiki_en;
    if (n.descriptions->wiki_zh) d["wikiC"] = *n.descriptions->wiki_zh;
    if (n.descriptions->baidu) d["baidu"] = *n.descriptions->baidu;
    j["descriptions"] = d;
  }
  if (n.course_meta) {
    j["course_meta"] = {{"school_term", n.course_meta->school_term},
                        {"background", n.course_meta->background},
                        {"coursePrerequisites", n.course_meta->course_prerequisites},
                        {"educationalAlignments", n.course_meta->educational_alignments}};
  }
  j["course"] = n.course;
  j["source"] = std::string(to_string(n.source));
  json prov = json::array();
  for (const auto& p : n.provenance) prov.push_back({{"source", std::string(to_string(p.source))}, {"locator", p.locator}});
  j["provenance"] = prov;
  if (n.fused) {
    json kinds = json::array();
    for (EntityKind k : n.fused->member_kinds) kinds.push_back(std::string(to_string(k)));
    json bag = json::object();
    for (const auto& [key, values] : n.fused->bag) bag[key] = values;
    j["fused"] = {{"members", n.fused->members},
                  {"member_kinds", kinds},
                  {"fused_rank", n.fused->fused_rank},
                  {"bag", bag},
                  {"word_frequency_total", n.fused->word_frequency_total}};
  }
  return j;
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return j.at(key).get<T>();
}

KnowledgeNode node_from_json(const json& j) {
  KnowledgeNode n;
  n.id = j.at("id").get<std::string>();
  n.kind = parse_entity_kind(j.at("kind").get<std::string>());
  n.name = j.at("name").get<std::string>();
  n.ranker = optional_field<std::size_t>(j, "ranker");
  n.level = optional_field<std::size_t>(j, "level");
  n.url = j.at("url").get<std::string>();
  n.start = optional_field<std::size_t>(j, "start");
  n.word_frequency = optional_field<std::size_t>(j, "word_frequency");
  if (j.contains("descriptions")) {
    const json& d = j.at("descriptions");
    n.descriptions = Descriptions{optional_field<std::string>(d, "wikiE"), optional_field<std::string>(d, "wikiC"),
                                  optional_field<std::string>(d, "baidu")};
  }
  if (j.contains("course_meta")) {
    const json& c = j.at("course_meta");
    n.course_meta = CourseAttributes{c.at("school_term").get<std::string>(), c.at("background").get<std::string>(),
                                     c.at("coursePrerequisites").get<std::vector<std::string>>(),
                                     c.at("educationalAlignments").get<std::vector<std::string>>()};
  }
  n.course = j.at("course").get<std::string>();
  n.source = parse_source_kind(j.at("source").get<std::string>());
  for (const json& p : j.at("provenance"))
    n.provenance.push_back({parse_source_kind(p.at("source").get<std::string>()), p.at("locator").get<std::string>()});
  if (j.contains("fused")) {
    const json& f = j.at("fused");
    FusedAttributes attrs;
    attrs.members = f.at("members").get<std::vector<std::string>>();
    for (const json& k : f.at("member_kinds")) attrs.member_kinds.insert(parse_entity_kind(k.get<std::string>()));
    attrs.fused_rank = f.at("fused_rank").get<int>();
    for (const auto& [key, values] : f.at("bag").items()) attrs.bag[key] = values.get<std::set<std::string>>();
    attrs.word_frequency_total = f.at("word_frequency_total").get<std::size_t>();
    n.fused = std::move(attrs);
  }
  return n;
}

std::string cypher_list(const auto& values) {
  std::string out = "[";
  bool first = true;
  for (const auto& v : values) {
    if (!first) out += ", ";
    out += cypher_quote(v);
    first = false;
  }
  return out + "]";
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string dot_quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Attribute name/value pairs shared by the Cypher and GraphML emitters.
// Values are already rendered; lists are kept apart so each format can encode them.
struct Properties {
  std::vector<std::pair<std::string, std::string>> text;
  std::vector<std::pair<std::string, std::size_t>> integer;
  std::vector<std::pair<std::string, std::vector<std::string>>> list;
};

Properties node_properties(const KnowledgeNode& n, bool include_provenance) {
  Properties p;
  p.text.emplace_back("name", n.name);
  p.text.emplace_back("url", n.url);
  p.text.emplace_back("course", n.course);
  p.text.emplace_back("source", std::string(to_string(n.source)));
  if (n.ranker) p.integer.emplace_back("ranker", *n.ranker);
  if (n.level) p.integer.emplace_back("level", *n.level);
  if (n.start) p.integer.emplace_back("start", *n.start);
  if (n.word_frequency) p.integer.emplace_back("word_frequency", *n.word_frequency);
  if (n.descriptions) {
    if (n.descriptions->wiki_en) p.text.emplace_back("description_wikiE", *n.descriptions->wiki_en);
    if (n.descriptions->wiki_zh) p.text.emplace_back("description_wikiC", *n.descriptions->wiki_zh);
    if (n.descriptions->baidu) p.text.emplace_back("description_baidu", *n.descriptions->baidu);
  }
  if (n.course_meta) {
    p.text.emplace_back("school_term", n.course_meta->school_term);
    p.text.emplace_back("background", n.course_meta->background);
    p.list.emplace_back("coursePrerequisites", n.course_meta->course_prerequisites);
    p.list.emplace_back("educationalAlignments", n.course_meta->educational_alignments);
  }
  if (n.fused) {
    p.list.emplace_back("fused_members", n.fused->members);
    std::vector<std::string> kinds;
    for (EntityKind k : n.fused->member_kinds) kinds.emplace_back(to_string(k));
    p.list.emplace_back("fused_member_kinds", kinds);
    p.integer.emplace_back("fused_rank", static_cast<std::size_t>(n.fused->fused_rank));
    p.integer.emplace_back("word_frequency_total", n.fused->word_frequency_total);
    for (const auto& [key, values] : n.fused->bag)
      p.list.emplace_back("fused_" + key, std::vector<std::string>(values.begin(), values.end()));
  }
  if (include_provenance) {
    std::vector<std::string> tags;
    for (const auto& pr : n.provenance) tags.push_back(provenance_tag(pr));
    p.list.emplace_back("provenance", tags);
  }
  return p;
}

}  // namespace

std::string_view to_string(ExportFormat format) {
  switch (format) {
    case ExportFormat::CypherScript: return "cypher";
    case ExportFormat::GraphJson: return "json";
    case ExportFormat::GraphML: return "graphml";
    case ExportFormat::Dot: return "dot";
    case ExportFormat::Csv: return "csv";
  }
  return "unknown";
}

ExportFormat parse_export_format(std::string_view text) {
  for (auto f : {ExportFormat::CypherScript, ExportFormat::GraphJson, ExportFormat::GraphML, ExportFormat::Dot,
                 ExportFormat::Csv}) {
    if (to_string(f) == text) return f;
  }
  throw Error(ErrorCode::ConfigError, "unknown export format '" + std::string(text) + "'");
}

void ExportProfile::validate() const {
  for (const auto& [key, value] : options) {
    if (key != "include_provenance")
      throw Error(ErrorCode::ConfigError, "unknown option '" + key + "' for " + std::string(to_string(format)));
    if (format != ExportFormat::CypherScript && format != ExportFormat::GraphML)
      throw Error(ErrorCode::ConfigError, "include_provenance does not apply to " + std::string(to_string(format)));
    if (value != "true" && value != "false")
      throw Error(ErrorCode::ConfigError, "include_provenance must be true or false");
  }
}

bool ExportProfile::flag(std::string_view name, bool fallback) const {
  const auto it = options.find(std::string(name));
  return it == options.end() ? fallback : it->second == "true";
}

std::string cypher_quote(std::string_view text) {
  std::string out = "'";
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\'': out += "\\'"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "'";
}

std::string emit_cypher(const KnowledgeGraph& g, bool include_provenance) {
  require_valid(g);
  std::string out;
  for (const auto& [id, n] : g.nodes()) {
    const Properties p = node_properties(n, include_provenance);
    out += "MERGE (n:" + std::string(to_string(n.kind)) + " {id: " + cypher_quote(id) + "}) SET ";
    bool first = true;
    auto sep = [&] {
      if (!first) out += ", ";
      first = false;
    };
    for (const auto& [k, v] : p.text) sep(), out += "n." + k + " = " + cypher_quote(v);
    for (const auto& [k, v] : p.integer) sep(), out += "n." + k + " = " + std::to_string(v);
    for (const auto& [k, v] : p.list) sep(), out += "n." + k + " = " + cypher_list(v);
    out += ";\n";
  }
  for (const auto& [key, e] : g.edges()) {
    out += "MATCH (a {id: " + cypher_quote(e.from) + "}), (b {id: " + cypher_quote(e.to) + "}) MERGE (a)-[r:" +
           std::string(to_string(e.type)) + "]->(b)";
    if (include_provenance) out += " SET r.provenance = " + cypher_list(e.provenance);
    out += ";\n";
  }
  return out;
}

std::string emit_graph_json(const KnowledgeGraph& g) {
  require_valid(g);
  json nodes = json::array();
  for (const auto& [id, n] : g.nodes()) nodes.push_back(node_to_json(n));
  json edges = json::array();
  for (const auto& [key, e] : g.edges())
    edges.push_back({{"from", e.from}, {"to", e.to}, {"type", std::string(to_string(e.type))}, {"provenance", e.provenance}});
  json sources = json::array();
  for (SourceKind s : g.scope.sources) sources.push_back(std::string(to_string(s)));
  json doc = {{"nodes", nodes}, {"edges", edges}, {"scope", {{"courses", g.scope.courses}, {"sources", sources}}}};
  return doc.dump(2) + "\n";
}

KnowledgeGraph load_graph_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    KnowledgeGraph g;
    for (const json& n : doc.at("nodes")) g.add_node(node_from_json(n));
    for (const json& e : doc.at("edges")) {
      g.add_edge({e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                  parse_edge_type(e.at("type").get<std::string>()), e.at("provenance").get<std::vector<std::string>>()});
    }
    const json& scope = doc.at("scope");
    g.scope.courses = scope.at("courses").get<std::set<std::string>>();
    for (const json& s : scope.at("sources")) g.scope.sources.insert(parse_source_kind(s.get<std::string>()));
    return g;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("graph json: ") + e.what());
  }
}

std::string emit_graphml(const KnowledgeGraph& g, bool include_provenance) {
  require_valid(g);
  std::map<std::string, std::string> node_keys{{"kind", "string"}};
  std::vector<std::pair<std::string, Properties>> rendered;
  for (const auto& [id, n] : g.nodes()) {
    Properties p = node_properties(n, include_provenance);
    for (const auto& [k, v] : p.text) node_keys.emplace(k, "string");
    for (const auto& [k, v] : p.integer) node_keys.emplace(k, "long");
    for (const auto& [k, v] : p.list) node_keys.emplace(k, "string");
    rendered.emplace_back(id, std::move(p));
  }
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
  for (const auto& [k, type] : node_keys)
    out << "  <key id=\"" << xml_escape(k) << "\" for=\"node\" attr.name=\"" << xml_escape(k) << "\" attr.type=\""
        << type << "\"/>\n";
  out << "  <key id=\"type\" for=\"edge\" attr.name=\"type\" attr.type=\"string\"/>\n";
  if (include_provenance)
    out << "  <key id=\"edge_provenance\" for=\"edge\" attr.name=\"provenance\" attr.type=\"string\"/>\n";
  out << "  <graph id=\"G\" edgedefault=\"directed\">\n";
  for (const auto& [id, p] : rendered) {
    out << "    <node id=\"" << xml_escape(id) << "\">\n";
    out << "      <data key=\"kind\">" << to_string(g.nodes().at(id).kind) << "</data>\n";
    for (const auto& [k, v] : p.text) out << "      <data key=\"" << k << "\">" << xml_escape(v) << "</data>\n";
    for (const auto& [k, v] : p.integer) out << "      <data key=\"" << k << "\">" << v << "</data>\n";
    for (const auto& [k, v] : p.list) {
      std::string joined;
      for (const auto& item : v) joined += (joined.empty() ? "" : ";") + item;
      out << "      <data key=\"" << k << "\">" << xml_escape(joined) << "</data>\n";
    }
    out << "    </node>\n";
  }
  for (const auto& [key, e] : g.edges()) {
    out << "    <edge source=\"" << xml_escape(e.from) << "\" target=\"" << xml_escape(e.to) << "\">\n";
    out << "      <data key=\"type\">" << to_string(e.type) << "</data>\n";
    if (include_provenance) {
      std::string joined;
      for (const auto& item : e.provenance) joined += (joined.empty() ? "" : ";") + item;
      out << "      <data key=\"edge_provenance\">" << xml_escape(joined) << "</data>\n";
    }
    out << "    </edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
  return out.str();
}

std::string emit_weight_graph_dot(std::span<const std::string> courses, std::span<const WeightEdge> edges) {
  std::string out = "graph course_weights {\n";
  for (std::size_t i = 0; i < courses.size(); ++i)
    out += "  c" + std::to_string(i) + " [label=" + dot_quote(courses[i]) + "];\n";
  for (const auto& e : edges) {
    if (e.from >= courses.size() || e.to >= courses.size())
      throw Error(ErrorCode::InvalidArgument, "weight edge refers to an unknown course");
    out += "  c" + std::to_string(e.from) + " -- c" + std::to_string(e.to) + " [penwidth=" +
           format_decimal(1.0 + 6.0 * e.weight, 2) + ", label=\"" + format_decimal(e.weight) + "\"];\n";
  }
  return out + "}\n";
}

std::string emit_report_csv(std::span<const Row> rows, std::span<const Column> schema) {
  std::string out;
  for (std::size_t c = 0; c < schema.size(); ++c) out += (c ? "," : "") + csv_field(schema[c].name);
  out += "\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Row& row = rows[r];
    if (row.size() != schema.size())
      throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                                                 " cells, schema has " + std::to_string(schema.size()));
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (c) out += ",";
      const Cell& cell = row[c];
      const Column& col = schema[c];
      auto mismatch = [&] {
        return Error(ErrorCode::SchemaMismatch, "row " + std::to_string(r) + " column '" + col.name + "' has the wrong type");
      };
      if (std::holds_alternative<std::monostate>(cell)) {
        if (!col.nullable) throw mismatch();
        continue;
      }
      switch (col.type) {
        case ColumnType::Text:
          if (!std::holds_alternative<std::string>(cell)) throw mismatch();
          out += csv_field(std::get<std::string>(cell));
          break;
        case ColumnType::Number:
          if (!std::holds_alternative<double>(cell)) throw mismatch();
          out += format_decimal(std::get<double>(cell));
          break;
        case ColumnType::Integer:
          if (!std::holds_alternative<std::int64_t>(cell)) throw mismatch();
          out += std::to_string(std::get<std::int64_t>(cell));
          break;
      }
    }
    out += "\n";
  }
  return out;
}

std::string format_decimal(double value, int places) {
  if (!std::isfinite(value)) throw Error(ErrorCode::InvalidArgument, "cannot render a non-finite number");
  if (places < 0) throw Error(ErrorCode::InvalidArgument, "negative decimal places");
  const bool negative = std::signbit(value);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.11e", std::abs(value));
  // buf = d.ddddddddddde[+-]XX
  std::string digits;
  digits += buf[0];
  digits.append(buf + 2, 11);
  const int exponent = std::atoi(std::strchr(buf, 'e') + 1);

  // digits represent 0.digits * 10^(exponent + 1); keep `int_len + places` of them.
  const int int_len = exponent + 1;
  const int keep = int_len + places;
  std::string kept;
  if (keep <= 0) {
    kept = (keep == 0 && digits[0] >= '5') ? "1" : "0";
    // value rounds to 0 or to one unit in the last place.
    std::string frac(static_cast<std::size_t>(places), '0');
    std::string out = "0";
    if (places > 0) {
      if (kept == "1") frac.back() = '1';
      out += "." + frac;
    } else if (kept == "1") {
      out = "1";
    }
    return (negative && kept == "1" ? "-" : "") + out;
  }
  if (keep >= static_cast<int>(digits.size())) {
    kept = digits + std::string(static_cast<std::size_t>(keep) - digits.size(), '0');
  } else {
    kept = digits.substr(0, static_cast<std::size_t>(keep));
    if (digits[static_cast<std::size_t>(keep)] >= '5') {
      int i = keep - 1;
      while (i >= 0 && kept[static_cast<std::size_t>(i)] == '9') kept[static_cast<std::size_t>(i--)] = '0';
      if (i >= 0) {
        ++kept[static_cast<std::size_t>(i)];
      } else {
        kept.insert(kept.begin(), '1');
      }
    }
  }
  // kept now holds the scaled integer value * 10^places.
  if (static_cast<int>(kept.size()) <= places) kept.insert(0, static_cast<std::size_t>(places) + 1 - kept.size(), '0');
  std::string int_part = kept.substr(0, kept.size() - static_cast<std::size_t>(places));
  std::string frac_part = kept.substr(kept.size() - static_cast<std::size_t>(places));
  const auto nz = int_part.find_first_not_of('0');
  int_part = nz == std::string::npos ? "0" : int_part.substr(nz);
  std::string out = int_part;
  if (places > 0) out += "." + frac_part;
  const bool zero = out.find_first_not_of("0.") == std::string::npos;
  return (negative && !zero ? "-" : "") + out;
}

}  // namespace ckg
