#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ckg/analytics.hpp"
#include "ckg/graph.hpp"

namespace ckg {

enum class ExportFormat { CypherScript, GraphJson, GraphML, Dot, Csv };

std::string_view to_string(ExportFormat format);
ExportFormat parse_export_format(std::string_view text);

struct ExportProfile {
  ExportFormat format = ExportFormat::GraphJson;
  std::string path;
  std::map<std::string, std::string> options;

  /// Throws ConfigError for options the format does not understand or bad
  /// values. Known: include_provenance=true|false (Cypher, GraphML).
  void validate() const;
  bool flag(std::string_view name, bool fallback) const;
};

/// Idempotent import script: one MERGE per node, then one
/// MATCH ... MERGE per edge, ids ascending. Throws InvalidGraph.
std::string emit_cypher(const KnowledgeGraph& g, bool include_provenance = true);

/// Single-quoted openCypher string literal.
std::string cypher_quote(std::string_view text);

/// Canonical JSON (sorted keys, two-space indent, trailing newline).
std::string emit_graph_json(const KnowledgeGraph& g);
KnowledgeGraph load_graph_json(std::string_view text);

std::string emit_graphml(const KnowledgeGraph& g, bool include_provenance = true);

/// Undirected weight graph; penwidth = 1 + 6 * weight.
std::string emit_weight_graph_dot(std::span<const std::string> courses,
                                  std::span<const WeightEdge> edges);

enum class ColumnType { Text, Number, Integer };

struct Column {
  std::string name;
  ColumnType type = ColumnType::Text;
  bool nullable = false;
};

using Cell = std::variant<std::monostate, std::string, double, std::int64_t>;
using Row = std::vector<Cell>;

/// RFC 4180 CSV with a header row; numbers at 5 decimals. Throws
/// SchemaMismatch when a row does not fit the schema.
std::string emit_report_csv(std::span<const Row> rows, std::span<const Column> schema);

/// Decimal rendering rounded half away from zero. The value is first taken to
/// 12 significant digits so binary noise cannot flip the last place.
std::string format_decimal(double value, int places = 5);

}  // namespace ckg
