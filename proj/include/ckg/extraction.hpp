#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ckg/docmodel.hpp"
#include "ckg/graph.hpp"

namespace ckg {

struct GazetteerEntry {
  std::string term;
  std::vector<std::string> aliases;
  Descriptions descriptions;

  bool operator==(const GazetteerEntry&) const = default;
};

/// Canonical terms keyed by match key.
class Gazetteer {
 public:
  /// One record per line: term TAB aliases(;-separated) [TAB wikiE [TAB wikiC
  /// [TAB baidu]]]. Blank lines and lines starting with '#' are skipped.
  static Gazetteer parse(std::string_view text);

  /// Throws DuplicateTerm if the term's match key is already present.
  void add(GazetteerEntry entry);

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, GazetteerEntry>& entries() const { return entries_; }
  const GazetteerEntry* find(std::string_view term) const;

 private:
  std::map<std::string, GazetteerEntry> entries_;
};

struct TermRule {
  std::string pattern;  // ECMAScript; group 1 (or whole match) is the term
  std::regex regex;
};

struct ExtractionRules {
  std::vector<TermRule> term_patterns;

  void add(std::string pattern);
};

struct TermOccurrence {
  std::string term;
  std::size_t heading = 0;  // index into DocumentTree::headings
  std::size_t offset = 0;   // absolute scalar offset in the source document

  bool operator==(const TermOccurrence&) const = default;
};

/// Gazetteer and rule matches over every heading body. Matching runs on
/// normalized, case-folded text; a match may not continue an ASCII word on
/// either side. Among overlapping candidates the leftmost wins, and at equal
/// start the longest. Result ordered by offset.
std::vector<TermOccurrence> extract_knowledge_points(const DocumentTree& tree,
                                                     const Gazetteer& gazetteer,
                                                     const ExtractionRules& rules);

struct TermStats {
  std::size_t word_frequency = 0;
  std::size_t start = 0;

  bool operator==(const TermStats&) const = default;
};

std::map<std::string, TermStats> compute_term_stats(std::span<const TermOccurrence> occurrences);

/// Course node, one node per heading, and one KnowledgePoint per distinct
/// (term, heading) attached under that heading. Descriptions are copied from
/// the gazetteer when given.
KnowledgeGraph build_course_graph(const DocumentTree& tree,
                                  std::span<const TermOccurrence> occurrences,
                                  const Gazetteer* gazetteer = nullptr);

}  // namespace ckg
