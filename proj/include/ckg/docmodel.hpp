#pragma once

// Course documents in the canonical outline format:
//
//   ---
//   name: Communication Principles
//   school_term: 2022 Autumn
//   coursePrerequisites: Signals and Systems; Linear Algebra
//   ---
//   # Unit title            (or "1. Unit title")
//   ## Chapter title        (or "1.2 Chapter title")
//   ### Block title         (or "1.2.3 Block title")
//   free body text ...
//
// Heading recognition is driven by HeadingRules; the first rule whose
// pattern matches a line wins.

#include <cstddef>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace ckg {

enum class SourceKind { Textbook, Slide, Syllabus };

std::string_view to_string(SourceKind kind);
SourceKind parse_source_kind(std::string_view text);

/// Deepest heading level a source kind supports (3 for textbook/slide, 1 for
/// syllabus).
int max_heading_depth(SourceKind kind);

struct CourseMeta {
  std::string school_term;
  std::string name;
  std::string background;
  std::string url;
  std::vector<std::string> course_prerequisites;
  std::vector<std::string> educational_alignments;

  bool operator==(const CourseMeta&) const = default;
};

struct Locator {
  std::string path;
  std::size_t line = 0;  // 1-based

  bool operator==(const Locator&) const = default;
  std::string str() const;
};

/// Body text owned by one heading: the lines between it and the next heading.
/// Offsets are absolute scalar-value offsets into the document.
struct BodySpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t first_line = 0;
  std::string text;

  bool operator==(const BodySpan&) const = default;
};

struct Heading {
  std::string title;
  int depth = 1;
  std::size_t ordinal = 1;
  Locator locator;
  std::optional<std::size_t> parent;  // index into DocumentTree::headings
  BodySpan body;

  bool operator==(const Heading&) const = default;
};

/// Headings are stored in document order; a heading's index is its id.
struct DocumentTree {
  CourseMeta meta;
  SourceKind source = SourceKind::Textbook;
  std::vector<Heading> headings;

  bool operator==(const DocumentTree&) const = default;

  std::vector<std::size_t> children(std::optional<std::size_t> parent) const;
};

struct HeadingRule {
  int depth = 1;
  std::string pattern;  // ECMAScript regex; capture group 1 is the title
  std::regex regex;
};

struct HeadingRules {
  std::vector<HeadingRule> rules;

  void add(int depth, std::string pattern);
  /// Throws Error(InvalidRules) unless every depth 1..max_heading_depth(kind)
  /// has a pattern and no rule exceeds that depth.
  void validate_for(SourceKind kind) const;
};

/// Markdown `#`/`##`/`###` and dotted numeric `1.`/`1.2`/`1.2.3` patterns,
/// truncated to the depths the source kind allows.
HeadingRules default_heading_rules(SourceKind kind);

/// Parses the leading `---` delimited `key: value` block. List-valued keys
/// (coursePrerequisites, educationalAlignments) are `;` separated.
CourseMeta parse_front_matter(std::string_view text);

struct ParseOptions {
  SourceKind source = SourceKind::Textbook;
  std::string path;
  /// Used when the document has no front matter.
  std::string fallback_course_name;
};

DocumentTree parse_course_document(std::string_view text, const HeadingRules& rules,
                                   const ParseOptions& options);

/// Canonical outline text: full front matter, then markdown-style headings
/// with their bodies. Parsing the result with default rules reproduces the
/// tree structure.
std::string to_outline(const DocumentTree& tree);

/// Stage artifact form of a parsed document.
std::string document_tree_to_json(const DocumentTree& tree);
DocumentTree document_tree_from_json(std::string_view text);

}  // namespace ckg
