#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "ckg/docmodel.hpp"

namespace ckg {

enum class EntityKind {
  Course,
  KnowledgeUnit,
  KnowledgeChapter,
  KnowledgeBlock,
  TeachingContent,
  KnowledgePoint,
};

std::string_view to_string(EntityKind kind);
EntityKind parse_entity_kind(std::string_view text);

/// Lower is coarser. KnowledgeUnit and TeachingContent share rank 1.
int coarseness_rank(EntityKind kind);

/// Top-down hasPartOf chain for a source kind.
std::span<const EntityKind> source_chain(SourceKind source);

/// Entity kind of a heading at `depth` (1-based). Throws ChainViolation when
/// the chain has no heading kind at that depth.
EntityKind heading_kind(SourceKind source, int depth);

/// Deterministic order used for representative tie-breaks.
int source_order(SourceKind source);

struct Descriptions {
  std::optional<std::string> wiki_en;
  std::optional<std::string> wiki_zh;
  std::optional<std::string> baidu;

  bool operator==(const Descriptions&) const = default;
};

/// Course-only attributes besides name and url.
struct CourseAttributes {
  std::string school_term;
  std::string background;
  std::vector<std::string> course_prerequisites;
  std::vector<std::string> educational_alignments;

  bool operator==(const CourseAttributes&) const = default;
};

struct Provenance {
  SourceKind source = SourceKind::Textbook;
  std::string locator;

  auto operator<=>(const Provenance&) const = default;
  bool operator==(const Provenance&) const = default;
};

/// Attribute union of a fused cluster. `bag` holds, per attribute name, the
/// set of values (rendered as text) carried by the members; url is never in
/// the bag.
struct FusedAttributes {
  std::vector<std::string> members;
  std::set<EntityKind> member_kinds;
  int fused_rank = 0;
  std::map<std::string, std::set<std::string>> bag;
  std::size_t word_frequency_total = 0;

  bool operator==(const FusedAttributes&) const = default;
};

struct KnowledgeNode {
  std::string id;
  EntityKind kind = EntityKind::KnowledgePoint;
  std::string name;
  std::optional<std::size_t> ranker;
  std::optional<std::size_t> level;
  std::string url;
  std::optional<std::size_t> start;
  std::optional<std::size_t> word_frequency;
  std::optional<Descriptions> descriptions;
  std::optional<CourseAttributes> course_meta;
  std::string course;
  SourceKind source = SourceKind::Textbook;
  std::vector<Provenance> provenance;
  std::optional<FusedAttributes> fused;

  bool operator==(const KnowledgeNode&) const = default;
};

/// KnowledgePoint, or a fused node with at least one KnowledgePoint member.
bool is_concept(const KnowledgeNode& node);

/// word_frequency_total for fused nodes, word_frequency otherwise.
std::size_t total_frequency(const KnowledgeNode& node);

enum class EdgeType { HasPartOf, EquivalentTo };

std::string_view to_string(EdgeType type);
EdgeType parse_edge_type(std::string_view text);

struct EdgeKey {
  std::string from;
  std::string to;
  EdgeType type = EdgeType::HasPartOf;

  auto operator<=>(const EdgeKey&) const = default;
  bool operator==(const EdgeKey&) const = default;
};

struct Edge {
  std::string from;
  std::string to;
  EdgeType type = EdgeType::HasPartOf;
  std::vector<std::string> provenance;  // sorted, unique source tags

  EdgeKey key() const { return {from, to, type}; }
  bool operator==(const Edge&) const = default;
};

struct Scope {
  std::set<std::string> courses;
  std::set<SourceKind> sources;

  bool operator==(const Scope&) const = default;
};

/// Content-derived node id: first 16 hex digits of
/// sha256(course|source|kind|name|locator).
std::string make_node_id(std::string_view course, SourceKind source, EntityKind kind,
                         std::string_view name, std::string_view locator);

class KnowledgeGraph {
 public:
  using NodeMap = std::map<std::string, KnowledgeNode>;
  using EdgeMap = std::map<EdgeKey, Edge>;

  /// Throws InvalidGraph if a different node already has this id; adding an
  /// identical node again is a no-op.
  void add_node(KnowledgeNode node);

  /// Duplicate (from,to,type) edges collapse with provenance merged.
  void add_edge(Edge edge);

  /// Removes the node only; incident edges are left in place.
  void erase_node(const std::string& id);
  void erase_edge(const EdgeKey& key);

  const NodeMap& nodes() const { return nodes_; }
  const EdgeMap& edges() const { return edges_; }
  const KnowledgeNode* find(std::string_view id) const;

  /// match_key(name) -> ids, ids sorted.
  const std::map<std::string, std::set<std::string>>& name_index() const { return name_index_; }

  Scope scope;

  bool operator==(const KnowledgeGraph& other) const {
    return nodes_ == other.nodes_ && edges_ == other.edges_ && scope == other.scope;
  }

 private:
  NodeMap nodes_;
  EdgeMap edges_;
  std::map<std::string, std::set<std::string>> name_index_;
};

struct Violation {
  std::string rule;
  std::vector<std::string> subjects;  // node ids, or from/to for edges
  std::string detail;

  auto operator<=>(const Violation&) const = default;
  bool operator==(const Violation&) const = default;
};

/// Checks attribute presence per kind, edge endpoints, the hasPartOf chain,
/// equivalentTo shape and reachability from Course nodes. Edges touching a
/// fused node are exempt from the chain-adjacency rule since fusion rewires
/// them across levels. Result is sorted.
std::vector<Violation> validate_graph(const KnowledgeGraph& g);

/// Nodes whose match key equals the query's, in id order.
std::vector<KnowledgeNode> query_by_name(const KnowledgeGraph& g, std::string_view name);

}  // namespace ckg
