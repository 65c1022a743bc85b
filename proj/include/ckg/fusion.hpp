#pragma once

#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ckg/graph.hpp"

namespace ckg {

struct MatchPolicy {
  bool exact_after_normalize = true;
  bool literal_enabled = true;
  double literal_threshold = 0.90;
  bool semantic_enabled = false;
  double semantic_threshold = 0.85;
  std::set<EntityKind> match_kinds = {EntityKind::KnowledgeUnit, EntityKind::KnowledgeChapter,
                                      EntityKind::KnowledgeBlock, EntityKind::TeachingContent,
                                      EntityKind::KnowledgePoint};

  /// Throws InvalidArgument for thresholds outside [0,1].
  void validate() const;
  /// Exact matching only; the default for cross-course linking.
  static MatchPolicy exact_only();
};

enum class MatchMechanism { Exact, Literal, Semantic };

std::string_view to_string(MatchMechanism mechanism);

/// Cosine similarity of two names, or nullopt when the provider is
/// unavailable.
using SemanticScorer = std::function<std::optional<double>(std::string_view, std::string_view)>;

struct MatchEvidence {
  MatchMechanism mechanism = MatchMechanism::Exact;
  double score = 1.0;
};

struct MatchCluster {
  std::vector<std::string> members;  // sorted ids
  std::vector<int> levels;           // coarseness rank per member, same order
  std::string representative;
  int fused_rank = 0;
  MatchMechanism mechanism = MatchMechanism::Exact;  // weakest link used
  double score = 1.0;                                // lowest link score

  bool operator==(const MatchCluster&) const = default;
};

/// normalize_text + case fold + trailing punctuation removed.
std::string normalize_name(std::string_view name);

/// max(1 - levenshtein/max_len, jaccard of character bigram sets).
double literal_similarity(std::string_view a, std::string_view b);

/// Whether two nodes denote the same concept under the policy. Course nodes
/// and kinds outside match_kinds never match; heading kinds match only on
/// equal keys; literal and semantic matching apply to KnowledgePoint pairs.
std::optional<MatchEvidence> match_nodes(const KnowledgeNode& a, const KnowledgeNode& b,
                                         const MatchPolicy& policy,
                                         const SemanticScorer* semantic = nullptr);

/// Union-find clusters of size >= 2 over all nodes of the input graphs. When
/// the graphs span several courses, only nodes of different courses join.
/// Throws PolicyDisabled if no mechanism is enabled.
std::vector<MatchCluster> match_clusters(std::span<const KnowledgeGraph> graphs,
                                         const MatchPolicy& policy,
                                         const SemanticScorer* semantic = nullptr);

/// Merges each cluster into its coarsest member with attribute union and
/// rewired edges. Throws CrossCourseInput when the graphs' courses differ.
KnowledgeGraph fuse_same_course(std::span<const KnowledgeGraph> graphs, const MatchPolicy& policy,
                                const SemanticScorer* semantic = nullptr,
                                std::vector<MatchCluster>* clusters_out = nullptr);

/// Union of single-course graphs plus one equivalentTo edge (from < to) per
/// matching cross-course node pair of equal kind. Throws SameCourseInput if
/// two inputs share a course.
KnowledgeGraph link_cross_course(std::span<const KnowledgeGraph> graphs, const MatchPolicy& policy,
                                 const SemanticScorer* semantic = nullptr);

}  // namespace ckg
