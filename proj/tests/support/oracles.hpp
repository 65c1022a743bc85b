#pragma once

// Independent reference implementations used to check the library. They trade
// speed for obviousness: brute-force scans, full closures, plain DP tables.

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ckg/docmodel.hpp"
#include "ckg/extraction.hpp"
#include "ckg/fusion.hpp"
#include "ckg/graph.hpp"

namespace ckg::oracle {

/// Textbook Wagner-Fischer with a full (n+1)x(m+1) table.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// 1 - lev/max_len or bigram Jaccard, whichever is larger.
double literal_similarity(std::string_view a, std::string_view b);

/// Gazetteer matches found by trying every surface form at every position,
/// then keeping leftmost-longest non-overlapping matches.
std::vector<TermOccurrence> scan_occurrences(const DocumentTree& tree, const Gazetteer& gazetteer);

/// Occurrence count per term, counted per heading body with std::string::find
/// over the folded text (no overlap handling; use with terms that never nest).
std::map<std::string, std::size_t> recount(const DocumentTree& tree, const Gazetteer& gazetteer);

/// All-pairs match relation closed by fixpoint relabelling, then merged
/// exactly as the fusion contract states.
KnowledgeGraph fuse(std::span<const KnowledgeGraph> graphs, const MatchPolicy& policy);

/// Cluster id (smallest member id) per node id, from the same all-pairs
/// closure.
std::map<std::string, std::string> representatives(std::span<const KnowledgeGraph> graphs,
                                                   const MatchPolicy& policy);

/// Re-parses a Cypher script line by line under the statement grammar the
/// exporter promises. Returns {node statements, edge statements}; throws
/// std::runtime_error naming the offending line.
std::pair<std::size_t, std::size_t> parse_cypher(std::string_view script);

/// RFC 4180 reader (quoted fields, doubled quotes, embedded newlines).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Violations recomputed by rescanning edges for the chain rules only.
std::size_t chain_violations(const KnowledgeGraph& g);

}  // namespace ckg::oracle
