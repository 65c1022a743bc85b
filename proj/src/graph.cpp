#include "ckg/graph.hpp"

#include <algorithm>
#include <array>
#include <deque>

#include "ckg/error.hpp"
#include "ckg/hash.hpp"
#include "ckg/text.hpp"

namespace ckg {

namespace {

constexpr std::array kBookChain = {EntityKind::Course, EntityKind::KnowledgeUnit,
                                   EntityKind::KnowledgeChapter, EntityKind::KnowledgeBlock,
                                   EntityKind::KnowledgePoint};
constexpr std::array kSyllabusChain = {EntityKind::Course, EntityKind::TeachingContent,
                                       EntityKind::KnowledgePoint};

std::optional<std::size_t> chain_position(SourceKind source, EntityKind kind) {
  const auto chain = source_chain(source);
  const auto it = std::find(chain.begin(), chain.end(), kind);
  if (it == chain.end()) return std::nullopt;
  return static_cast<std::size_t>(it - chain.begin());
}

void merge_sorted_unique(std::vector<std::string>& into, const std::vector<std::string>& from) {
  into.insert(into.end(), from.begin(), from.end());
  std::sort(into.begin(), into.end());
  into.erase(std::unique(into.begin(), into.end()), into.end());
}

}  // namespace

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::Course: return "Course";
    case EntityKind::KnowledgeUnit: return "KnowledgeUnit";
    case EntityKind::KnowledgeChapter: return "KnowledgeChapter";
    case EntityKind::KnowledgeBlock: return "KnowledgeBlock";
    case EntityKind::TeachingContent: return "TeachingContent";
    case EntityKind::KnowledgePoint: return "KnowledgePoint";
  }
  return "KnowledgePoint";
}

EntityKind parse_entity_kind(std::string_view text) {
  for (EntityKind k : {EntityKind::Course, EntityKind::KnowledgeUnit, EntityKind::KnowledgeChapter,
                       EntityKind::KnowledgeBlock, EntityKind::TeachingContent, EntityKind::KnowledgePoint}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::ParseError, "unknown entity kind '" + std::string(text) + "'");
}

int coarseness_rank(EntityKind kind) {
  switch (kind) {
    case EntityKind::Course: return 0;
    case EntityKind::KnowledgeUnit: return 1;
    case EntityKind::TeachingContent: return 1;
    case EntityKind::KnowledgeChapter: return 2;
    case EntityKind::KnowledgeBlock: return 3;
    case EntityKind::KnowledgePoint: return 4;
  }
  return 4;
}

std::span<const EntityKind> source_chain(SourceKind source) {
  if (source == SourceKind::Syllabus) return kSyllabusChain;
  return kBookChain;
}

EntityKind heading_kind(SourceKind source, int depth) {
  const auto chain = source_chain(source);
  // chain = Course, headings..., KnowledgePoint
  if (depth < 1 || static_cast<std::size_t>(depth) + 1 >= chain.size())
    throw Error(ErrorCode::ChainViolation, std::string(to_string(source)) + " has no heading kind at depth " +
                                               std::to_string(depth));
  return chain[static_cast<std::size_t>(depth)];
}

int source_order(SourceKind source) {
  switch (source) {
    case SourceKind::Textbook: return 0;
    case SourceKind::Slide: return 1;
    case SourceKind::Syllabus: return 2;
  }
  return 3;
}

bool is_concept(const KnowledgeNode& node) {
  if (node.kind == EntityKind::KnowledgePoint) return true;
  return node.fused && node.fused->member_kinds.count(EntityKind::KnowledgePoint) != 0;
}

std::size_t total_frequency(const KnowledgeNode& node) {
  if (node.fused) return node.fused->word_frequency_total;
  return node.word_frequency.value_or(0);
}

std::string_view to_string(EdgeType type) {
  return type == EdgeType::HasPartOf ? "hasPartOf" : "equivalentTo";
}

EdgeType parse_edge_type(std::string_view text) {
  if (text == "hasPartOf") return EdgeType::HasPartOf;
  if (text == "equivalentTo") return EdgeType::EquivalentTo;
  throw Error(ErrorCode::ParseError, "unknown edge type '" + std::string(text) + "'");
}

std::string make_node_id(std::string_view course, SourceKind source, EntityKind kind,
                         std::string_view name, std::string_view locator) {
  std::string material;
  material.append(course).append("|").append(to_string(source)).append("|");
  material.append(to_string(kind)).append("|").append(name).append("|").append(locator);
  return sha256_hex(material).substr(0, 16);
}

void KnowledgeGraph::add_node(KnowledgeNode node) {
  const auto it = nodes_.find(node.id);
  if (it != nodes_.end()) {
    if (it->second == node) return;
    throw Error(ErrorCode::InvalidGraph, "conflicting definitions for node " + node.id);
  }
  name_index_[match_key(node.name)].insert(node.id);
  std::string id = node.id;
  nodes_.emplace(std::move(id), std::move(node));
}

void KnowledgeGraph::add_edge(Edge edge) {
  std::sort(edge.provenance.begin(), edge.provenance.end());
  edge.provenance.erase(std::unique(edge.provenance.begin(), edge.provenance.end()), edge.provenance.end());
  auto [it, inserted] = edges_.try_emplace(edge.key(), edge);
  if (!inserted) merge_sorted_unique(it->second.provenance, edge.provenance);
}

void KnowledgeGraph::erase_node(const std::string& id) {
  const auto it = nodes_.find(id);
  if (it == nodes_.end()) return;
  const std::string key = match_key(it->second.name);
  auto idx = name_index_.find(key);
  if (idx != name_index_.end()) {
    idx->second.erase(id);
    if (idx->second.empty()) name_index_.erase(idx);
  }
  nodes_.erase(it);
}

void KnowledgeGraph::erase_edge(const EdgeKey& key) { edges_.erase(key); }

const KnowledgeNode* KnowledgeGraph::find(std::string_view id) const {
  const auto it = nodes_.find(std::string(id));
  return it == nodes_.end() ? nullptr : &it->second;
}

std::vector<Violation> validate_graph(const KnowledgeGraph& g) {
  std::vector<Violation> out;
  auto report = [&](std::string rule, std::vector<std::string> subjects, std::string detail) {
    out.push_back({std::move(rule), std::move(subjects), std::move(detail)});
  };

  for (const auto& [id, n] : g.nodes()) {
    if (n.id != id || id.empty()) report("NodeId", {id}, "node id does not match its key");
    if (n.name.empty()) report("EmptyName", {id}, "name is empty");
    const bool heading = n.kind != EntityKind::Course && n.kind != EntityKind::KnowledgePoint;
    bool ok = true;
    switch (n.kind) {
      case EntityKind::Course:
        ok = n.course_meta.has_value() && !n.ranker && !n.level && !n.start && !n.word_frequency &&
             !n.descriptions;
        break;
      case EntityKind::KnowledgePoint:
        ok = n.ranker && *n.ranker >= 1 && n.level && n.start && n.word_frequency &&
             *n.word_frequency >= 1 && !n.course_meta;
        break;
      default:
        ok = heading && n.ranker && *n.ranker >= 1 && n.level && !n.start && !n.word_frequency &&
             !n.descriptions && !n.course_meta;
        break;
    }
    if (!ok)
      report("AttributeSet", {id}, "attributes do not match the " + std::string(to_string(n.kind)) + " set");
    if (n.fused && n.fused->fused_rank != coarseness_rank(n.kind))
      report("FusedRank", {id}, "fused rank differs from the node kind's rank");
  }

  std::map<std::string, std::vector<std::string>> children;
  for (const auto& [key, e] : g.edges()) {
    const KnowledgeNode* from = g.find(e.from);
    const KnowledgeNode* to = g.find(e.to);
    if (from == nullptr || to == nullptr) {
      report("DanglingEdge", {e.from, e.to}, std::string(to_string(e.type)) + " edge to a missing node");
      continue;
    }
    if (e.from == e.to) {
      report("SelfLoop", {e.from, e.to}, "edge from a node to itself");
      continue;
    }
    if (e.type == EdgeType::HasPartOf) {
      children[e.from].push_back(e.to);
      if (from->course != to->course) {
        report("HasPartOfCourse", {e.from, e.to}, "hasPartOf across courses");
        continue;
      }
      if (from->fused || to->fused) continue;
      const auto pf = chain_position(from->source, from->kind);
      const auto pt = chain_position(from->source, to->kind);
      if (from->source != to->source || !pf || !pt || coarseness_rank(from->kind) >= coarseness_rank(to->kind)) {
        report("ChainOrder", {e.from, e.to},
               std::string(to_string(from->kind)) + " -> " + std::string(to_string(to->kind)));
      } else if (*pt != *pf + 1 && to->kind != EntityKind::KnowledgePoint) {
        report("ChainAdjacency", {e.from, e.to}, "hasPartOf skips a level of the chain");
      }
    } else {
      if (from->kind != to->kind)
        report("EquivalentKind", {e.from, e.to}, "equivalentTo between different kinds");
      if (from->course == to->course)
        report("EquivalentCourse", {e.from, e.to}, "equivalentTo inside one course");
      if (!(e.from < e.to)) report("EquivalentOrder", {e.from, e.to}, "equivalentTo stored with from >= to");
    }
  }

  std::set<std::string> reached;
  std::deque<std::string> queue;
  for (const auto& [id, n] : g.nodes()) {
    if (n.kind == EntityKind::Course) {
      reached.insert(id);
      queue.push_back(id);
    }
  }
  while (!queue.empty()) {
    const std::string id = queue.front();
    queue.pop_front();
    const auto it = children.find(id);
    if (it == children.end()) continue;
    for (const auto& child : it->second) {
      if (reached.insert(child).second) queue.push_back(child);
    }
  }
  for (const auto& [id, n] : g.nodes()) {
    if (!reached.count(id)) report("Unreachable", {id}, "not reachable from a Course node");
  }

  std::sort(out.begin(), out.end());
  return out;
}

std::vector<KnowledgeNode> query_by_name(const KnowledgeGraph& g, std::string_view name) {
  std::vector<KnowledgeNode> out;
  const auto it = g.name_index().find(match_key(name));
  if (it == g.name_index().end()) return out;
  for (const auto& id : it->second) out.push_back(*g.find(id));
  return out;
}

}  // namespace ckg
