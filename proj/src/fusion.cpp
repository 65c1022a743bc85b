#include "ckg/fusion.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <tuple>

#include "ckg/error.hpp"
#include "ckg/text.hpp"
#include "ckg/unicode.hpp"

namespace ckg {

namespace {

using Bigrams = std::vector<std::uint64_t>;  // sorted, unique

Bigrams bigrams_of(const std::u32string& s) {
  Bigrams out;
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    out.push_back((static_cast<std::uint64_t>(s[i]) << 32) | static_cast<std::uint64_t>(s[i + 1]));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double jaccard(const Bigrams& a, const Bigrams& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++common, ++i, ++j;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

double literal_score(const std::u32string& a, const std::u32string& b, const Bigrams& ba, const Bigrams& bb) {
  if (a == b) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  const double longest = static_cast<double>(std::max(a.size(), b.size()));
  const double lev = 1.0 - static_cast<double>(edit_distance(a, b)) / longest;
  return std::max(lev, jaccard(ba, bb));
}

struct Item {
  const KnowledgeNode* node;
  std::string key;
  std::u32string key32;
  Bigrams bigrams;
};

Item make_item(const KnowledgeNode& n) {
  Item it{&n, match_key(n.name), {}, {}};
  it.key32 = unicode::decode(it.key);
  it.bigrams = bigrams_of(it.key32);
  return it;
}

bool eligible(const KnowledgeNode& n, const MatchPolicy& policy) {
  return n.kind != EntityKind::Course && policy.match_kinds.count(n.kind) != 0;
}

// Cheap upper bound: can the literal score of a and b reach the threshold?
bool literal_reachable(const Item& a, const Item& b, double threshold) {
  const double la = static_cast<double>(a.key32.size());
  const double lb = static_cast<double>(b.key32.size());
  const double longest = std::max(la, lb);
  const bool lev_possible = longest == 0 || 1.0 - std::abs(la - lb) / longest >= threshold;
  const double ba = static_cast<double>(a.bigrams.size());
  const double bb = static_cast<double>(b.bigrams.size());
  const bool jac_possible = std::max(ba, bb) > 0 && std::min(ba, bb) / std::max(ba, bb) >= threshold;
  return lev_possible || jac_possible;
}

std::optional<MatchEvidence> match_items(const Item& a, const Item& b, const MatchPolicy& policy,
                                         const SemanticScorer* semantic) {
  if (!eligible(*a.node, policy) || !eligible(*b.node, policy)) return std::nullopt;
  if (policy.exact_after_normalize && !a.key.empty() && a.key == b.key) return MatchEvidence{MatchMechanism::Exact, 1.0};
  const bool points = a.node->kind == EntityKind::KnowledgePoint && b.node->kind == EntityKind::KnowledgePoint;
  if (!points) return std::nullopt;
  if (policy.literal_enabled && literal_reachable(a, b, policy.literal_threshold)) {
    const double score = literal_score(a.key32, b.key32, a.bigrams, b.bigrams);
    if (score >= policy.literal_threshold) return MatchEvidence{MatchMechanism::Literal, score};
  }
  if (policy.semantic_enabled && semantic != nullptr && *semantic) {
    if (const auto cosine = (*semantic)(a.node->name, b.node->name); cosine && *cosine >= policy.semantic_threshold)
      return MatchEvidence{MatchMechanism::Semantic, *cosine};
  }
  return std::nullopt;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  // Returns the new root when a and b were in different sets.
  std::optional<std::size_t> unite(std::size_t a, std::size_t b) {
    a = find(a), b = find(b);
    if (a == b) return std::nullopt;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return a;
  }

 private:
  std::vector<std::size_t> parent_;
};

std::vector<const KnowledgeNode*> collect_nodes(std::span<const KnowledgeGraph> graphs) {
  std::map<std::string, const KnowledgeNode*> by_id;
  for (const auto& g : graphs) {
    for (const auto& [id, n] : g.nodes()) {
      auto [it, inserted] = by_id.try_emplace(id, &n);
      if (!inserted && !(*it->second == n))
        throw Error(ErrorCode::InvalidGraph, "conflicting definitions for node " + id);
    }
  }
  std::vector<const KnowledgeNode*> out;
  out.reserve(by_id.size());
  for (const auto& [id, n] : by_id) out.push_back(n);
  return out;
}

std::set<std::string> courses_of(std::span<const KnowledgeGraph> graphs) {
  std::set<std::string> out;
  for (const auto& g : graphs) out.insert(g.scope.courses.begin(), g.scope.courses.end());
  return out;
}

void add_scalar_attributes(const KnowledgeNode& n, std::map<std::string, std::set<std::string>>& bag) {
  bag["name"].insert(n.name);
  if (n.ranker) bag["ranker"].insert(std::to_string(*n.ranker));
  if (n.level) bag["level"].insert(std::to_string(*n.level));
  if (n.start) bag["start"].insert(std::to_string(*n.start));
  if (n.word_frequency) bag["word_frequency"].insert(std::to_string(*n.word_frequency));
  if (n.descriptions) {
    if (n.descriptions->wiki_en) bag["description_wikiE"].insert(*n.descriptions->wiki_en);
    if (n.descriptions->wiki_zh) bag["description_wikiC"].insert(*n.descriptions->wiki_zh);
    if (n.descriptions->baidu) bag["description_baidu"].insert(*n.descriptions->baidu);
  }
}

int weakness(MatchMechanism m) { return static_cast<int>(m); }

}  // namespace

void MatchPolicy::validate() const {
  const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(literal_threshold) || !in_unit(semantic_threshold))
    throw Error(ErrorCode::InvalidArgument, "match thresholds must lie in [0,1]");
}

MatchPolicy MatchPolicy::exact_only() {
  MatchPolicy p;
  p.literal_enabled = false;
  p.semantic_enabled = false;
  return p;
}

std::string_view to_string(MatchMechanism mechanism) {
  switch (mechanism) {
    case MatchMechanism::Exact: return "exact";
    case MatchMechanism::Literal: return "literal";
    case MatchMechanism::Semantic: return "semantic";
  }
  return "exact";
}

std::string normalize_name(std::string_view name) { return match_key(name); }

double literal_similarity(std::string_view a, std::string_view b) {
  const std::u32string ua = unicode::decode(a);
  const std::u32string ub = unicode::decode(b);
  return literal_score(ua, ub, bigrams_of(ua), bigrams_of(ub));
}

std::optional<MatchEvidence> match_nodes(const KnowledgeNode& a, const KnowledgeNode& b, const MatchPolicy& policy,
                                         const SemanticScorer* semantic) {
  return match_items(make_item(a), make_item(b), policy, semantic);
}

std::vector<MatchCluster> match_clusters(std::span<const KnowledgeGraph> graphs, const MatchPolicy& policy,
                                         const SemanticScorer* semantic) {
  policy.validate();
  if (!policy.exact_after_normalize && !policy.literal_enabled && !policy.semantic_enabled)
    throw Error(ErrorCode::PolicyDisabled, "exact, literal and semantic matching are all disabled");

  const bool cross_course = courses_of(graphs).size() > 1;
  const std::vector<const KnowledgeNode*> nodes = collect_nodes(graphs);
  std::vector<Item> items;
  items.reserve(nodes.size());
  for (const KnowledgeNode* n : nodes) items.push_back(make_item(*n));

  UnionFind uf(items.size());
  struct Link {
    MatchMechanism mechanism = MatchMechanism::Exact;
    double score = 1.0;
  };
  std::map<std::size_t, Link> links;  // root -> weakest link so far
  auto join = [&](std::size_t a, std::size_t b, const MatchEvidence& ev) {
    const std::size_t ra = uf.find(a);
    const std::size_t rb = uf.find(b);
    Link merged{ev.mechanism, ev.score};
    for (std::size_t r : {ra, rb}) {
      if (const auto it = links.find(r); it != links.end()) {
        merged.mechanism = weakness(it->second.mechanism) > weakness(merged.mechanism) ? it->second.mechanism
                                                                                        : merged.mechanism;
        merged.score = std::min(merged.score, it->second.score);
        links.erase(it);
      }
    }
    if (const auto root = uf.unite(ra, rb)) links[*root] = merged;
  };
  auto allowed = [&](std::size_t i, std::size_t j) {
    return eligible(*items[i].node, policy) && eligible(*items[j].node, policy) &&
           (!cross_course || items[i].node->course != items[j].node->course);
  };

  if (policy.exact_after_normalize) {
    std::map<std::string, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (eligible(*items[i].node, policy) && !items[i].key.empty()) buckets[items[i].key].push_back(i);
    }
    for (const auto& [key, members] : buckets) {
      for (std::size_t x = 0; x < members.size(); ++x) {
        for (std::size_t y = x + 1; y < members.size(); ++y) {
          if (allowed(members[x], members[y]) && uf.find(members[x]) != uf.find(members[y]))
            join(members[x], members[y], {MatchMechanism::Exact, 1.0});
        }
      }
    }
  }

  if (policy.literal_enabled || policy.semantic_enabled) {
    std::vector<std::size_t> points;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (items[i].node->kind == EntityKind::KnowledgePoint && eligible(*items[i].node, policy)) points.push_back(i);
    }
    MatchPolicy fuzzy = policy;
    fuzzy.exact_after_normalize = false;
    for (std::size_t x = 0; x < points.size(); ++x) {
      for (std::size_t y = x + 1; y < points.size(); ++y) {
        const std::size_t i = points[x];
        const std::size_t j = points[y];
        if (!allowed(i, j) || uf.find(i) == uf.find(j)) continue;
        if (const auto ev = match_items(items[i], items[j], fuzzy, semantic)) join(i, j, *ev);
      }
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < items.size(); ++i) components[uf.find(i)].push_back(i);

  std::vector<MatchCluster> clusters;
  for (const auto& [root, members] : components) {
    if (members.size() < 2) continue;
    MatchCluster c;
    const KnowledgeNode* rep = nullptr;
    for (std::size_t i : members) {
      const KnowledgeNode& n = *items[i].node;
      c.members.push_back(n.id);
      c.levels.push_back(coarseness_rank(n.kind));
      if (rep == nullptr || std::tuple(coarseness_rank(n.kind), source_order(n.source), n.id) <
                                std::tuple(coarseness_rank(rep->kind), source_order(rep->source), rep->id))
        rep = &n;
    }
    c.representative = rep->id;
    c.fused_rank = coarseness_rank(rep->kind);
    const Link link = links.at(root);
    c.mechanism = link.mechanism;
    c.score = link.score;
    clusters.push_back(std::move(c));
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const MatchCluster& a, const MatchCluster& b) { return a.members.front() < b.members.front(); });
  return clusters;
}

KnowledgeGraph fuse_same_course(std::span<const KnowledgeGraph> graphs, const MatchPolicy& policy,
                                const SemanticScorer* semantic, std::vector<MatchCluster>* clusters_out) {
  const std::set<std::string> courses = courses_of(graphs);
  if (courses.size() > 1) throw Error(ErrorCode::CrossCourseInput, "fuse_same_course given several courses");
  for (const auto& g : graphs) {
    const auto violations = validate_graph(g);
    if (!violations.empty())
      throw Error(ErrorCode::InvalidGraph, violations.front().rule + ": " + violations.front().detail);
  }

  std::vector<MatchCluster> clusters = match_clusters(graphs, policy, semantic);
  const std::vector<const KnowledgeNode*> nodes = collect_nodes(graphs);
  std::map<std::string, const KnowledgeNode*> by_id;
  for (const KnowledgeNode* n : nodes) by_id.emplace(n->id, n);

  std::map<std::string, std::string> rep_of;
  KnowledgeGraph out;
  for (const auto& c : clusters) {
    const KnowledgeNode& rep = *by_id.at(c.representative);
    KnowledgeNode fused = rep;
    FusedAttributes attrs;
    std::set<std::string> members;
    std::set<Provenance> provenance;
    for (const auto& id : c.members) {
      rep_of[id] = c.representative;
      const KnowledgeNode& m = *by_id.at(id);
      provenance.insert(m.provenance.begin(), m.provenance.end());
      attrs.word_frequency_total += total_frequency(m);
      if (m.fused) {
        members.insert(m.fused->members.begin(), m.fused->members.end());
        attrs.member_kinds.insert(m.fused->member_kinds.begin(), m.fused->member_kinds.end());
        for (const auto& [name, values] : m.fused->bag) attrs.bag[name].insert(values.begin(), values.end());
      } else {
        members.insert(m.id);
        attrs.member_kinds.insert(m.kind);
        add_scalar_attributes(m, attrs.bag);
      }
    }
    attrs.members.assign(members.begin(), members.end());
    attrs.fused_rank = coarseness_rank(rep.kind);
    fused.fused = std::move(attrs);
    fused.provenance.assign(provenance.begin(), provenance.end());
    out.add_node(std::move(fused));
  }
  for (const KnowledgeNode* n : nodes) {
    if (!rep_of.count(n->id)) out.add_node(*n);
  }
  auto rep = [&](const std::string& id) {
    const auto it = rep_of.find(id);
    return it == rep_of.end() ? id : it->second;
  };
  for (const auto& g : graphs) {
    for (const auto& [key, e] : g.edges()) {
      Edge rewired{rep(e.from), rep(e.to), e.type, e.provenance};
      if (rewired.from == rewired.to) continue;
      out.add_edge(std::move(rewired));
    }
    out.scope.courses.insert(g.scope.courses.begin(), g.scope.courses.end());
    out.scope.sources.insert(g.scope.sources.begin(), g.scope.sources.end());
  }
  if (clusters_out != nullptr) *clusters_out = std::move(clusters);
  return out;
}

KnowledgeGraph link_cross_course(std::span<const KnowledgeGraph> graphs, const MatchPolicy& policy,
                                 const SemanticScorer* semantic) {
  policy.validate();
  std::set<std::string> seen;
  for (const auto& g : graphs) {
    for (const auto& c : g.scope.courses) {
      if (!seen.insert(c).second) throw Error(ErrorCode::SameCourseInput, "course '" + c + "' appears twice");
    }
  }

  KnowledgeGraph out;
  for (const auto& g : graphs) {
    for (const auto& [id, n] : g.nodes()) out.add_node(n);
    for (const auto& [key, e] : g.edges()) out.add_edge(e);
    out.scope.courses.insert(g.scope.courses.begin(), g.scope.courses.end());
    out.scope.sources.insert(g.scope.sources.begin(), g.scope.sources.end());
  }

  std::vector<Item> items;
  for (const auto& [id, n] : out.nodes()) {
    if (eligible(n, policy)) items.push_back(make_item(n));
  }
  auto link = [&](const Item& a, const Item& b) {
    std::vector<std::string> prov{std::string(to_string(a.node->source)), std::string(to_string(b.node->source))};
    const auto& [from, to] = std::minmax(a.node->id, b.node->id);
    out.add_edge({from, to, EdgeType::EquivalentTo, std::move(prov)});
  };
  auto pairable = [](const Item& a, const Item& b) {
    return a.node->course != b.node->course && a.node->kind == b.node->kind;
  };

  if (!policy.literal_enabled && !policy.semantic_enabled) {
    if (!policy.exact_after_normalize) return out;
    std::map<std::string, std::vector<const Item*>> buckets;
    for (const auto& it : items) {
      if (!it.key.empty()) buckets[it.key].push_back(&it);
    }
    for (const auto& [key, bucket] : buckets) {
      for (std::size_t x = 0; x < bucket.size(); ++x) {
        for (std::size_t y = x + 1; y < bucket.size(); ++y) {
          if (pairable(*bucket[x], *bucket[y])) link(*bucket[x], *bucket[y]);
        }
      }
    }
    return out;
  }

  for (std::size_t x = 0; x < items.size(); ++x) {
    for (std::size_t y = x + 1; y < items.size(); ++y) {
      if (!pairable(items[x], items[y])) continue;
      if (match_items(items[x], items[y], policy, semantic)) link(items[x], items[y]);
    }
  }
  return out;
}

}  // namespace ckg
