#include "ckg/extraction.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "ckg/error.hpp"
#include "ckg/text.hpp"
#include "ckg/unicode.hpp"

namespace ckg {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    out.emplace_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::optional<std::string> optional_field(const std::vector<std::string>& fields, std::size_t i) {
  if (i >= fields.size()) return std::nullopt;
  std::string v = normalize_text(fields[i]);
  if (v.empty()) return std::nullopt;
  return v;
}

bool ascii_alnum(char32_t c) {
  return (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
}

// Byte trie over case-folded surface forms.
class SurfaceTrie {
 public:
  void insert(const std::string& surface, const std::string& term) {
    std::size_t node = 0;
    for (char c : surface) {
      auto& next = nodes_[node].next;
      const auto it = next.find(c);
      if (it == next.end()) {
        nodes_.emplace_back();
        next_of(node)[c] = nodes_.size() - 1;
        node = nodes_.size() - 1;
      } else {
        node = it->second;
      }
    }
    if (!nodes_[node].term) nodes_[node].term = term;
  }

  // Calls fn(end_byte, term) for every surface starting at `begin`.
  template <typename Fn>
  void walk(const std::string& text, std::size_t begin, Fn&& fn) const {
    std::size_t node = 0;
    for (std::size_t i = begin; i < text.size(); ++i) {
      const auto& next = nodes_[node].next;
      const auto it = next.find(text[i]);
      if (it == next.end()) return;
      node = it->second;
      if (nodes_[node].term) fn(i + 1, *nodes_[node].term);
    }
  }

 private:
  struct Node {
    std::map<char, std::size_t> next;
    std::optional<std::string> term;
  };
  std::map<char, std::size_t>& next_of(std::size_t node) { return nodes_[node].next; }
  std::vector<Node> nodes_{1};
};

struct Candidate {
  std::size_t begin;  // normalized scalar index
  std::size_t end;
  std::string term;
};

// Scalar index of every byte of a UTF-8 string, plus one past the end.
std::vector<std::size_t> scalar_index(const std::string& text) {
  std::vector<std::size_t> idx(text.size() + 1);
  std::size_t scalar = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80 && i != 0) ++scalar;
    idx[i] = scalar;
  }
  idx[text.size()] = text.empty() ? 0 : scalar + 1;
  return idx;
}

}  // namespace

Gazetteer Gazetteer::parse(std::string_view text) {
  if (!unicode::is_valid(text)) throw Error(ErrorCode::MalformedGazetteer, "gazetteer is not valid UTF-8");
  Gazetteer g;
  std::size_t line_no = 0;
  for (std::string line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (normalize_text(line).empty() || line.front() == '#') continue;
    const std::vector<std::string> fields = split(line, '\t');
    GazetteerEntry entry;
    entry.term = normalize_text(fields[0]);
    if (entry.term.empty())
      throw Error(ErrorCode::MalformedGazetteer, "line " + std::to_string(line_no) + ": empty term");
    if (fields.size() > 5)
      throw Error(ErrorCode::MalformedGazetteer, "line " + std::to_string(line_no) + ": too many fields");
    if (fields.size() > 1) {
      for (const auto& alias : split(fields[1], ';')) {
        std::string a = normalize_text(alias);
        if (!a.empty()) entry.aliases.push_back(std::move(a));
      }
    }
    entry.descriptions.wiki_en = optional_field(fields, 2);
    entry.descriptions.wiki_zh = optional_field(fields, 3);
    entry.descriptions.baidu = optional_field(fields, 4);
    g.add(std::move(entry));
  }
  return g;
}

void Gazetteer::add(GazetteerEntry entry) {
  entry.term = normalize_text(entry.term);
  const std::string key = match_key(entry.term);
  if (key.empty()) throw Error(ErrorCode::MalformedGazetteer, "empty gazetteer term");
  if (entries_.count(key)) throw Error(ErrorCode::DuplicateTerm, "duplicate gazetteer term '" + entry.term + "'");
  for (auto& alias : entry.aliases) {
    alias = normalize_text(alias);
    if (alias.empty()) throw Error(ErrorCode::MalformedGazetteer, "empty alias for '" + entry.term + "'");
  }
  entries_.emplace(key, std::move(entry));
}

const GazetteerEntry* Gazetteer::find(std::string_view term) const {
  const auto it = entries_.find(match_key(term));
  return it == entries_.end() ? nullptr : &it->second;
}

void ExtractionRules::add(std::string pattern) {
  try {
    std::regex re(pattern, std::regex::ECMAScript);
    term_patterns.push_back({std::move(pattern), std::move(re)});
  } catch (const std::regex_error& e) {
    throw Error(ErrorCode::InvalidRules, "bad term pattern '" + pattern + "': " + e.what());
  }
}

std::vector<TermOccurrence> extract_knowledge_points(const DocumentTree& tree, const Gazetteer& gazetteer,
                                                     const ExtractionRules& rules) {
  SurfaceTrie trie;
  for (const auto& [key, entry] : gazetteer.entries()) {
    trie.insert(fold_case(entry.term), entry.term);
    for (const auto& alias : entry.aliases) trie.insert(fold_case(alias), entry.term);
  }

  std::vector<TermOccurrence> out;
  for (std::size_t h = 0; h < tree.headings.size(); ++h) {
    const BodySpan& body = tree.headings[h].body;
    if (body.text.empty()) continue;
    const MappedText normalized = normalize_mapped(body.text, body.begin);
    if (normalized.text.empty()) continue;
    const MappedText folded = fold_case_mapped(normalized);
    const std::u32string scalars = unicode::decode(folded.text);
    const std::vector<std::size_t> folded_idx = scalar_index(folded.text);
    const std::vector<std::size_t> norm_idx = scalar_index(normalized.text);
    std::vector<std::size_t> origin_of_scalar(scalars.size());
    for (std::size_t b = 0; b < normalized.text.size(); ++b) origin_of_scalar[norm_idx[b]] = normalized.origin[b];

    std::vector<Candidate> candidates;
    for (std::size_t b = 0; b < folded.text.size(); ++b) {
      if ((static_cast<unsigned char>(folded.text[b]) & 0xC0) == 0x80) continue;
      const std::size_t begin = folded_idx[b];
      trie.walk(folded.text, b, [&](std::size_t end_byte, const std::string& term) {
        const std::size_t end = folded_idx[end_byte];
        if (end_byte < folded.text.size() && (static_cast<unsigned char>(folded.text[end_byte]) & 0xC0) == 0x80)
          return;
        if (begin > 0 && ascii_alnum(scalars[begin - 1]) && ascii_alnum(scalars[begin])) return;
        if (end < scalars.size() && ascii_alnum(scalars[end]) && ascii_alnum(scalars[end - 1])) return;
        candidates.push_back({begin, end, term});
      });
    }

    for (const auto& rule : rules.term_patterns) {
      auto it = std::sregex_iterator(normalized.text.begin(), normalized.text.end(), rule.regex);
      for (; it != std::sregex_iterator(); ++it) {
        const std::smatch& m = *it;
        const int group = m.size() > 1 && m[1].matched ? 1 : 0;
        const std::string raw = m[group].str();
        if (raw.empty()) continue;
        const std::size_t b = static_cast<std::size_t>(m.position(group));
        const std::size_t e = b + static_cast<std::size_t>(m.length(group));
        std::string term = normalize_text(raw);
        if (const GazetteerEntry* entry = gazetteer.find(term)) term = entry->term;
        if (term.empty()) continue;
        candidates.push_back({norm_idx[b], norm_idx[e], std::move(term)});
      }
    }

    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      return std::tuple(a.begin, b.end, a.term) < std::tuple(b.begin, a.end, b.term);
    });
    std::size_t covered = 0;
    bool any = false;
    for (const auto& c : candidates) {
      if (any && c.begin < covered) continue;
      out.push_back({c.term, h, origin_of_scalar[c.begin]});
      covered = c.end;
      any = true;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const TermOccurrence& a, const TermOccurrence& b) {
    return a.offset < b.offset;
  });
  return out;
}

std::map<std::string, TermStats> compute_term_stats(std::span<const TermOccurrence> occurrences) {
  std::map<std::string, TermStats> stats;
  for (const auto& occ : occurrences) {
    auto [it, inserted] = stats.try_emplace(occ.term, TermStats{0, occ.offset});
    it->second.word_frequency += 1;
    it->second.start = std::min(it->second.start, occ.offset);
  }
  return stats;
}

KnowledgeGraph build_course_graph(const DocumentTree& tree, std::span<const TermOccurrence> occurrences,
                                  const Gazetteer* gazetteer) {
  const std::string& course = tree.meta.name;
  const std::string source_tag(to_string(tree.source));
  const std::string path = tree.headings.empty() ? std::string() : tree.headings.front().locator.path;

  KnowledgeGraph g;
  g.scope.courses.insert(course);
  g.scope.sources.insert(tree.source);

  KnowledgeNode root;
  root.id = make_node_id(course, tree.source, EntityKind::Course, course, path);
  root.kind = EntityKind::Course;
  root.name = course;
  root.url = tree.meta.url;
  root.course_meta = CourseAttributes{tree.meta.school_term, tree.meta.background,
                                      tree.meta.course_prerequisites, tree.meta.educational_alignments};
  root.course = course;
  root.source = tree.source;
  root.provenance = {{tree.source, path}};
  const std::string root_id = root.id;
  g.add_node(std::move(root));

  std::vector<std::string> heading_ids;
  heading_ids.reserve(tree.headings.size());
  for (const auto& h : tree.headings) {
    KnowledgeNode n;
    n.kind = heading_kind(tree.source, h.depth);
    n.name = h.title;
    n.url = h.locator.str();
    n.id = make_node_id(course, tree.source, n.kind, n.name, n.url);
    n.ranker = h.ordinal;
    n.level = static_cast<std::size_t>(h.depth);
    n.course = course;
    n.source = tree.source;
    n.provenance = {{tree.source, n.url}};
    heading_ids.push_back(n.id);
    const std::string parent = h.parent ? heading_ids.at(*h.parent) : root_id;
    g.add_edge({parent, n.id, EdgeType::HasPartOf, {source_tag}});
    g.add_node(std::move(n));
  }

  // (heading, term) -> occurrences, in first-occurrence order per heading.
  struct Group {
    std::size_t first_offset;
    std::size_t count;
  };
  std::map<std::size_t, std::vector<std::pair<std::string, Group>>> per_heading;
  for (const auto& occ : occurrences) {
    if (occ.heading >= tree.headings.size())
      throw Error(ErrorCode::InvalidArgument, "occurrence refers to heading " + std::to_string(occ.heading));
    auto& groups = per_heading[occ.heading];
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g2) { return g2.first == occ.term; });
    if (it == groups.end()) {
      groups.push_back({occ.term, {occ.offset, 1}});
    } else {
      it->second.first_offset = std::min(it->second.first_offset, occ.offset);
      it->second.count += 1;
    }
  }

  for (auto& [h, groups] : per_heading) {
    std::stable_sort(groups.begin(), groups.end(),
                     [](const auto& a, const auto& b) { return a.second.first_offset < b.second.first_offset; });
    const Heading& heading = tree.headings[h];
    const std::u32string body = unicode::decode(heading.body.text);
    std::size_t ranker = 0;
    for (const auto& [term, group] : groups) {
      const std::size_t rel = group.first_offset - std::min(group.first_offset, heading.body.begin);
      const std::size_t line =
          heading.body.first_line +
          static_cast<std::size_t>(std::count(body.begin(), body.begin() + std::min(rel, body.size()), U'\n'));
      KnowledgeNode n;
      n.kind = EntityKind::KnowledgePoint;
      n.name = term;
      n.id = make_node_id(course, tree.source, n.kind, term, heading_ids[h]);
      n.ranker = ++ranker;
      n.level = static_cast<std::size_t>(heading.depth) + 1;
      n.url = heading.locator.path + ":" + std::to_string(line);
      n.start = group.first_offset;
      n.word_frequency = group.count;
      if (gazetteer != nullptr) {
        if (const GazetteerEntry* entry = gazetteer->find(term)) {
          const Descriptions& d = entry->descriptions;
          if (d.wiki_en || d.wiki_zh || d.baidu) n.descriptions = d;
        }
      }
      n.course = course;
      n.source = tree.source;
      n.provenance = {{tree.source, n.url}};
      g.add_edge({heading_ids[h], n.id, EdgeType::HasPartOf, {source_tag}});
      g.add_node(std::move(n));
    }
  }
  return g;
}

}  // namespace ckg
