#include "fixtures.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ckg/fusion.hpp"

#ifndef CKG_SOURCE_DIR
#error "CKG_SOURCE_DIR must be defined"
#endif

namespace ckg::fixture {

namespace fs = std::filesystem;

fs::path corpus_dir() { return fs::path(CKG_SOURCE_DIR) / "tests" / "fixtures" / "corpus"; }
fs::path adapters_dir() { return fs::path(CKG_SOURCE_DIR) / "tests" / "fixtures" / "adapters"; }

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words = {
      "matched filter",  "matched filters",   "spectrum",          "hilbert transform", "hilbert transforms",
      "inner product",   "inner products",    "orthogonality",     "constellation",     "constellations",
      "phase ambiguity", "nyquist criterion", "nyquist criteria",  "fourier transform", "fourier transforms",
      "convolution",     "sampling theorem",  "sampling theorems", "analytic signal",   "analytic signals",
      "fdm",             "tdm",               "entropy",           "channel capacity",
  };
  return words;
}

Gazetteer vocabulary_gazetteer(bool odd_text) {
  Gazetteer g;
  std::size_t i = 0;
  for (const auto& w : vocabulary()) {
    GazetteerEntry e;
    e.term = w;
    if (i % 3 == 0) e.descriptions.wiki_en = "About " + w + (odd_text ? " with \"quotes\" and \\slashes\\" : "");
    if (i % 4 == 1) e.descriptions.wiki_zh = odd_text ? "概念 '" + w + "' ☂" : "概念";
    if (i % 5 == 2) e.descriptions.baidu = "百科 " + std::to_string(i);
    g.add(std::move(e));
    ++i;
  }
  return g;
}

namespace {

std::string title_case(std::string s) {
  bool start = true;
  for (char& c : s) {
    if (start && c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    start = c == ' ';
  }
  return s;
}

std::string heading_title(std::mt19937_64& rng, bool odd_text, std::size_t serial) {
  const auto& v = vocabulary();
  if (pick(rng, 3) == 0) return title_case(v[pick(rng, v.size())]);
  if (odd_text) {
    static const std::vector<std::string> odd = {"Quote \"marks\"", "Back\\slash", "It's <tagged> & done",
                                                 "Ω omega",         "频谱 分析",    "Satellite 📡 links"};
    if (pick(rng, 2) == 0) return odd[pick(rng, odd.size())] + " " + std::to_string(serial);
  }
  return "Topic " + std::to_string(serial);
}

std::string body(std::mt19937_64& rng, std::size_t max_terms) {
  const auto& v = vocabulary();
  std::string out;
  const std::size_t n = pick(rng, max_terms + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& term = v[pick(rng, v.size())];
    out += pick(rng, 2) ? "We study the " + term + " here. " : "Notes on " + title_case(term) + " follow.\n";
  }
  return out.empty() ? "Nothing to add.\n" : out + "\n";
}

std::string random_document(std::mt19937_64& rng, const std::string& course, SourceKind source, bool odd_text) {
  std::string doc = "---\nname: " + course + "\nschool_term: 2024\nbackground: random\nurl: https://example.edu/" +
                    std::to_string(rng() % 1000) + "\ncoursePrerequisites: A; B\neducationalAlignments: C\n---\n";
  const bool numbered = source == SourceKind::Slide;
  const std::size_t units = 1 + pick(rng, 3);
  std::size_t headings = 0;
  std::size_t serial = 0;
  for (std::size_t u = 1; u <= units && headings < 9; ++u) {
    doc += (numbered ? std::to_string(u) + ". " : "# ") + heading_title(rng, odd_text, ++serial) + "\n" + body(rng, 2);
    ++headings;
    const std::size_t chapters = pick(rng, 3);
    for (std::size_t c = 1; c <= chapters && headings < 9; ++c) {
      doc += (numbered ? std::to_string(u) + "." + std::to_string(c) + " " : "## ") +
             heading_title(rng, odd_text, ++serial) + "\n" + body(rng, 3);
      ++headings;
      const std::size_t blocks = pick(rng, 3);
      for (std::size_t b = 1; b <= blocks && headings < 9; ++b) {
        doc += (numbered ? std::to_string(u) + "." + std::to_string(c) + "." + std::to_string(b) + " " : "### ") +
               heading_title(rng, odd_text, ++serial) + "\n" + body(rng, 5);
        ++headings;
      }
    }
  }
  return doc;
}

}  // namespace

RandomCourse random_course(std::uint64_t seed, const std::string& name, bool odd_text) {
  std::mt19937_64 rng(seed);
  const Gazetteer gazetteer = vocabulary_gazetteer(odd_text);
  RandomCourse rc;
  rc.name = name;
  for (SourceKind source : {SourceKind::Textbook, SourceKind::Slide}) {
    const std::string path = (source == SourceKind::Textbook ? "textbook" : "slides") + std::string(".md");
    rc.documents.push_back(random_document(rng, name, source, odd_text));
    DocumentTree tree = parse_course_document(rc.documents.back(), default_heading_rules(source), {source, path, name});
    const auto occs = extract_knowledge_points(tree, gazetteer, {});
    rc.graphs.push_back(build_course_graph(tree, occs, &gazetteer));
    rc.trees.push_back(std::move(tree));
  }
  return rc;
}

KnowledgeGraph random_linked_graph(std::uint64_t seed) {
  std::vector<KnowledgeGraph> fused;
  for (int c = 0; c < 2; ++c) {
    const RandomCourse rc = random_course(seed * 2 + static_cast<std::uint64_t>(c), c ? "Course B" : "Course A", true);
    fused.push_back(fuse_same_course(rc.graphs, MatchPolicy{}));
  }
  return link_cross_course(fused, MatchPolicy::exact_only());
}

}  // namespace ckg::fixture
