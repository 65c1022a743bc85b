#include <gtest/gtest.h>

#include <algorithm>

#include "ckg/error.hpp"
#include "ckg/extraction.hpp"
#include "ckg/text.hpp"
#include "ckg/unicode.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace ckg {
namespace {

DocumentTree parse(const std::string& doc, SourceKind source = SourceKind::Textbook) {
  return parse_course_document(doc, default_heading_rules(source), {source, "doc.md", ""});
}

Gazetteer small_gazetteer() {
  return Gazetteer::parse(
      "# term\taliases\n"
      "matched filter\tMF\tA filter\t\tBaidu text\n"
      "filter\n"
      "Fourier transform\tFT\n"
      "频谱\n");
}

TEST(Gazetteer, ParsesRecords) {
  const Gazetteer g = small_gazetteer();
  EXPECT_EQ(g.size(), 4u);
  const GazetteerEntry* mf = g.find("Matched  Filter");
  ASSERT_NE(mf, nullptr);
  EXPECT_EQ(mf->aliases, std::vector<std::string>{"MF"});
  EXPECT_EQ(mf->descriptions.wiki_en, "A filter");
  EXPECT_FALSE(mf->descriptions.wiki_zh);
  EXPECT_EQ(mf->descriptions.baidu, "Baidu text");
  EXPECT_EQ(g.find("nothing"), nullptr);
}

TEST(Gazetteer, DuplicateTerm) {
  try {
    Gazetteer::parse("Entropy\nentropy\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateTerm);
  }
}

TEST(Extraction, LongestMatchAndAliases) {
  const DocumentTree t = parse("---\nname: C\n---\n# A\nThe Matched Filter and a filter, then MF and FT.\n");
  const auto occ = extract_knowledge_points(t, small_gazetteer(), {});
  ASSERT_EQ(occ.size(), 4u);
  EXPECT_EQ(occ[0].term, "matched filter");
  EXPECT_EQ(occ[1].term, "filter");
  EXPECT_EQ(occ[2].term, "matched filter");
  EXPECT_EQ(occ[3].term, "Fourier transform");
}

TEST(Extraction, OffsetsAreDocumentScalars) {
  const std::string doc = "---\nname: C\n---\n# Ω 频谱\nΩΩ matched filter 频谱分析\n";
  const DocumentTree t = parse(doc);
  const auto occ = extract_knowledge_points(t, small_gazetteer(), {});
  ASSERT_EQ(occ.size(), 2u);
  const std::u32string all = unicode::decode(doc);
  EXPECT_EQ(unicode::encode(all.substr(occ[0].offset, 14)), "matched filter");
  EXPECT_EQ(occ[1].term, "频谱");
  EXPECT_EQ(unicode::encode(all.substr(occ[1].offset, 2)), "频谱");
}

TEST(Extraction, WordBoundary) {
  const DocumentTree t = parse("---\nname: C\n---\n# A\nprefilter filters filter2 (filter) filter.\n");
  const auto occ = extract_knowledge_points(t, small_gazetteer(), {});
  ASSERT_EQ(occ.size(), 2u);
  EXPECT_EQ(occ[0].term, "filter");
}

TEST(Extraction, FullWidthAndCase) {
  const DocumentTree t = parse("---\nname: C\n---\n# A\nＭＡＴＣＨＥＤ　ＦＩＬＴＥＲ\n");
  const auto occ = extract_knowledge_points(t, small_gazetteer(), {});
  ASSERT_EQ(occ.size(), 1u);
  EXPECT_EQ(occ[0].term, "matched filter");
}

TEST(Extraction, TermPatterns) {
  ExtractionRules rules;
  rules.add(R"(\b([A-Z][a-z]+ (?:theorem|lemma))\b)");
  const DocumentTree t = parse("---\nname: C\n---\n# A\nBy the Parseval theorem and matched filter.\n");
  const auto occ = extract_knowledge_points(t, small_gazetteer(), rules);
  ASSERT_EQ(occ.size(), 2u);
  EXPECT_EQ(occ[0].term, "Parseval theorem");
  EXPECT_THROW(rules.add("(bad"), Error);
}

TEST(Extraction, MatchesBruteForceOracle) {
  const Gazetteer g = fixture::vocabulary_gazetteer(false);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto rc = fixture::random_course(seed, "Oracle", seed % 2 == 1);
    for (const auto& tree : rc.trees)
      ASSERT_EQ(extract_knowledge_points(tree, g, {}), oracle::scan_occurrences(tree, g)) << "seed " << seed;
  }
}

TEST(Extraction, CorpusMatchesBruteForceOracle) {
  const Gazetteer g = Gazetteer::parse(fixture::read_text(fixture::corpus_dir() / "gazetteer.tsv"));
  for (const auto& entry : std::filesystem::recursive_directory_iterator(fixture::corpus_dir())) {
    if (entry.path().extension() != ".md") continue;
    const std::string stem = entry.path().stem().string();
    const SourceKind source = parse_source_kind(stem);
    const DocumentTree t = parse_course_document(fixture::read_text(entry.path()), default_heading_rules(source),
                                                 {source, entry.path().string(), ""});
    EXPECT_EQ(extract_knowledge_points(t, g, {}), oracle::scan_occurrences(t, g)) << entry.path();
  }
}

TEST(Extraction, WordFrequencyMatchesRecount) {
  const Gazetteer g = fixture::vocabulary_gazetteer(false);
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    const auto rc = fixture::random_course(seed, "Counts");
    for (std::size_t i = 0; i < rc.trees.size(); ++i) {
      std::map<std::string, std::size_t> from_graph;
      for (const auto& [id, n] : rc.graphs[i].nodes())
        if (n.kind == EntityKind::KnowledgePoint) from_graph[n.name] += *n.word_frequency;
      ASSERT_EQ(from_graph, oracle::recount(rc.trees[i], g)) << "seed " << seed;
      const auto occ = extract_knowledge_points(rc.trees[i], g, {});
      const auto stats = compute_term_stats(occ);
      for (const auto& [term, s] : stats) {
        EXPECT_EQ(s.word_frequency, from_graph[term]);
        const auto first = std::find_if(occ.begin(), occ.end(), [&](const auto& o) { return o.term == term; });
        EXPECT_EQ(s.start, first->offset);
      }
    }
  }
}

TEST(BuildGraph, ShapeAndAttributes) {
  const DocumentTree t = parse(
      "---\nname: Communication Principles\nschool_term: 2022\n---\n# Signals\n## Deterministic\n### Transforms\n"
      "Matched filter, matched filter.\nFT\n## Random\nmatched filter\n");
  const Gazetteer gz = small_gazetteer();
  const auto occ = extract_knowledge_points(t, gz, {});
  const KnowledgeGraph g = build_course_graph(t, occ, &gz);
  EXPECT_TRUE(validate_graph(g).empty());
  std::map<EntityKind, std::size_t> kinds;
  for (const auto& [id, n] : g.nodes()) ++kinds[n.kind];
  EXPECT_EQ(kinds[EntityKind::Course], 1u);
  EXPECT_EQ(kinds[EntityKind::KnowledgeUnit], 1u);
  EXPECT_EQ(kinds[EntityKind::KnowledgeChapter], 2u);
  EXPECT_EQ(kinds[EntityKind::KnowledgeBlock], 1u);
  EXPECT_EQ(kinds[EntityKind::KnowledgePoint], 3u);
  EXPECT_EQ(g.edges().size(), 7u);

  const auto mf = query_by_name(g, "Matched Filter");
  ASSERT_EQ(mf.size(), 2u);
  std::size_t total = 0;
  for (const auto& n : mf) {
    total += *n.word_frequency;
    ASSERT_TRUE(n.descriptions);
    EXPECT_EQ(n.descriptions->wiki_en, "A filter");
  }
  EXPECT_EQ(total, 3u);
  const auto ft = query_by_name(g, "fourier transform");
  ASSERT_EQ(ft.size(), 1u);
  EXPECT_EQ(ft[0].url, "doc.md:9");
  EXPECT_EQ(ft[0].level, 4u);
  EXPECT_EQ(ft[0].ranker, 2u);
  EXPECT_FALSE(ft[0].descriptions);
}

TEST(BuildGraph, SyllabusChain) {
  const DocumentTree t =
      parse("---\nname: C\n---\n# Content one\nfilter\n# Content two\n", SourceKind::Syllabus);
  const KnowledgeGraph g = build_course_graph(t, extract_knowledge_points(t, small_gazetteer(), {}));
  EXPECT_TRUE(validate_graph(g).empty());
  std::size_t teaching = 0;
  for (const auto& [id, n] : g.nodes()) teaching += n.kind == EntityKind::TeachingContent;
  EXPECT_EQ(teaching, 2u);
}

TEST(BuildGraph, RandomGraphsValidate) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto rc = fixture::random_course(seed, "Valid", true);
    for (const auto& g : rc.graphs) {
      ASSERT_TRUE(validate_graph(g).empty()) << "seed " << seed;
      ASSERT_EQ(oracle::chain_violations(g), 0u);
    }
  }
}

}  // namespace
}  // namespace ckg
