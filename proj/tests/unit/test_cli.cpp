#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>

#include "ckg/analytics.hpp"
#include "ckg/config.hpp"
#include "ckg/error.hpp"
#include "ckg/exportio.hpp"
#include "ckg/hash.hpp"
#include "ckg/pipeline.hpp"
#include "ckg/unicode.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#ifndef CKG_CLI_PATH
#error "CKG_CLI_PATH must be defined"
#endif

namespace ckg {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("ckg_test_" + std::to_string(getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

std::string corpus_config_text() { return fixture::read_text(fixture::corpus_dir() / "config.ini"); }

PipelineConfig corpus_config() { return load_config(fixture::corpus_dir() / "config.ini"); }

std::map<std::string, std::string> tree_hashes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = sha256_hex(fixture::read_text(e.path()));
  return out;
}

const StageReport& stage_of(const RunReport& r, Stage s) {
  for (const auto& sr : r.stages)
    if (sr.stage == s) return sr;
  throw std::runtime_error("stage missing from report");
}

/// Two small courses written to a temp dir; `extra` is appended to the config.
fs::path mini_corpus(const fs::path& root, const std::string& extra) {
  write(root / "gazetteer.tsv", "matched filter\nspectrum\nbandpass signal\nband-pass signal\nentropy\n");
  write(root / "a" / "textbook.md",
        "---\nname: Course A\n---\n# Filters\n## Matchd Filter\nThe matched filter and spectrum.\n"
        "## Widgets\nA Widget, then another Widget.\n# Signals\nbandpass signal\n");
  write(root / "a" / "slides.md", "---\nname: Course A\n---\n1. Filters\nmatched filter and entropy\n"
                                  "2. Signals\nband-pass signal\n");
  write(root / "b" / "textbook.md", "---\nname: Course B\n---\n# Basics\nspectrum, entropy, matched filter\n");
  write(root / "b" / "slides.md", "---\nname: Course B\n---\n1. Basics\nentropy\n");
  write(root / "config.ini",
        "[corpus]\nroot = .\ngazetteer = gazetteer.tsv\n"
        "[course]\nname = Course A\ntextbook = a/textbook.md\nslides = a/slides.md\n"
        "[course]\nname = Course B\ntextbook = b/textbook.md\nslides = b/slides.md\n"
        "[analytics]\nk = 2\n" + extra);
  return root / "config.ini";
}

std::vector<std::vector<std::string>> csv(const fs::path& p) { return oracle::parse_csv(fixture::read_text(p)); }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CKG_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Config, CorpusConfigLoads) {
  const PipelineConfig cfg = corpus_config();
  EXPECT_EQ(cfg.courses.size(), 4u);
  EXPECT_EQ(cfg.k, 2);
  EXPECT_EQ(cfg.prune_threshold, 0.25);
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.exports.size(), 5u);
  EXPECT_FALSE(cfg.courses[3].documents.count(SourceKind::Syllabus));
  EXPECT_TRUE(cfg.gazetteer_path.is_absolute());
}

TEST(Config, Errors) {
  const fs::path base = fixture::corpus_dir();
  auto code = [&](const std::string& text) {
    try {
      parse_config(text, base);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::StageError;
  };
  std::string missing = corpus_config_text();
  missing.replace(missing.find("gazetteer.tsv"), 13, "missing.tsv");
  EXPECT_EQ(code(missing), ErrorCode::ConfigError);
  EXPECT_EQ(code("[corpus]\ngazetteer = gazetteer.tsv\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code(corpus_config_text() + "[analytics]\nk = 1\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code(corpus_config_text() + "[analytics]\nprune_threshold = 2\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code(corpus_config_text() + "[fusion]\nliteral_threshold = -0.1\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code(corpus_config_text() + "[analytics]\ncolour = red\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code(corpus_config_text() + "[export]\nformats = pdf\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code(corpus_config_text() + "[headings.textbook]\nrule = 1 (bad\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code("[corpus]\ngazetteer = gazetteer.tsv\n[course]\nname = X\ntextbook = nope.md\n"),
            ErrorCode::ConfigError);
}

TEST(Config, Slug) {
  EXPECT_EQ(course_slug("Communication Principles"), "communication_principles");
  EXPECT_EQ(course_slug("C/C++ Programming"), "c_c_programming");
}

TEST(Pipeline, IngestOnlyGatesLaterStages) {
  TempDir out;
  RunOptions opts;
  opts.stage_out = out.path();
  const RunReport r = run_pipeline(corpus_config(), Stage::Ingest, opts);
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.stages.size(), 1u);
  EXPECT_TRUE(fs::exists(out.path() / "ingest" / "run_report.json"));
  EXPECT_TRUE(fs::exists(out.path() / "ingest" / "communication_principles.textbook.tree.json"));
  for (const char* later : {"build", "clean", "fuse", "link", "analyze", "export"})
    EXPECT_FALSE(fs::exists(out.path() / later)) << later;
  EXPECT_EQ(r.stages[0].counts.at("documents"), 11u);
  EXPECT_FALSE(fs::exists(out.path() / ".lock"));
}

TEST(Pipeline, FullRunArtifactsResumeAndCounts) {
  TempDir out;
  RunOptions opts;
  opts.stage_out = out.path();
  const PipelineConfig cfg = corpus_config();
  const RunReport first = run_pipeline(cfg, Stage::All, opts);
  ASSERT_TRUE(first.ok());
  ASSERT_EQ(first.stages.size(), 7u);
  for (const auto& sr : first.stages) EXPECT_FALSE(sr.resumed);
  const fs::path o = out.path();
  for (const char* f : {"export/weights.dot", "export/correlation.csv", "export/all.cypher",
                        "fuse/communication_principles.all.graph.json", "analyze/clusters.csv"})
    EXPECT_TRUE(fs::exists(o / f)) << f;

  // Counts against recounts from the artifacts.
  std::size_t nodes = 0, edges = 0;
  for (const auto& e : fs::directory_iterator(o / "build"))
    if (e.path().string().ends_with(".graph.json")) {
      const KnowledgeGraph g = load_graph_json(fixture::read_text(e.path()));
      nodes += g.nodes().size();
      edges += g.edges().size();
    }
  EXPECT_EQ(stage_of(first, Stage::Build).counts.at("nodes"), nodes);
  EXPECT_EQ(stage_of(first, Stage::Build).counts.at("edges"), edges);
  EXPECT_EQ(stage_of(first, Stage::Fuse).counts.at("clusters"), csv(o / "fuse" / "fusion_report.csv").size() - 1);
  EXPECT_EQ(stage_of(first, Stage::Clean).counts.at("anomalies"), csv(o / "clean" / "anomalies.csv").size() - 1);
  for (const char* tag : {"textbook", "slide", "syllabus", "all"}) {
    const KnowledgeGraph g = load_graph_json(fixture::read_text(o / "link" / (std::string(tag) + ".graph.json")));
    std::size_t eq = 0;
    for (const auto& [k, e] : g.edges()) eq += e.type == EdgeType::EquivalentTo;
    EXPECT_EQ(stage_of(first, Stage::Link).counts.at(std::string("equivalence_edges.") + tag), eq) << tag;
    EXPECT_TRUE(validate_graph(g).empty()) << tag;
  }
  std::size_t statements = 0;
  for (const auto& e : fs::directory_iterator(o / "export"))
    if (e.path().extension() == ".cypher") {
      const auto [n, m] = oracle::parse_cypher(fixture::read_text(e.path()));
      statements += n + m;
    }
  EXPECT_EQ(stage_of(first, Stage::Export).counts.at("cypher_statements"), statements);
  EXPECT_EQ(csv(o / "analyze" / "pruned_edges.csv").size() - 1, stage_of(first, Stage::Analyze).counts.at("pruned_edges"));

  const auto hashes = tree_hashes(o);
  const RunReport second = run_pipeline(cfg, Stage::All, opts);
  ASSERT_TRUE(second.ok());
  for (const auto& sr : second.stages) EXPECT_TRUE(sr.resumed) << to_string(sr.stage);
  EXPECT_EQ(tree_hashes(o), hashes);

  RunOptions reseeded = opts;
  reseeded.seed = 7;
  const RunReport third = run_pipeline(cfg, Stage::All, reseeded);
  ASSERT_TRUE(third.ok());
  EXPECT_TRUE(stage_of(third, Stage::Link).resumed);
  EXPECT_FALSE(stage_of(third, Stage::Analyze).resumed);

  // A tampered artifact forces that stage to rerun.
  write(o / "link" / "all.graph.json", "{}");
  const RunReport fourth = run_pipeline(cfg, Stage::Link, opts);
  ASSERT_TRUE(fourth.ok());
  EXPECT_FALSE(stage_of(fourth, Stage::Link).resumed);
  std::map<std::string, std::string> link_hashes;
  for (const auto& [k, v] : hashes)
    if (k.starts_with("link/")) link_hashes[k.substr(5)] = v;
  EXPECT_EQ(tree_hashes(o / "link"), link_hashes);
}

TEST(Pipeline, CorrelationMatchesPairwiseRecount) {
  TempDir out;
  RunOptions opts;
  opts.stage_out = out.path();
  const PipelineConfig cfg = corpus_config();
  ASSERT_TRUE(run_pipeline(cfg, Stage::Analyze, opts).ok());
  const fs::path o = out.path();

  struct Source {
    SourceKind kind;
    std::string tag;
  };
  std::map<std::string, std::map<std::string, std::map<std::string, double>>> value;  // tag -> i -> j
  for (const Source& s : {Source{SourceKind::Slide, "slide"}, Source{SourceKind::Textbook, "textbook"}}) {
    const KnowledgeGraph linked = load_graph_json(fixture::read_text(o / "link" / (s.tag + ".graph.json")));
    std::map<std::pair<std::string, std::string>, std::size_t> sim;
    for (const auto& [k, e] : linked.edges()) {
      if (e.type != EdgeType::EquivalentTo) continue;
      const std::string a = linked.find(e.from)->course, b = linked.find(e.to)->course;
      ++sim[{a, b}];
      ++sim[{b, a}];
    }
    for (const auto& ci : cfg.courses) {
      if (!ci.documents.count(s.kind)) continue;
      const std::size_t n =
          load_graph_json(fixture::read_text(o / "fuse" / (course_slug(ci.name) + "." + s.tag + ".graph.json")))
              .nodes()
              .size();
      for (const auto& cj : cfg.courses)
        if (cj.name != ci.name && cj.documents.count(s.kind))
          value[s.tag][ci.name][cj.name] = static_cast<double>(sim[{ci.name, cj.name}]) / static_cast<double>(n);
    }
  }
  const auto rows = csv(o / "analyze" / "correlation.csv");
  ASSERT_EQ(rows[0], (std::vector<std::string>{"course_i", "course_j", "Su", "Sv", "S", "single_source"}));
  ASSERT_EQ(rows.size(), 1u + 4 * 3);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::string& i = rows[r][0];
    const std::string& j = rows[r][1];
    const double su = value["slide"][i][j];
    const double sv = value["textbook"][i][j];
    EXPECT_EQ(rows[r][2], format_decimal(su)) << i << " / " << j;
    EXPECT_EQ(rows[r][3], format_decimal(sv));
    EXPECT_EQ(rows[r][4], format_decimal((su + sv) / 2));
  }
  const auto core = csv(o / "analyze" / "core_concepts.csv");
  std::size_t cp = 0;
  for (const auto& row : core) cp += row[0] == "Communication Principles";
  EXPECT_EQ(cp, 16u);
}

TEST(Pipeline, Determinism) {
  TempDir a, b;
  const PipelineConfig cfg = corpus_config();
  RunOptions oa, ob;
  oa.stage_out = a.path();
  ob.stage_out = b.path();
  ASSERT_TRUE(run_pipeline(cfg, Stage::All, oa).ok());
  ASSERT_TRUE(run_pipeline(cfg, Stage::All, ob).ok());
  EXPECT_EQ(tree_hashes(a.path()), tree_hashes(b.path()));
}

TEST(Pipeline, LockHeldByLiveProcess) {
  TempDir out;
  write(out.path() / ".lock", std::to_string(getpid()) + "\n");
  RunOptions opts;
  opts.stage_out = out.path();
  try {
    run_pipeline(corpus_config(), Stage::Ingest, opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StageError);
  }
  EXPECT_TRUE(fs::exists(out.path() / ".lock"));

  const pid_t child = fork();
  if (child == 0) _exit(0);
  waitpid(child, nullptr, 0);
  write(out.path() / ".lock", std::to_string(child) + "\n");
  EXPECT_TRUE(run_pipeline(corpus_config(), Stage::Ingest, opts).ok());
  EXPECT_FALSE(fs::exists(out.path() / ".lock"));
}

TEST(Pipeline, StageErrorIsReported) {
  TempDir dir;
  const fs::path cfg_path = mini_corpus(dir.path(), "");
  write(dir.path() / "b" / "slides.md", "---\nname: Course B\n---\n1. Basics\n1.1.1 Jump\n");
  const RunReport r = run_pipeline(load_config(cfg_path), Stage::All);
  EXPECT_FALSE(r.ok());
  ASSERT_EQ(r.stages.size(), 1u);
  EXPECT_NE(r.stages[0].error.find("DepthJump"), std::string::npos) << r.stages[0].error;
}

TEST(Adapters, NerAddsTerms) {
  TempDir dir;
  const std::string ner = "python3 " + (fixture::adapters_dir() / "ner.py").string();
  const fs::path cfg_path = mini_corpus(dir.path(), "[adapters]\nner = " + ner + "\n");
  ASSERT_TRUE(run_pipeline(load_config(cfg_path), Stage::Build).ok());
  const KnowledgeGraph g =
      load_graph_json(fixture::read_text(dir.path() / "out" / "build" / "course_a.textbook.graph.json"));
  const auto widgets = query_by_name(g, "widget");
  ASSERT_EQ(widgets.size(), 1u);
  EXPECT_EQ(widgets[0].word_frequency, 2u);
  const std::u32string doc = unicode::decode(fixture::read_text(dir.path() / "a" / "textbook.md"));
  EXPECT_EQ(doc.substr(*widgets[0].start, 6), U"Widget");
}

TEST(Adapters, CorrectorReplacesScorer) {
  TempDir dir;
  const std::string cmd = "python3 " + (fixture::adapters_dir() / "corrector.py").string();
  const fs::path cfg_path = mini_corpus(dir.path(), "[adapters]\ncorrector = " + cmd + "\n");
  ASSERT_TRUE(run_pipeline(load_config(cfg_path), Stage::Clean).ok());
  bool found = false;
  for (const auto& row : csv(dir.path() / "out" / "clean" / "anomalies.csv")) {
    if (row[1] != "SuspectedMisspelling") continue;
    EXPECT_EQ(row[5], "0.99000");
    found = found || row[4] == "matched filter";
  }
  EXPECT_TRUE(found);
}

TEST(Adapters, EmbeddingDrivesSemanticFusion) {
  TempDir dir;
  const std::string cmd = "python3 " + (fixture::adapters_dir() / "embedding.py").string();
  const fs::path cfg_path = mini_corpus(
      dir.path(), "[fusion]\nliteral = false\nsemantic = true\nsemantic_threshold = 0.6\n[adapters]\nembedding = " +
                      cmd + "\n");
  ASSERT_TRUE(run_pipeline(load_config(cfg_path), Stage::Fuse).ok());
  std::size_t semantic = 0;
  for (const auto& row : csv(dir.path() / "out" / "fuse" / "fusion_report.csv")) semantic += row[6] == "semantic";
  EXPECT_GE(semantic, 1u);
}

TEST(Adapters, BrokenOrMissingAdapterIsDisabled) {
  TempDir plain, broken, missing;
  ASSERT_TRUE(run_pipeline(load_config(mini_corpus(plain.path(), "")), Stage::Build).ok());
  const std::string bad = "python3 " + (fixture::adapters_dir() / "broken.py").string();
  ASSERT_TRUE(run_pipeline(load_config(mini_corpus(broken.path(), "[adapters]\nner = " + bad + "\n")), Stage::Build).ok());
  ASSERT_TRUE(run_pipeline(load_config(mini_corpus(missing.path(), "[adapters]\nner = /nonexistent/ner-tool\n")),
                           Stage::Build)
                  .ok());
  const auto rel = fs::path("out") / "build" / "course_a.textbook.graph.json";
  const std::string expected = fixture::read_text(plain.path() / rel);
  EXPECT_EQ(fixture::read_text(broken.path() / rel), expected);
  EXPECT_EQ(fixture::read_text(missing.path() / rel), expected);
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  const fs::path cfg_path = mini_corpus(dir.path(), "");
  EXPECT_EQ(run_cli("ingest --config " + cfg_path.string() + " -q"), 0);
  EXPECT_TRUE(fs::exists(dir.path() / "out" / "ingest"));
  EXPECT_NE(run_cli("ingest --config " + (dir.path() / "nope.ini").string()), 0);
  EXPECT_NE(run_cli("frobnicate --config " + cfg_path.string()), 0);

  write(dir.path() / "bad.ini", "[corpus]\ngazetteer = missing.tsv\n[course]\nname = X\ntextbook = a/textbook.md\n");
  EXPECT_EQ(run_cli("all --config " + (dir.path() / "bad.ini").string()), 2);

  TempDir held;
  write(held.path() / ".lock", std::to_string(getpid()) + "\n");
  EXPECT_EQ(run_cli("ingest -q --config " + cfg_path.string() + " --stage-out " + held.path().string()), 1);

  TempDir custom;
  EXPECT_EQ(run_cli("all -q --seed 3 --apply-corrections --config " + cfg_path.string() + " --stage-out " +
                    custom.path().string()),
            0);
  EXPECT_TRUE(fs::exists(custom.path() / "export" / "weights.dot"));
  const KnowledgeGraph cleaned =
      load_graph_json(fixture::read_text(custom.path() / "clean" / "course_a.textbook.graph.json"));
  EXPECT_EQ(query_by_name(cleaned, "matchd filter").size(), 0u);
  EXPECT_FALSE(query_by_name(cleaned, "Matched Filter").empty());
}

}  // namespace
}  // namespace ckg
