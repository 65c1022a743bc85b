#include "ckg/pipeline.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "ckg/adapters.hpp"
#include "ckg/cleaning.hpp"
#include "ckg/error.hpp"
#include "ckg/extraction.hpp"
#include "ckg/hash.hpp"
#include "ckg/text.hpp"

namespace ckg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr Stage kOrder[] = {Stage::Ingest, Stage::Build, Stage::Clean, Stage::Fuse,
                            Stage::Link,   Stage::Analyze, Stage::Export};
constexpr SourceKind kSources[] = {SourceKind::Textbook, SourceKind::Slide, SourceKind::Syllabus};

std::string source_tag(SourceKind s) {
  switch (s) {
    case SourceKind::Textbook: return "textbook";
    case SourceKind::Slide: return "slide";
    case SourceKind::Syllabus: return "syllabus";
  }
  return "textbook";
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + p.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, std::string_view data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + p.string() + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to '" + p.string() + "'");
}

class OutputLock {
 public:
  explicit OutputLock(fs::path path) : path_(std::move(path)) {
    for (int attempt = 0; attempt < 2; ++attempt) {
      const int fd = open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
      if (fd >= 0) {
        const std::string pid = std::to_string(getpid()) + "\n";
        [[maybe_unused]] const auto n = write(fd, pid.data(), pid.size());
        close(fd);
        return;
      }
      if (errno != EEXIST) throw Error(ErrorCode::IoError, "cannot create lock '" + path_.string() + "'");
      long holder = 0;
      std::ifstream(path_) >> holder;
      if (holder > 0 && (kill(static_cast<pid_t>(holder), 0) == 0 || errno == EPERM))
        throw Error(ErrorCode::StageError, "pipeline already running (pid " + std::to_string(holder) + ")");
      spdlog::warn("removing stale lock {}", path_.string());
      fs::remove(path_);
    }
    throw Error(ErrorCode::StageError, "could not acquire lock '" + path_.string() + "'");
  }
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
};

using Row = ckg::Row;

Cell text(std::string s) { return Cell{std::move(s)}; }
Cell number(double v) { return Cell{v}; }
Cell integer(std::size_t v) { return Cell{static_cast<std::int64_t>(v)}; }

class Runner {
 public:
  Runner(const PipelineConfig& cfg, const RunOptions& opts)
      : cfg_(cfg),
        out_root_(opts.stage_out ? fs::absolute(*opts.stage_out) : cfg.corpus_root / "out"),
        seed_(opts.seed.value_or(cfg.seed)),
        apply_corrections_(opts.apply_corrections || cfg.apply_corrections) {}

  RunReport run(Stage target) {
    fs::create_directories(out_root_);
    OutputLock lock(out_root_ / ".lock");
    RunReport report;
    std::string previous_outputs;
    for (Stage stage : kOrder) {
      StageReport sr = run_stage(stage, previous_outputs);
      const bool failed = !sr.error.empty();
      previous_outputs.clear();
      for (const auto& o : sr.outputs) previous_outputs += o.path + "=" + o.sha256 + "\n";
      report.stages.push_back(std::move(sr));
      if (failed || stage == target) break;
    }
    return report;
  }

 private:
  fs::path dir(Stage s) const { return out_root_ / std::string(to_string(s)); }

  std::string inputs_digest(Stage stage, const std::string& previous_outputs) const {
    Sha256 h;
    h.update(std::string(to_string(stage)) + "\n");
    h.update(cfg_.fingerprint);
    if (stage == Stage::Analyze) h.update("seed=" + std::to_string(seed_) + "\n");
    if (stage == Stage::Clean) h.update(std::string("apply=") + (apply_corrections_ ? "1" : "0") + "\n");
    h.update(previous_outputs);
    if (stage == Stage::Ingest) {
      for (const auto& c : cfg_.courses)
        for (const auto& [kind, path] : c.documents) h.update(sha256_hex(read_file(path)));
    }
    if (stage == Stage::Build) h.update(sha256_hex(read_file(cfg_.gazetteer_path)));
    return h.hex_digest();
  }

  std::optional<StageReport> reusable(Stage stage, const std::string& digest) const {
    const fs::path report_path = dir(stage) / "run_report.json";
    if (!fs::exists(report_path)) return std::nullopt;
    try {
      const json j = json::parse(read_file(report_path));
      if (j.at("inputs_digest").get<std::string>() != digest) return std::nullopt;
      StageReport sr;
      sr.stage = stage;
      sr.inputs_digest = digest;
      for (const json& o : j.at("outputs")) {
        OutputFile f{o.at("path").get<std::string>(), o.at("sha256").get<std::string>()};
        const fs::path p = dir(stage) / f.path;
        if (!fs::exists(p) || sha256_hex(read_file(p)) != f.sha256) return std::nullopt;
        sr.outputs.push_back(std::move(f));
      }
      for (const auto& [k, v] : j.at("counts").items()) sr.counts[k] = v.get<std::size_t>();
      sr.resumed = true;
      return sr;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  StageReport run_stage(Stage stage, const std::string& previous_outputs) {
    const auto started = std::chrono::steady_clock::now();
    StageReport sr;
    sr.stage = stage;
    try {
      sr.inputs_digest = inputs_digest(stage, previous_outputs);
      if (auto reused = reusable(stage, sr.inputs_digest)) {
        sr = std::move(*reused);
      } else {
        fs::remove_all(dir(stage));
        fs::create_directories(dir(stage));
        outputs_.clear();
        counts_.clear();
        switch (stage) {
          case Stage::Ingest: ingest(); break;
          case Stage::Build: build(); break;
          case Stage::Clean: clean(); break;
          case Stage::Fuse: fuse(); break;
          case Stage::Link: link(); break;
          case Stage::Analyze: analyze(); break;
          case Stage::Export: export_all(); break;
          case Stage::All: break;
        }
        std::sort(outputs_.begin(), outputs_.end(),
                  [](const OutputFile& a, const OutputFile& b) { return a.path < b.path; });
        sr.outputs = outputs_;
        sr.counts = counts_;
        write_report(sr);
      }
    } catch (const Error& e) {
      sr.error = e.what();
    } catch (const std::exception& e) {
      sr.error = std::string(to_string(ErrorCode::StageError)) + ": " + e.what();
    }
    sr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (sr.error.empty()) {
      spdlog::info("{:<8} {} ({:.3f}s, {} outputs)", to_string(stage), sr.resumed ? "reused" : "done", sr.seconds,
                   sr.outputs.size());
    } else {
      spdlog::error("{:<8} failed: {}", to_string(stage), sr.error);
    }
    return sr;
  }

  void write_report(const StageReport& sr) const {
    json outputs = json::array();
    for (const auto& o : sr.outputs) outputs.push_back({{"path", o.path}, {"sha256", o.sha256}});
    json counts = json::object();
    for (const auto& [k, v] : sr.counts) counts[k] = v;
    const json j = {{"stage", std::string(to_string(sr.stage))},
                    {"inputs_digest", sr.inputs_digest},
                    {"outputs", outputs},
                    {"counts", counts}};
    write_file(dir(sr.stage) / "run_report.json", j.dump(2) + "\n");
  }

  void emit(Stage stage, const std::string& name, const std::string& data) {
    write_file(dir(stage) / name, data);
    outputs_.push_back({name, sha256_hex(data)});
  }

  KnowledgeGraph load_graph(Stage stage, const std::string& name) const {
    return load_graph_json(read_file(dir(stage) / name));
  }

  std::string doc_name(const CourseSources& c, SourceKind s, std::string_view suffix) const {
    return course_slug(c.name) + "." + source_tag(s) + std::string(suffix);
  }

  // --- stages -------------------------------------------------------------

  void ingest() {
    std::size_t headings = 0;
    for (const auto& c : cfg_.courses) {
      for (const auto& [kind, path] : c.documents) {
        const auto rules_it = cfg_.heading_rules.find(kind);
        const HeadingRules rules = rules_it != cfg_.heading_rules.end() ? rules_it->second : default_heading_rules(kind);
        ParseOptions po{kind, fs::relative(path, cfg_.corpus_root).generic_string(), c.name};
        DocumentTree tree = parse_course_document(read_file(path), rules, po);
        if (tree.meta.name != c.name)
          throw Error(ErrorCode::CourseMismatch,
                      po.path + " declares course '" + tree.meta.name + "' but is listed under '" + c.name + "'");
        headings += tree.headings.size();
        emit(Stage::Ingest, doc_name(c, kind, ".tree.json"), document_tree_to_json(tree));
      }
    }
    counts_["documents"] = outputs_.size();
    counts_["headings"] = headings;
  }

  Gazetteer load_gazetteer() const { return Gazetteer::parse(read_file(cfg_.gazetteer_path)); }

  void build() {
    const Gazetteer gazetteer = load_gazetteer();
    ExtractionRules rules;
    for (const auto& p : cfg_.term_patterns) rules.add(p);
    std::unique_ptr<NdjsonAdapter> ner;
    if (cfg_.adapters.ner) ner = std::make_unique<NdjsonAdapter>("ner", *cfg_.adapters.ner);

    std::size_t nodes = 0, edges = 0, kps = 0, occurrences = 0;
    for (const auto& c : cfg_.courses) {
      for (const auto& [kind, path] : c.documents) {
        const DocumentTree tree = document_tree_from_json(read_file(dir(Stage::Ingest) / doc_name(c, kind, ".tree.json")));
        std::vector<TermOccurrence> occs = extract_knowledge_points(tree, gazetteer, rules);
        if (ner && ner->enabled()) {
          auto extra = ner_occurrences(*ner, tree);
          occs.insert(occs.end(), extra.begin(), extra.end());
          std::sort(occs.begin(), occs.end(), [](const TermOccurrence& a, const TermOccurrence& b) {
            return std::tie(a.offset, a.heading, a.term) < std::tie(b.offset, b.heading, b.term);
          });
          occs.erase(std::unique(occs.begin(), occs.end(),
                                 [](const TermOccurrence& a, const TermOccurrence& b) {
                                   return a.offset == b.offset && a.heading == b.heading &&
                                          match_key(a.term) == match_key(b.term);
                                 }),
                     occs.end());
        }
        const KnowledgeGraph g = build_course_graph(tree, occs, &gazetteer);
        nodes += g.nodes().size();
        edges += g.edges().size();
        occurrences += occs.size();
        for (const auto& [id, n] : g.nodes()) kps += n.kind == EntityKind::KnowledgePoint;
        emit(Stage::Build, doc_name(c, kind, ".graph.json"), emit_graph_json(g));
      }
    }
    counts_["graphs"] = outputs_.size();
    counts_["nodes"] = nodes;
    counts_["edges"] = edges;
    counts_["knowledge_points"] = kps;
    counts_["occurrences"] = occurrences;
  }

  void clean() {
    const Gazetteer gazetteer = load_gazetteer();
    std::vector<std::pair<std::string, KnowledgeGraph>> graphs;
    for (const auto& c : cfg_.courses)
      for (const auto& [kind, path] : c.documents) {
        const std::string name = doc_name(c, kind, ".graph.json");
        graphs.emplace_back(name, load_graph(Stage::Build, name));
      }

    Lexicon lexicon;
    for (const auto& [key, entry] : gazetteer.entries()) {
      lexicon.add(entry.term, 1);
      for (const auto& alias : entry.aliases) lexicon.add(alias, 1);
    }
    for (const auto& [name, g] : graphs)
      for (const auto& [id, n] : g.nodes())
        if (n.kind == EntityKind::KnowledgePoint) lexicon.add(n.name, total_frequency(n));

    DetectOptions detect;
    detect.max_edit_distance = cfg_.max_edit_distance;
    std::shared_ptr<NdjsonAdapter> corrector;
    if (cfg_.adapters.corrector) {
      corrector = std::make_shared<NdjsonAdapter>("corrector", *cfg_.adapters.corrector);
      detect.strategy = make_external_corrector(corrector, default_correction_strategy(lexicon));
    }

    const std::vector<Column> schema = {{"node_id", ColumnType::Text, false},   {"category", ColumnType::Text, false},
                                        {"span_start", ColumnType::Integer, false}, {"span_end", ColumnType::Integer, false},
                                        {"suggestion", ColumnType::Text, true},  {"score", ColumnType::Number, true}};
    std::vector<Row> rows;
    std::size_t anomalies = 0, corrected = 0;
    for (auto& [name, g] : graphs) {
      const std::vector<Anomaly> found = detect_anomalies(g, lexicon, detect);
      anomalies += found.size();
      for (const Anomaly& a : found) {
        rows.push_back({text(a.node_id), text(std::string(to_string(a.category))), integer(a.span_begin),
                        integer(a.span_end), a.suggestion ? text(a.suggestion->text) : Cell{},
                        a.suggestion ? number(a.suggestion->score) : Cell{}});
      }
      if (apply_corrections_) {
        CleanResult r = apply_corrections(g, found, cfg_.min_correction_score);
        corrected += r.corrected.size();
        g = std::move(r.graph);
      }
      emit(Stage::Clean, name, emit_graph_json(g));
    }
    emit(Stage::Clean, "anomalies.csv", emit_report_csv(rows, schema));
    counts_["graphs"] = graphs.size();
    counts_["anomalies"] = anomalies;
    counts_["corrected"] = corrected;
  }

  std::optional<SemanticScorer> semantic_scorer(const MatchPolicy& policy) {
    if (!policy.semantic_enabled) return std::nullopt;
    if (!cfg_.adapters.embedding) {
      if (!warned_semantic_) spdlog::warn("semantic matching enabled but no embedding adapter configured");
      warned_semantic_ = true;
      return std::nullopt;
    }
    if (!embedding_) embedding_ = std::make_shared<NdjsonAdapter>("embedding", *cfg_.adapters.embedding);
    return make_embedding_scorer(embedding_);
  }

  void fuse() {
    const auto scorer = semantic_scorer(cfg_.fusion_policy);
    const SemanticScorer* sem = scorer ? &*scorer : nullptr;
    const std::vector<Column> schema = {
        {"course", ColumnType::Text, false},       {"scope", ColumnType::Text, false},
        {"cluster", ColumnType::Integer, false},   {"members", ColumnType::Text, false},
        {"representative", ColumnType::Text, false}, {"fused_rank", ColumnType::Integer, false},
        {"mechanism", ColumnType::Text, false},    {"score", ColumnType::Number, false}};
    std::vector<Row> rows;
    std::size_t clusters_total = 0, nodes = 0, edges = 0;
    auto record = [&](const std::string& course, const std::string& scope, const std::vector<MatchCluster>& clusters) {
      for (std::size_t i = 0; i < clusters.size(); ++i) {
        const auto& cl = clusters[i];
        std::string members;
        for (const auto& m : cl.members) members += (members.empty() ? "" : " ") + m;
        rows.push_back({text(course), text(scope), integer(i), text(members), text(cl.representative),
                        integer(static_cast<std::size_t>(cl.fused_rank)), text(std::string(to_string(cl.mechanism))),
                        number(cl.score)});
      }
      clusters_total += clusters.size();
    };
    for (const auto& c : cfg_.courses) {
      std::vector<KnowledgeGraph> sources;
      for (const auto& [kind, path] : c.documents) {
        KnowledgeGraph g = load_graph(Stage::Clean, doc_name(c, kind, ".graph.json"));
        std::vector<MatchCluster> clusters;
        KnowledgeGraph fused = fuse_same_course(std::span(&g, 1), cfg_.fusion_policy, sem, &clusters);
        record(c.name, source_tag(kind), clusters);
        emit(Stage::Fuse, doc_name(c, kind, ".graph.json"), emit_graph_json(fused));
        sources.push_back(std::move(g));
      }
      std::vector<MatchCluster> clusters;
      const KnowledgeGraph all = fuse_same_course(sources, cfg_.fusion_policy, sem, &clusters);
      record(c.name, "all", clusters);
      nodes += all.nodes().size();
      edges += all.edges().size();
      emit(Stage::Fuse, course_slug(c.name) + ".all.graph.json", emit_graph_json(all));
    }
    emit(Stage::Fuse, "fusion_report.csv", emit_report_csv(rows, schema));
    counts_["clusters"] = clusters_total;
    counts_["fused_nodes"] = nodes;
    counts_["fused_edges"] = edges;
  }

  static std::string link_name(std::optional<SourceKind> s) {
    return (s ? source_tag(*s) : std::string("all")) + ".graph.json";
  }

  void link() {
    const auto scorer = semantic_scorer(cfg_.link_policy);
    const SemanticScorer* sem = scorer ? &*scorer : nullptr;
    std::vector<std::optional<SourceKind>> scopes(std::begin(kSources), std::end(kSources));
    scopes.push_back(std::nullopt);
    for (const auto& scope : scopes) {
      std::vector<KnowledgeGraph> graphs;
      for (const auto& c : cfg_.courses) {
        if (scope && !c.documents.count(*scope)) continue;
        graphs.push_back(load_graph(Stage::Fuse, scope ? doc_name(c, *scope, ".graph.json")
                                                       : course_slug(c.name) + ".all.graph.json"));
      }
      if (graphs.empty()) continue;
      const KnowledgeGraph linked = link_cross_course(graphs, cfg_.link_policy, sem);
      std::size_t equiv = 0;
      for (const auto& [k, e] : linked.edges()) equiv += e.type == EdgeType::EquivalentTo;
      const std::string tag = scope ? source_tag(*scope) : "all";
      counts_["equivalence_edges." + tag] = equiv;
      counts_["nodes." + tag] = linked.nodes().size();
      counts_["edges." + tag] = linked.edges().size();
      emit(Stage::Link, link_name(scope), emit_graph_json(linked));
    }
  }

  void analyze() {
    std::map<SourceKind, KnowledgeGraph> linked;
    for (SourceKind s : {SourceKind::Textbook, SourceKind::Slide}) {
      if (fs::exists(dir(Stage::Link) / link_name(s))) linked[s] = load_graph(Stage::Link, link_name(s));
    }
    std::vector<CourseGraphStats> stats;
    for (const auto& c : cfg_.courses) {
      CourseGraphStats st;
      st.course = c.name;
      for (SourceKind s : {SourceKind::Textbook, SourceKind::Slide}) {
        if (!c.documents.count(s)) continue;
        const std::size_t n = load_graph(Stage::Fuse, doc_name(c, s, ".graph.json")).nodes().size();
        auto& equiv = s == SourceKind::Textbook ? st.textbook_equiv : st.slide_equiv;
        (s == SourceKind::Textbook ? st.textbook_nodes : st.slide_nodes) = n;
        for (const auto& other : cfg_.courses) {
          if (other.name == c.name || !other.documents.count(s)) continue;
          equiv[other.name] = count_equiv_edges(linked.at(s), c.name, other.name, s);
        }
      }
      stats.push_back(std::move(st));
    }
    const CorrelationMatrix m = correlation_matrix(stats);
    const std::size_t n = m.courses.size();
    auto opt_number = [](const std::optional<double>& v) { return v ? number(*v) : Cell{}; };

    {
      const std::vector<Column> schema = {{"course_i", ColumnType::Text, false}, {"course_j", ColumnType::Text, false},
                                          {"Su", ColumnType::Number, true},       {"Sv", ColumnType::Number, true},
                                          {"S", ColumnType::Number, false},       {"single_source", ColumnType::Text, false}};
      std::vector<Row> rows;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          rows.push_back({text(m.courses[i]), text(m.courses[j]), opt_number(m.su[i][j]), opt_number(m.sv[i][j]),
                          number(m.s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))),
                          text(m.single_source[i][j] ? "true" : "false")});
        }
      emit(Stage::Analyze, "correlation.csv", emit_report_csv(rows, schema));
    }
    if (n >= 2) {
      const std::vector<Column> schema = {{"course", ColumnType::Text, false}, {"most_relevant", ColumnType::Text, false},
                                          {"degree", ColumnType::Number, false}, {"weak", ColumnType::Text, false}};
      std::vector<Row> rows;
      for (const auto& course : m.courses) {
        const Relevance r = most_relevant(m, course);
        rows.push_back({text(course), text(r.course), number(r.degree), text(r.weak ? "true" : "false")});
      }
      emit(Stage::Analyze, "most_relevant.csv", emit_report_csv(rows, schema));
    }

    const WeightMatrix w = normalize_weights(m, cfg_.weight_method);
    const std::vector<WeightEdge> pruned = prune_weight_edges(w, cfg_.prune_threshold);
    {
      const std::vector<Column> schema = {{"course_i", ColumnType::Text, false}, {"course_j", ColumnType::Text, false},
                                          {"weight", ColumnType::Number, false}};
      std::vector<Row> all_rows, pruned_rows;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j)
            all_rows.push_back({text(w.courses[i]), text(w.courses[j]),
                                number(w.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))});
      for (const auto& e : pruned) pruned_rows.push_back({text(w.courses[e.from]), text(w.courses[e.to]), number(e.weight)});
      emit(Stage::Analyze, "weights.csv", emit_report_csv(all_rows, schema));
      emit(Stage::Analyze, "pruned_edges.csv", emit_report_csv(pruned_rows, schema));
      json wg = {{"courses", w.courses}, {"edges", json::array()}};
      for (const auto& e : pruned) wg["edges"].push_back({{"from", e.from}, {"to", e.to}, {"weight", e.weight}});
      emit(Stage::Analyze, "weight_graph.json", wg.dump(2) + "\n");
    }
    counts_["pruned_edges"] = pruned.size();

    if (n >= 2) {
      const int k = std::min<int>(cfg_.k, static_cast<int>(n));
      if (k != cfg_.k) spdlog::warn("k={} exceeds the {} courses; clustering with k={}", cfg_.k, n, k);
      const SpectralResult sr = spectral_cluster(m, k, seed_);
      if (!sr.converged) spdlog::warn("spectral clustering: {}", sr.note);
      const std::vector<Column> schema = {{"course", ColumnType::Text, false}, {"cluster", ColumnType::Integer, false}};
      std::vector<Row> rows;
      for (std::size_t i = 0; i < n; ++i)
        rows.push_back({text(sr.courses[i]), integer(static_cast<std::size_t>(sr.labels[i]))});
      emit(Stage::Analyze, "clusters.csv", emit_report_csv(rows, schema));
      counts_["clusters"] = static_cast<std::size_t>(*std::max_element(sr.labels.begin(), sr.labels.end()) + 1);
    }

    {
      const std::vector<Column> rank_schema = {{"course", ColumnType::Text, false}, {"rank", ColumnType::Integer, false},
                                               {"concept", ColumnType::Text, false},
                                               {"frequency", ColumnType::Integer, false}};
      const std::vector<Column> core_schema = {{"course", ColumnType::Text, false}, {"concept", ColumnType::Text, false}};
      std::vector<Row> rank_rows, core_rows;
      for (const auto& c : cfg_.courses) {
        const KnowledgeGraph all = load_graph(Stage::Fuse, course_slug(c.name) + ".all.graph.json");
        const auto ranking = frequency_ranking(all, cfg_.top_n);
        for (std::size_t r = 0; r < ranking.size(); ++r)
          rank_rows.push_back({text(c.name), integer(r + 1), text(ranking[r].concept_name), integer(ranking[r].frequency)});
        std::map<SourceKind, KnowledgeGraph> per;
        for (SourceKind s : kSources)
          if (c.documents.count(s)) per[s] = load_graph(Stage::Fuse, doc_name(c, s, ".graph.json"));
        const auto core =
            core_concepts_intersection(per[SourceKind::Textbook], per[SourceKind::Slide], per[SourceKind::Syllabus]);
        for (const auto& concept_name : core) core_rows.push_back({text(c.name), text(concept_name)});
      }
      emit(Stage::Analyze, "frequency_ranking.csv", emit_report_csv(rank_rows, rank_schema));
      emit(Stage::Analyze, "core_concepts.csv", emit_report_csv(core_rows, core_schema));
      counts_["core_concepts"] = core_rows.size();
    }
    counts_["courses"] = n;
  }

  void export_all() {
    std::vector<std::string> names;
    for (SourceKind s : kSources)
      if (fs::exists(dir(Stage::Link) / link_name(s))) names.push_back(source_tag(s));
    names.push_back("all");
    std::size_t statements = 0;
    for (const ExportProfile& profile : cfg_.exports) {
      profile.validate();
      switch (profile.format) {
        case ExportFormat::CypherScript:
        case ExportFormat::GraphJson:
        case ExportFormat::GraphML:
          for (const auto& name : names) {
            const KnowledgeGraph g = load_graph(Stage::Link, name + ".graph.json");
            if (profile.format == ExportFormat::CypherScript) {
              const std::string script = emit_cypher(g, profile.flag("include_provenance", true));
              statements += static_cast<std::size_t>(std::count(script.begin(), script.end(), '\n'));
              emit(Stage::Export, name + ".cypher", script);
            } else if (profile.format == ExportFormat::GraphJson) {
              emit(Stage::Export, name + ".graph.json", emit_graph_json(g));
            } else {
              emit(Stage::Export, name + ".graphml", emit_graphml(g, profile.flag("include_provenance", true)));
            }
          }
          break;
        case ExportFormat::Dot: {
          const json wg = json::parse(read_file(dir(Stage::Analyze) / "weight_graph.json"));
          const auto courses = wg.at("courses").get<std::vector<std::string>>();
          std::vector<WeightEdge> edges;
          for (const json& e : wg.at("edges"))
            edges.push_back({e.at("from").get<std::size_t>(), e.at("to").get<std::size_t>(), e.at("weight").get<double>()});
          emit(Stage::Export, "weights.dot", emit_weight_graph_dot(courses, edges));
          break;
        }
        case ExportFormat::Csv:
          emit(Stage::Export, "anomalies.csv", read_file(dir(Stage::Clean) / "anomalies.csv"));
          emit(Stage::Export, "correlation.csv", read_file(dir(Stage::Analyze) / "correlation.csv"));
          if (fs::exists(dir(Stage::Analyze) / "most_relevant.csv"))
            emit(Stage::Export, "most_relevant.csv", read_file(dir(Stage::Analyze) / "most_relevant.csv"));
          break;
      }
    }
    counts_["files"] = outputs_.size();
    counts_["cypher_statements"] = statements;
  }

  const PipelineConfig& cfg_;
  fs::path out_root_;
  std::uint64_t seed_;
  bool apply_corrections_;
  std::vector<OutputFile> outputs_;
  std::map<std::string, std::size_t> counts_;
  std::shared_ptr<NdjsonAdapter> embedding_;
  bool warned_semantic_ = false;
};

}  // namespace

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Ingest: return "ingest";
    case Stage::Build: return "build";
    case Stage::Clean: return "clean";
    case Stage::Fuse: return "fuse";
    case Stage::Link: return "link";
    case Stage::Analyze: return "analyze";
    case Stage::Export: return "export";
    case Stage::All: return "all";
  }
  return "all";
}

Stage parse_stage(std::string_view text) {
  for (Stage s : {Stage::Ingest, Stage::Build, Stage::Clean, Stage::Fuse, Stage::Link, Stage::Analyze, Stage::Export,
                  Stage::All}) {
    if (to_string(s) == text) return s;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown stage '" + std::string(text) + "'");
}

bool RunReport::ok() const {
  return std::all_of(stages.begin(), stages.end(), [](const StageReport& s) { return s.error.empty(); });
}

RunReport run_pipeline(const PipelineConfig& config, Stage stage, const RunOptions& options) {
  config.validate();
  Runner runner(config, options);
  return runner.run(stage);
}

}  // namespace ckg
