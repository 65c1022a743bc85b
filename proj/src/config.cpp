#include "ckg/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "ckg/error.hpp"

namespace ckg {

namespace fs = std::filesystem;

namespace {

struct Entry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct Section {
  std::string name;
  std::size_t line = 0;
  std::vector<Entry> entries;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto next = s.find(',', pos);
    std::string item = trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (!item.empty()) out.push_back(std::move(item));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& message) {
  throw Error(ErrorCode::ConfigError, "line " + std::to_string(line) + ": " + message);
}

std::vector<Section> tokenize(std::string_view text) {
  std::vector<Section> sections;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      sections.push_back({trim(std::string_view(line).substr(1, line.size() - 2)), line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    if (sections.empty()) fail(line_no, "entry outside any section");
    sections.back().entries.push_back({trim(std::string_view(line).substr(0, eq)),
                                       trim(std::string_view(line).substr(eq + 1)), line_no});
  }
  return sections;
}

bool parse_bool(const Entry& e) {
  if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
  if (e.value == "false" || e.value == "no" || e.value == "0") return false;
  fail(e.line, "'" + e.key + "' expects true or false");
}

double parse_double(const Entry& e) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || ptr != e.value.data() + e.value.size()) fail(e.line, "'" + e.key + "' expects a number");
  return v;
}

template <typename T>
T parse_integer(const Entry& e) {
  T v{};
  const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || ptr != e.value.data() + e.value.size()) fail(e.line, "'" + e.key + "' expects an integer");
  return v;
}

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  return (p.is_absolute() ? p : base / p).lexically_normal();
}

void apply_policy(const Section& s, MatchPolicy& policy) {
  for (const Entry& e : s.entries) {
    if (e.key == "exact") {
      policy.exact_after_normalize = parse_bool(e);
    } else if (e.key == "literal") {
      policy.literal_enabled = parse_bool(e);
    } else if (e.key == "literal_threshold") {
      policy.literal_threshold = parse_double(e);
    } else if (e.key == "semantic") {
      policy.semantic_enabled = parse_bool(e);
    } else if (e.key == "semantic_threshold") {
      policy.semantic_threshold = parse_double(e);
    } else if (e.key == "match_kinds") {
      policy.match_kinds.clear();
      try {
        for (const auto& k : split_list(e.value)) policy.match_kinds.insert(parse_entity_kind(k));
      } catch (const Error& err) {
        fail(e.line, err.what());
      }
    } else {
      fail(e.line, "unknown key '" + e.key + "' in [" + s.name + "]");
    }
  }
}

}  // namespace

std::string course_slug(std::string_view name) {
  std::string out;
  bool pending = false;
  for (unsigned char c : name) {
    if (std::isalnum(c)) {
      if (pending && !out.empty()) out += '_';
      out += static_cast<char>(std::tolower(c));
      pending = false;
    } else {
      pending = true;
    }
  }
  return out.empty() ? "course" : out;
}

void PipelineConfig::validate() const {
  if (courses.empty()) throw Error(ErrorCode::ConfigError, "no [course] sections");
  if (!fs::is_directory(corpus_root))
    throw Error(ErrorCode::ConfigError, "corpus root '" + corpus_root.string() + "' is not a directory");
  if (!fs::is_regular_file(gazetteer_path))
    throw Error(ErrorCode::ConfigError, "gazetteer '" + gazetteer_path.string() + "' does not exist");
  std::set<std::string> names;
  std::set<std::string> slugs;
  for (const auto& c : courses) {
    if (c.name.empty()) throw Error(ErrorCode::ConfigError, "course without a name");
    if (!names.insert(c.name).second) throw Error(ErrorCode::ConfigError, "course '" + c.name + "' listed twice");
    if (!slugs.insert(course_slug(c.name)).second)
      throw Error(ErrorCode::ConfigError, "courses share the file slug '" + course_slug(c.name) + "'");
    if (c.documents.empty()) throw Error(ErrorCode::ConfigError, "course '" + c.name + "' has no documents");
    for (const auto& [kind, path] : c.documents) {
      if (!fs::is_regular_file(path))
        throw Error(ErrorCode::ConfigError, "document '" + path.string() + "' does not exist");
    }
  }
  for (const auto& [kind, rules] : heading_rules) {
    try {
      rules.validate_for(kind);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, e.what());
    }
  }
  try {
    fusion_policy.validate();
    link_policy.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  if (!(min_correction_score >= 0.0 && min_correction_score <= 1.0))
    throw Error(ErrorCode::ConfigError, "min_correction_score must lie in [0,1]");
  if (!(prune_threshold >= 0.0 && prune_threshold <= 1.0))
    throw Error(ErrorCode::ConfigError, "prune_threshold must lie in [0,1]");
  if (k < 2) throw Error(ErrorCode::ConfigError, "k must be at least 2");
  for (const auto& p : exports) p.validate();
  for (const auto& cmd : {adapters.ner, adapters.embedding, adapters.corrector}) {
    if (cmd && cmd->empty()) throw Error(ErrorCode::ConfigError, "empty adapter command");
  }
}

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  PipelineConfig cfg;
  cfg.corpus_root = base_dir;
  const auto sections = tokenize(text);
  std::optional<std::string> gazetteer;
  std::vector<std::string> formats = {"cypher", "json", "graphml", "dot", "csv"};
  std::map<std::string, std::string> export_options;

  // [corpus] first so course paths resolve against the final root.
  for (const Section& s : sections) {
    if (s.name != "corpus") continue;
    for (const Entry& e : s.entries) {
      if (e.key == "root") {
        cfg.corpus_root = resolve(base_dir, e.value);
      } else if (e.key == "gazetteer") {
        gazetteer = e.value;
      } else {
        fail(e.line, "unknown key '" + e.key + "' in [corpus]");
      }
    }
  }
  if (!gazetteer) throw Error(ErrorCode::ConfigError, "[corpus] gazetteer is required");
  cfg.gazetteer_path = resolve(cfg.corpus_root, *gazetteer);

  for (const Section& s : sections) {
    if (s.name == "corpus") continue;
    if (s.name == "course") {
      CourseSources course;
      for (const Entry& e : s.entries) {
        if (e.key == "name") {
          course.name = e.value;
        } else if (e.key == "textbook" || e.key == "slides" || e.key == "syllabus") {
          course.documents[parse_source_kind(e.key)] = resolve(cfg.corpus_root, e.value);
        } else {
          fail(e.line, "unknown key '" + e.key + "' in [course]");
        }
      }
      cfg.courses.push_back(std::move(course));
    } else if (s.name.starts_with("headings.")) {
      SourceKind kind;
      try {
        kind = parse_source_kind(s.name.substr(9));
      } catch (const Error&) {
        fail(s.line, "unknown source kind in [" + s.name + "]");
      }
      HeadingRules& rules = cfg.heading_rules[kind];
      for (const Entry& e : s.entries) {
        if (e.key != "rule") fail(e.line, "unknown key '" + e.key + "' in [" + s.name + "]");
        const auto space = e.value.find_first_of(" \t");
        if (space == std::string::npos) fail(e.line, "rule expects '<depth> <regex>'");
        Entry depth{e.key, e.value.substr(0, space), e.line};
        try {
          rules.add(parse_integer<int>(depth), trim(std::string_view(e.value).substr(space + 1)));
        } catch (const Error& err) {
          fail(e.line, err.what());
        }
      }
    } else if (s.name == "extraction") {
      for (const Entry& e : s.entries) {
        if (e.key != "term_pattern") fail(e.line, "unknown key '" + e.key + "' in [extraction]");
        cfg.term_patterns.push_back(e.value);
      }
    } else if (s.name == "fusion") {
      apply_policy(s, cfg.fusion_policy);
    } else if (s.name == "link") {
      apply_policy(s, cfg.link_policy);
    } else if (s.name == "cleaning") {
      for (const Entry& e : s.entries) {
        if (e.key == "apply_corrections") {
          cfg.apply_corrections = parse_bool(e);
        } else if (e.key == "min_correction_score") {
          cfg.min_correction_score = parse_double(e);
        } else if (e.key == "max_edit_distance") {
          cfg.max_edit_distance = parse_integer<std::size_t>(e);
        } else {
          fail(e.line, "unknown key '" + e.key + "' in [cleaning]");
        }
      }
    } else if (s.name == "analytics") {
      for (const Entry& e : s.entries) {
        if (e.key == "k") {
          cfg.k = parse_integer<int>(e);
        } else if (e.key == "prune_threshold") {
          cfg.prune_threshold = parse_double(e);
        } else if (e.key == "seed") {
          cfg.seed = parse_integer<std::uint64_t>(e);
        } else if (e.key == "top_n") {
          cfg.top_n = parse_integer<std::size_t>(e);
        } else if (e.key == "weight_method") {
          if (e.value == "rowsum") {
            cfg.weight_method = WeightMethod::RowSum;
          } else if (e.value == "minmax") {
            cfg.weight_method = WeightMethod::MinMax;
          } else {
            fail(e.line, "weight_method expects rowsum or minmax");
          }
        } else {
          fail(e.line, "unknown key '" + e.key + "' in [analytics]");
        }
      }
    } else if (s.name == "export") {
      for (const Entry& e : s.entries) {
        if (e.key == "formats") {
          formats = split_list(e.value);
        } else if (e.key == "include_provenance") {
          parse_bool(e);
          export_options[e.key] = e.value == "true" || e.value == "yes" || e.value == "1" ? "true" : "false";
        } else {
          fail(e.line, "unknown key '" + e.key + "' in [export]");
        }
      }
    } else if (s.name == "adapters") {
      for (const Entry& e : s.entries) {
        if (e.key == "ner") {
          cfg.adapters.ner = e.value;
        } else if (e.key == "embedding") {
          cfg.adapters.embedding = e.value;
        } else if (e.key == "corrector") {
          cfg.adapters.corrector = e.value;
        } else {
          fail(e.line, "unknown key '" + e.key + "' in [adapters]");
        }
      }
    } else {
      fail(s.line, "unknown section [" + s.name + "]");
    }
  }

  for (const auto& name : formats) {
    ExportProfile p;
    try {
      p.format = parse_export_format(name);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, e.what());
    }
    p.path = std::string(to_string(p.format));
    if (p.format == ExportFormat::CypherScript || p.format == ExportFormat::GraphML) p.options = export_options;
    cfg.exports.push_back(std::move(p));
  }

  std::ostringstream fp;
  for (const Section& s : sections) {
    fp << '[' << s.name << "]\n";
    for (const Entry& e : s.entries) fp << e.key << '=' << e.value << '\n';
  }
  cfg.fingerprint = fp.str();

  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const fs::path base = fs::absolute(path).parent_path();
  return parse_config(buf.str(), base);
}

}  // namespace ckg
