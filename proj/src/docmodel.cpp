#include "ckg/docmodel.hpp"

#include <json.hpp>

#include <algorithm>
#include <utility>

#include "ckg/error.hpp"
#include "ckg/text.hpp"
#include "ckg/unicode.hpp"

namespace ckg {

namespace {

struct Line {
  std::string_view text;   // without the line terminator and trailing '\r'
  std::size_t begin = 0;   // scalar offset of the first character
  std::size_t next = 0;    // scalar offset just past the terminator
  std::size_t byte_begin = 0;
  std::size_t byte_next = 0;
  std::size_t number = 0;  // 1-based
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t byte = 0;
  std::size_t scalar = 0;
  std::size_t number = 1;
  while (byte < text.size()) {
    const std::size_t nl = text.find('\n', byte);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    const std::size_t next_byte = nl == std::string_view::npos ? text.size() : nl + 1;
    std::string_view content = text.substr(byte, end - byte);
    const std::size_t scalars = unicode::length(text.substr(byte, next_byte - byte));
    if (!content.empty() && content.back() == '\r') content.remove_suffix(1);
    lines.push_back({content, scalar, scalar + scalars, byte, next_byte, number});
    byte = next_byte;
    scalar += scalars;
    ++number;
  }
  return lines;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    const std::size_t next = value.find(';', pos);
    const std::size_t end = next == std::string_view::npos ? value.size() : next;
    const std::string item = normalize_text(value.substr(pos, end - pos));
    if (!item.empty()) out.push_back(item);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i != 0) out += "; ";
    out += items[i];
  }
  return out;
}

struct FrontMatter {
  CourseMeta meta;
  bool has_name = false;
  std::size_t body_line = 0;  // index of the first line after the block
};

// Returns nullopt when the document has no front-matter block.
std::optional<FrontMatter> read_front_matter(const std::vector<Line>& lines) {
  if (lines.empty() || trim(lines.front().text) != "---") return std::nullopt;
  FrontMatter fm;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i].text);
    if (line == "---") {
      fm.body_line = i + 1;
      return fm;
    }
    if (line.empty() || line.front() == '#') continue;
    const std::size_t colon = line.find(':');
    if (colon == std::string_view::npos)
      throw Error(ErrorCode::MalformedFrontMatter,
                  "line " + std::to_string(lines[i].number) + ": expected 'key: value'");
    const std::string_view key = trim(line.substr(0, colon));
    const std::string_view value = trim(line.substr(colon + 1));
    if (key == "name") {
      fm.meta.name = normalize_text(value);
      fm.has_name = !fm.meta.name.empty();
    } else if (key == "school_term") {
      fm.meta.school_term = normalize_text(value);
    } else if (key == "background") {
      fm.meta.background = normalize_text(value);
    } else if (key == "url") {
      fm.meta.url = normalize_text(value);
    } else if (key == "coursePrerequisites") {
      fm.meta.course_prerequisites = split_list(value);
    } else if (key == "educationalAlignments") {
      fm.meta.educational_alignments = split_list(value);
    }
  }
  throw Error(ErrorCode::MalformedFrontMatter, "front matter opened with '---' is never closed");
}

}  // namespace

std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::Textbook: return "Textbook";
    case SourceKind::Slide: return "Slide";
    case SourceKind::Syllabus: return "Syllabus";
  }
  return "Textbook";
}

SourceKind parse_source_kind(std::string_view text) {
  const std::string key = fold_case(text);
  if (key == "textbook") return SourceKind::Textbook;
  if (key == "slide" || key == "slides") return SourceKind::Slide;
  if (key == "syllabus") return SourceKind::Syllabus;
  throw Error(ErrorCode::ParseError, "unknown source kind '" + std::string(text) + "'");
}

int max_heading_depth(SourceKind kind) { return kind == SourceKind::Syllabus ? 1 : 3; }

std::string Locator::str() const { return path + ":" + std::to_string(line); }

std::vector<std::size_t> DocumentTree::children(std::optional<std::size_t> parent) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < headings.size(); ++i) {
    if (headings[i].parent == parent) out.push_back(i);
  }
  return out;
}

void HeadingRules::add(int depth, std::string pattern) {
  try {
    std::regex re(pattern, std::regex::ECMAScript);
    rules.push_back({depth, std::move(pattern), std::move(re)});
  } catch (const std::regex_error& e) {
    throw Error(ErrorCode::InvalidRules, "bad heading pattern '" + pattern + "': " + e.what());
  }
}

void HeadingRules::validate_for(SourceKind kind) const {
  const int max_depth = max_heading_depth(kind);
  for (const auto& rule : rules) {
    if (rule.depth < 1 || rule.depth > max_depth)
      throw Error(ErrorCode::InvalidRules, std::string(to_string(kind)) + " headings allow depth 1.." +
                                               std::to_string(max_depth) + ", got " +
                                               std::to_string(rule.depth));
  }
  for (int depth = 1; depth <= max_depth; ++depth) {
    const bool covered =
        std::any_of(rules.begin(), rules.end(), [&](const HeadingRule& r) { return r.depth == depth; });
    if (!covered)
      throw Error(ErrorCode::InvalidRules, std::string(to_string(kind)) + " rules have no pattern for depth " +
                                               std::to_string(depth));
  }
}

HeadingRules default_heading_rules(SourceKind kind) {
  HeadingRules r;
  r.add(1, R"(^#[ \t]+(.+)$)");
  r.add(1, R"(^\d+\.[ \t]+(.+)$)");
  if (max_heading_depth(kind) >= 2) {
    r.add(2, R"(^##[ \t]+(.+)$)");
    r.add(2, R"(^\d+\.\d+\.?[ \t]+(.+)$)");
  }
  if (max_heading_depth(kind) >= 3) {
    r.add(3, R"(^###[ \t]+(.+)$)");
    r.add(3, R"(^\d+\.\d+\.\d+\.?[ \t]+(.+)$)");
  }
  return r;
}

CourseMeta parse_front_matter(std::string_view text) {
  const auto fm = read_front_matter(split_lines(text));
  if (!fm || !fm->has_name) throw Error(ErrorCode::MissingName, "front matter has no 'name'");
  return fm->meta;
}

DocumentTree parse_course_document(std::string_view text, const HeadingRules& rules,
                                   const ParseOptions& options) {
  if (!unicode::is_valid(text)) throw Error(ErrorCode::ParseError, options.path + ": invalid UTF-8");
  rules.validate_for(options.source);

  const std::vector<Line> lines = split_lines(text);
  const auto fm = read_front_matter(lines);

  DocumentTree tree;
  tree.source = options.source;
  std::size_t first = 0;
  if (fm) {
    tree.meta = fm->meta;
    first = fm->body_line;
  }
  if (tree.meta.name.empty()) tree.meta.name = normalize_text(options.fallback_course_name);
  if (tree.meta.name.empty()) throw Error(ErrorCode::MissingName, options.path + ": no course name");

  const std::size_t total_scalars = lines.empty() ? 0 : lines.back().next;
  std::vector<std::size_t> stack;  // open heading indices
  std::vector<std::size_t> sibling_count;
  std::size_t root_count = 0;

  auto close_body = [&](std::size_t end_line) {
    if (tree.headings.empty()) return;
    Heading& h = tree.headings.back();
    const std::size_t end_scalar = end_line < lines.size() ? lines[end_line].begin : total_scalars;
    const std::size_t end_byte = end_line < lines.size() ? lines[end_line].byte_begin : text.size();
    const std::size_t start_line = h.locator.line;  // index of the following line
    const std::size_t start_scalar = start_line < lines.size() ? lines[start_line].begin : total_scalars;
    const std::size_t start_byte = start_line < lines.size() ? lines[start_line].byte_begin : text.size();
    h.body.begin = start_scalar;
    h.body.end = end_scalar;
    h.body.first_line = h.locator.line + 1;
    h.body.text = std::string(text.substr(start_byte, end_byte - start_byte));
  };

  for (std::size_t i = first; i < lines.size(); ++i) {
    const std::string line(lines[i].text);
    const HeadingRule* matched = nullptr;
    std::string title;
    for (const auto& rule : rules.rules) {
      std::smatch m;
      if (std::regex_search(line, m, rule.regex)) {
        title = normalize_text(m.size() > 1 && m[1].matched ? m[1].str() : m[0].str());
        if (title.empty()) continue;
        matched = &rule;
        break;
      }
    }
    if (matched == nullptr) continue;

    close_body(i);
    while (!stack.empty() && tree.headings[stack.back()].depth >= matched->depth) stack.pop_back();
    const int parent_depth = stack.empty() ? 0 : tree.headings[stack.back()].depth;
    if (matched->depth > parent_depth + 1)
      throw Error(ErrorCode::DepthJump, options.path + ":" + std::to_string(lines[i].number) +
                                            ": heading depth " + std::to_string(matched->depth) +
                                            " under depth " + std::to_string(parent_depth));
    Heading h;
    h.title = std::move(title);
    h.depth = matched->depth;
    h.locator = {options.path, lines[i].number};
    if (stack.empty()) {
      h.ordinal = ++root_count;
    } else {
      h.parent = stack.back();
      h.ordinal = ++sibling_count[stack.back()];
    }
    tree.headings.push_back(std::move(h));
    sibling_count.push_back(0);
    stack.push_back(tree.headings.size() - 1);
  }
  close_body(lines.size());

  if (tree.headings.empty()) throw Error(ErrorCode::NoHeadings, options.path + ": no heading matched");
  return tree;
}

std::string to_outline(const DocumentTree& tree) {
  std::string out = "---\n";
  out += "name: " + tree.meta.name + "\n";
  out += "school_term: " + tree.meta.school_term + "\n";
  out += "background: " + tree.meta.background + "\n";
  out += "url: " + tree.meta.url + "\n";
  out += "coursePrerequisites: " + join_list(tree.meta.course_prerequisites) + "\n";
  out += "educationalAlignments: " + join_list(tree.meta.educational_alignments) + "\n";
  out += "---\n";
  for (const auto& h : tree.headings) {
    out += std::string(static_cast<std::size_t>(h.depth), '#') + " " + h.title + "\n";
    out += h.body.text;
    if (!h.body.text.empty() && h.body.text.back() != '\n') out += "\n";
  }
  return out;
}

std::string document_tree_to_json(const DocumentTree& tree) {
  nlohmann::json j;
  j["meta"] = {{"school_term", tree.meta.school_term},
               {"name", tree.meta.name},
               {"background", tree.meta.background},
               {"url", tree.meta.url},
               {"coursePrerequisites", tree.meta.course_prerequisites},
               {"educationalAlignments", tree.meta.educational_alignments}};
  j["source"] = std::string(to_string(tree.source));
  j["headings"] = nlohmann::json::array();
  for (const auto& h : tree.headings) {
    nlohmann::json hj = {{"title", h.title},
                         {"depth", h.depth},
                         {"ordinal", h.ordinal},
                         {"path", h.locator.path},
                         {"line", h.locator.line},
                         {"body", {{"begin", h.body.begin},
                                   {"end", h.body.end},
                                   {"first_line", h.body.first_line},
                                   {"text", h.body.text}}}};
    hj["parent"] = h.parent ? nlohmann::json(*h.parent) : nlohmann::json(nullptr);
    j["headings"].push_back(std::move(hj));
  }
  return j.dump(2) + "\n";
}

DocumentTree document_tree_from_json(std::string_view text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    DocumentTree tree;
    const auto& m = j.at("meta");
    tree.meta.school_term = m.at("school_term").get<std::string>();
    tree.meta.name = m.at("name").get<std::string>();
    tree.meta.background = m.at("background").get<std::string>();
    tree.meta.url = m.at("url").get<std::string>();
    tree.meta.course_prerequisites = m.at("coursePrerequisites").get<std::vector<std::string>>();
    tree.meta.educational_alignments = m.at("educationalAlignments").get<std::vector<std::string>>();
    tree.source = parse_source_kind(j.at("source").get<std::string>());
    for (const auto& hj : j.at("headings")) {
      Heading h;
      h.title = hj.at("title").get<std::string>();
      h.depth = hj.at("depth").get<int>();
      h.ordinal = hj.at("ordinal").get<std::size_t>();
      h.locator = {hj.at("path").get<std::string>(), hj.at("line").get<std::size_t>()};
      if (!hj.at("parent").is_null()) h.parent = hj.at("parent").get<std::size_t>();
      const auto& b = hj.at("body");
      h.body = {b.at("begin").get<std::size_t>(), b.at("end").get<std::size_t>(),
                b.at("first_line").get<std::size_t>(), b.at("text").get<std::string>()};
      tree.headings.push_back(std::move(h));
    }
    return tree;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("document tree JSON: ") + e.what());
  }
}

}  // namespace ckg
