#include "ckg/cleaning.hpp"

#include <unicode/uchar.h>

#include <algorithm>
#include <cstdlib>
#include <tuple>

#include "ckg/error.hpp"
#include "ckg/unicode.hpp"

namespace ckg {

namespace {

struct Token {
  std::size_t begin;
  std::size_t end;
};

std::vector<Token> tokens_of(const std::u32string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && unicode::is_whitespace(s[i])) ++i;
    const std::size_t b = i;
    while (i < s.size() && !unicode::is_whitespace(s[i])) ++i;
    if (i > b) out.push_back({b, i});
  }
  return out;
}

bool is_operator(char32_t c) {
  switch (c) {
    case U'=': case U'+': case U'-': case U'*': case U'/': case U'^': case U'_':
    case U'<': case U'>': case U'|': case U'~': case U'\\':
      return true;
    default:
      return u_charType(static_cast<UChar32>(c)) == U_MATH_SYMBOL;
  }
}

bool is_open(char32_t c) { return c == U'(' || c == U'[' || c == U'{'; }
bool is_close(char32_t c) { return c == U')' || c == U']' || c == U'}'; }
char32_t opener_for(char32_t c) { return c == U')' ? U'(' : c == U']' ? U'[' : U'{'; }

bool single_letter_residue(const std::u32string& s, const Token& t) {
  if (t.end - t.begin != 1) return false;
  const char32_t c = s[t.begin];
  const bool letter = (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
  return letter && c != U'a' && c != U'A' && c != U'I';
}

bool operator_token(const std::u32string& s, const Token& t) {
  for (std::size_t i = t.begin; i < t.end; ++i) {
    if (!is_operator(s[i])) return false;
  }
  return true;
}

void formula_anomalies(const std::string& id, const std::u32string& s, const Lexicon& lexicon,
                       std::vector<Anomaly>& out) {
  std::vector<std::pair<char32_t, std::size_t>> stack;
  std::size_t dollars = 0;
  std::size_t last_dollar = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (is_open(s[i])) {
      stack.push_back({s[i], i});
    } else if (is_close(s[i])) {
      if (stack.empty() || stack.back().first != opener_for(s[i])) {
        out.push_back({id, AnomalyCategory::DanglingFormulaSymbol, i, i + 1, std::nullopt});
      } else {
        stack.pop_back();
      }
    } else if (s[i] == U'$') {
      ++dollars;
      last_dollar = i;
    }
  }
  for (const auto& [c, pos] : stack)
    out.push_back({id, AnomalyCategory::DanglingFormulaSymbol, pos, pos + 1, std::nullopt});
  if (dollars % 2 == 1)
    out.push_back({id, AnomalyCategory::DanglingFormulaSymbol, last_dollar, last_dollar + 1, std::nullopt});

  const std::vector<Token> tokens = tokens_of(s);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (operator_token(s, t)) {
      out.push_back({id, AnomalyCategory::DanglingFormulaSymbol, t.begin, t.end, std::nullopt});
      continue;
    }
    if (tokens.size() < 2 || !single_letter_residue(s, t)) continue;
    // A letter that is a word of some known term ("z transform") is not residue.
    if (lexicon.has_token(fold_case(unicode::encode(s.substr(t.begin, 1))))) continue;
    const bool at_edge = i == 0 || i + 1 == tokens.size();
    const bool near_operator = (i > 0 && operator_token(s, tokens[i - 1])) ||
                               (i + 1 < tokens.size() && operator_token(s, tokens[i + 1]));
    if (at_edge || near_operator)
      out.push_back({id, AnomalyCategory::DanglingFormulaSymbol, t.begin, t.end, std::nullopt});
  }
}

}  // namespace

std::string_view to_string(AnomalyCategory category) {
  switch (category) {
    case AnomalyCategory::MixedScriptFragment: return "MixedScriptFragment";
    case AnomalyCategory::DanglingFormulaSymbol: return "DanglingFormulaSymbol";
    case AnomalyCategory::ControlCharacter: return "ControlCharacter";
    case AnomalyCategory::EmptyName: return "EmptyName";
    case AnomalyCategory::SuspectedMisspelling: return "SuspectedMisspelling";
  }
  return "EmptyName";
}

void Lexicon::add(std::string_view term, std::size_t count) {
  const std::string key = match_key(term);
  if (key.empty()) return;
  terms_[key] += count;
  display_.try_emplace(key, normalize_text(term));
  for (auto& token : split_tokens(key)) tokens_.insert(std::move(token));
}

std::size_t Lexicon::frequency(std::string_view key) const {
  const auto it = terms_.find(std::string(key));
  return it == terms_.end() ? 0 : it->second;
}

const std::string& Lexicon::display(const std::string& key) const {
  const auto it = display_.find(key);
  return it == display_.end() ? key : it->second;
}

CorrectionScorer frequency_similarity_scorer(const Lexicon& lexicon) {
  return [&lexicon](std::string_view name, std::string_view candidate) {
    const std::string key = match_key(candidate);
    const double freq = static_cast<double>(lexicon.frequency(key));
    return freq * (1.0 - normalized_edit_distance(match_key(name), key));
  };
}

std::string correct_term(std::string_view name, std::span<const std::string> candidates,
                         const CorrectionScorer& scorer) {
  if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "correct_term needs at least one candidate");
  const std::string* best = nullptr;
  double best_score = 0.0;
  for (const auto& c : candidates) {
    const double score = scorer(name, c);
    if (best == nullptr || score > best_score || (score == best_score && c < *best)) {
      best = &c;
      best_score = score;
    }
  }
  return *best;
}

CorrectionStrategy default_correction_strategy(const Lexicon& lexicon) {
  return [&lexicon](std::string_view name, std::span<const std::string> candidates) {
    std::string best = correct_term(name, candidates, frequency_similarity_scorer(lexicon));
    const double score = 1.0 - normalized_edit_distance(match_key(name), match_key(best));
    return Suggestion{std::move(best), score};
  };
}

std::vector<Anomaly> detect_anomalies(const KnowledgeGraph& g, const Lexicon& lexicon,
                                      const DetectOptions& options) {
  const CorrectionStrategy strategy = options.strategy ? options.strategy : default_correction_strategy(lexicon);
  std::vector<Anomaly> out;
  for (const auto& [id, node] : g.nodes()) {
    if (node.kind == EntityKind::Course) continue;
    const std::u32string s = unicode::decode(node.name);
    if (normalize_text(node.name).empty()) {
      out.push_back({id, AnomalyCategory::EmptyName, 0, s.size(), std::nullopt});
      continue;
    }

    for (std::size_t i = 0; i < s.size();) {
      if (!unicode::is_control(s[i]) || unicode::is_whitespace(s[i])) {
        ++i;
        continue;
      }
      const std::size_t b = i;
      while (i < s.size() && unicode::is_control(s[i]) && !unicode::is_whitespace(s[i])) ++i;
      out.push_back({id, AnomalyCategory::ControlCharacter, b, i, std::nullopt});
    }

    for (const Token& t : tokens_of(s)) {
      bool han = false;
      bool latin = false;
      for (std::size_t i = t.begin; i < t.end; ++i) {
        han = han || unicode::is_han(s[i]);
        latin = latin || unicode::is_latin_letter(s[i]);
      }
      if (han && latin) out.push_back({id, AnomalyCategory::MixedScriptFragment, t.begin, t.end, std::nullopt});
    }

    formula_anomalies(id, s, lexicon, out);

    const std::string key = match_key(node.name);
    if (key.empty() || lexicon.contains(key)) continue;
    const std::u32string key32 = unicode::decode(key);
    std::optional<Token> oov;
    for (const Token& t : tokens_of(key32)) {
      if (!lexicon.has_token(unicode::encode(key32.substr(t.begin, t.end - t.begin)))) {
        oov = t;
        break;
      }
    }
    if (!oov) continue;
    std::vector<std::string> candidates;
    for (const auto& [term, freq] : lexicon.terms()) {
      const std::u32string t32 = unicode::decode(term);
      const std::size_t diff = t32.size() > key32.size() ? t32.size() - key32.size() : key32.size() - t32.size();
      if (diff > options.max_edit_distance) continue;
      if (edit_distance(key32, t32) <= options.max_edit_distance) candidates.push_back(lexicon.display(term));
    }
    if (candidates.empty()) continue;
    Suggestion suggestion = strategy(key, candidates);
    suggestion.score = std::clamp(suggestion.score, 0.0, 1.0);
    const std::size_t b = std::min(oov->begin, s.size());
    const std::size_t e = std::min(oov->end, s.size());
    out.push_back({id, AnomalyCategory::SuspectedMisspelling, b, e, std::move(suggestion)});
  }
  std::sort(out.begin(), out.end(), [](const Anomaly& a, const Anomaly& b) {
    return std::tuple(a.node_id, a.category, a.span_begin, a.span_end) <
           std::tuple(b.node_id, b.category, b.span_begin, b.span_end);
  });
  return out;
}

CleanResult apply_corrections(const KnowledgeGraph& g, std::span<const Anomaly> anomalies, double min_score) {
  std::map<std::string, std::string> renames;
  for (const auto& a : anomalies) {
    if (a.category != AnomalyCategory::SuspectedMisspelling || !a.suggestion) continue;
    if (a.suggestion->score < min_score || !g.find(a.node_id)) continue;
    renames.try_emplace(a.node_id, a.suggestion->text);
  }
  CleanResult result;
  result.graph.scope = g.scope;
  for (const auto& [id, node] : g.nodes()) {
    KnowledgeNode copy = node;
    if (const auto it = renames.find(id); it != renames.end()) {
      copy.name = it->second;
      result.corrected.push_back(id);
    }
    result.graph.add_node(std::move(copy));
  }
  for (const auto& [key, edge] : g.edges()) result.graph.add_edge(edge);
  return result;
}

}  // namespace ckg
