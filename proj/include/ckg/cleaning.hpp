#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ckg/graph.hpp"
#include "ckg/text.hpp"

namespace ckg {

enum class AnomalyCategory {
  MixedScriptFragment,
  DanglingFormulaSymbol,
  ControlCharacter,
  EmptyName,
  SuspectedMisspelling,
};

std::string_view to_string(AnomalyCategory category);

struct Suggestion {
  std::string text;
  double score = 0.0;  // [0,1]

  bool operator==(const Suggestion&) const = default;
};

struct Anomaly {
  std::string node_id;
  AnomalyCategory category = AnomalyCategory::EmptyName;
  std::size_t span_begin = 0;  // scalar offsets into the node name
  std::size_t span_end = 0;
  std::optional<Suggestion> suggestion;

  bool operator==(const Anomaly&) const = default;
};

/// Known terms with corpus frequencies, keyed by match key.
class Lexicon {
 public:
  void add(std::string_view term, std::size_t count = 1);

  bool contains(std::string_view key) const { return terms_.count(std::string(key)) != 0; }
  std::size_t frequency(std::string_view key) const;
  bool has_token(std::string_view token) const { return tokens_.count(std::string(token)) != 0; }
  const std::map<std::string, std::size_t>& terms() const { return terms_; }
  /// Display form of a key (first spelling added).
  const std::string& display(const std::string& key) const;

 private:
  std::map<std::string, std::size_t> terms_;
  std::map<std::string, std::string> display_;
  std::set<std::string> tokens_;
};

/// Scores one candidate correction for a name.
using CorrectionScorer = std::function<double(std::string_view name, std::string_view candidate)>;

/// frequency(candidate) * (1 - normalized_edit_distance(name, candidate)).
CorrectionScorer frequency_similarity_scorer(const Lexicon& lexicon);

/// Highest-scoring candidate; ties go to the lexicographically smallest.
/// Throws InvalidArgument when candidates is empty.
std::string correct_term(std::string_view name, std::span<const std::string> candidates,
                         const CorrectionScorer& scorer);

/// Picks the best candidate for a suspected misspelling. The default strategy
/// is correct_term with frequency_similarity_scorer; an external corrector can
/// stand in.
using CorrectionStrategy =
    std::function<Suggestion(std::string_view name, std::span<const std::string> candidates)>;

CorrectionStrategy default_correction_strategy(const Lexicon& lexicon);

struct DetectOptions {
  std::size_t max_edit_distance = 2;
  CorrectionStrategy strategy;  // empty -> default_correction_strategy
};

/// Anomalies for every non-Course node name, ordered by (node id, category,
/// span).
std::vector<Anomaly> detect_anomalies(const KnowledgeGraph& g, const Lexicon& lexicon,
                                      const DetectOptions& options = {});

struct CleanResult {
  KnowledgeGraph graph;
  std::vector<std::string> corrected;  // node ids renamed
};

/// Renames nodes whose SuspectedMisspelling suggestion scores at least
/// `min_score`. Ids and edges are unchanged.
CleanResult apply_corrections(const KnowledgeGraph& g, std::span<const Anomaly> anomalies,
                              double min_score);

}  // namespace ckg
