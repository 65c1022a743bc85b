#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ckg/analytics.hpp"
#include "ckg/docmodel.hpp"
#include "ckg/exportio.hpp"
#include "ckg/fusion.hpp"

namespace ckg {

struct CourseSources {
  std::string name;
  std::map<SourceKind, std::filesystem::path> documents;  // absolute paths
};

struct AdapterCommands {
  std::optional<std::string> ner;
  std::optional<std::string> embedding;
  std::optional<std::string> corrector;
};

struct PipelineConfig {
  std::filesystem::path corpus_root;
  std::filesystem::path gazetteer_path;
  std::vector<CourseSources> courses;
  std::map<SourceKind, HeadingRules> heading_rules;
  std::vector<std::string> term_patterns;
  MatchPolicy fusion_policy;
  MatchPolicy link_policy = MatchPolicy::exact_only();
  bool apply_corrections = false;
  double min_correction_score = 0.5;
  std::size_t max_edit_distance = 2;
  int k = 3;
  double prune_threshold = 0.25;
  std::uint64_t seed = 42;
  WeightMethod weight_method = WeightMethod::RowSum;
  std::size_t top_n = 20;
  std::vector<ExportProfile> exports;
  AdapterCommands adapters;
  /// Canonical text of the configuration, used in stage digests.
  std::string fingerprint;

  /// Throws ConfigError.
  void validate() const;
};

/// Parses INI-style text: `[section]` headers, `key = value` lines, `#` or
/// `;` comments. `[course]` may repeat; relative paths resolve against
/// `base_dir`. Throws ConfigError.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

/// Lower-case, non-alphanumerics collapsed to '_'.
std::string course_slug(std::string_view name);

}  // namespace ckg
