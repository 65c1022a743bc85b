#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ckg/config.hpp"

namespace ckg {

enum class Stage { Ingest, Build, Clean, Fuse, Link, Analyze, Export, All };

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view text);

struct OutputFile {
  std::string path;  // relative to the stage directory
  std::string sha256;
};

struct StageReport {
  Stage stage = Stage::Ingest;
  std::string inputs_digest;
  std::vector<OutputFile> outputs;
  std::map<std::string, std::size_t> counts;
  bool resumed = false;  // artifacts from an earlier run were reused
  double seconds = 0.0;
  std::string error;
};

struct RunReport {
  std::vector<StageReport> stages;

  bool ok() const;
};

struct RunOptions {
  std::optional<std::filesystem::path> stage_out;  // default corpus_root/out
  std::optional<std::uint64_t> seed;
  bool apply_corrections = false;  // ORed with the config value
};

/// Runs ingest..`stage` in order. A stage whose inputs digest and outputs
/// match its previous run_report.json is reused. Stops at the first stage
/// error, which is recorded in the report. Throws StageError when another
/// pipeline holds the output lock.
RunReport run_pipeline(const PipelineConfig& config, Stage stage, const RunOptions& options = {});

}  // namespace ckg
