#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "ckg/config.hpp"
#include "ckg/error.hpp"
#include "ckg/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Build, fuse and analyse multi-source course knowledge graphs"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string stage_out;
  std::optional<std::uint64_t> seed;
  bool apply_corrections = false;
  bool quiet = false;

  for (const char* name : {"ingest", "build", "clean", "fuse", "link", "analyze", "export", "all"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the pipeline through ") + name);
    sub->add_option("--config", config_path, "pipeline config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--stage-out", stage_out, "output root (default <corpus root>/out)");
    sub->add_option("--seed", seed, "seed for spectral clustering");
    sub->add_flag("--apply-corrections", apply_corrections, "rename nodes with accepted spelling suggestions");
    sub->add_flag("-q,--quiet", quiet, "only log warnings and errors");
  }
  CLI11_PARSE(app, argc, argv);

  if (quiet) spdlog::set_level(spdlog::level::warn);
  const std::string stage_name = app.get_subcommands().front()->get_name();

  ckg::PipelineConfig config;
  try {
    config = ckg::load_config(config_path);
  } catch (const ckg::Error& e) {
    std::cerr << "ckg: " << ckg::to_string(e.code()) << ": " << e.what() << '\n';
    return 2;
  }

  ckg::RunOptions options;
  if (!stage_out.empty()) options.stage_out = stage_out;
  options.seed = seed;
  options.apply_corrections = apply_corrections;

  try {
    const ckg::RunReport report = ckg::run_pipeline(config, ckg::parse_stage(stage_name), options);
    return report.ok() ? 0 : 1;
  } catch (const ckg::Error& e) {
    std::cerr << "ckg: " << ckg::to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  }
}
