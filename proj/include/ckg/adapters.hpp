#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ckg/cleaning.hpp"
#include "ckg/docmodel.hpp"
#include "ckg/extraction.hpp"
#include "ckg/fusion.hpp"

namespace ckg {

/// `/bin/sh -c command` with its stdin and stdout connected to pipes.
class ChildProcess {
 public:
  explicit ChildProcess(std::string command);
  ~ChildProcess();
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  /// Writes one line and reads one line back. nullopt on a dead process,
  /// EOF or timeout.
  std::optional<std::string> exchange(const std::string& line, std::chrono::milliseconds timeout);
  bool running() const { return pid_ > 0; }

 private:
  void stop();

  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

/// One adapter speaking newline-delimited JSON. The first failure (spawn,
/// timeout, unparsable reply) logs a notice and disables the adapter for the
/// rest of the run.
class NdjsonAdapter {
 public:
  NdjsonAdapter(std::string feature, std::string command,
                std::chrono::milliseconds timeout = std::chrono::seconds(10));

  /// Sends a JSON object (serialized) and returns the reply object
  /// (serialized), or nullopt when the adapter is disabled.
  std::optional<std::string> call(const std::string& request);
  bool enabled() const { return enabled_; }
  const std::string& feature() const { return feature_; }

  void disable(const std::string& reason);

 private:
  std::string feature_;
  std::string command_;
  std::chrono::milliseconds timeout_;
  std::unique_ptr<ChildProcess> process_;
  bool enabled_ = true;
};

/// Request {"a","b"}, reply {"cosine"}.
SemanticScorer make_embedding_scorer(std::shared_ptr<NdjsonAdapter> adapter);

/// Request {"text","candidates"}, reply {"best","score"}. Falls back to
/// `fallback` when the adapter is disabled or names a non-candidate.
CorrectionStrategy make_external_corrector(std::shared_ptr<NdjsonAdapter> adapter,
                                           CorrectionStrategy fallback);

/// Request {"heading","text"} per heading, reply {"terms":[{"term","offset"}]}
/// with offsets in scalar values relative to the heading body.
std::vector<TermOccurrence> ner_occurrences(NdjsonAdapter& adapter, const DocumentTree& tree);

}  // namespace ckg
