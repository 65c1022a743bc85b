#include "ckg/adapters.hpp"

#include <csignal>
#include <cerrno>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <span>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "ckg/unicode.hpp"

namespace ckg {

using nlohmann::json;

ChildProcess::ChildProcess(std::string command) {
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0) return;
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    return;
  }
  const pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    return;
  }
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

ChildProcess::~ChildProcess() { stop(); }

void ChildProcess::stop() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    if (waitpid(pid_, &status, WNOHANG) == 0) {
      kill(pid_, SIGTERM);
      waitpid(pid_, &status, 0);
    }
  }
  pid_ = -1;
}

std::optional<std::string> ChildProcess::exchange(const std::string& line, std::chrono::milliseconds timeout) {
  if (pid_ <= 0) return std::nullopt;
  std::string payload = line + "\n";
  std::size_t written = 0;
  while (written < payload.size()) {
    const ssize_t n = write(to_child_, payload.data() + written, payload.size() - written);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      stop();
      return std::nullopt;
    }
    written += static_cast<std::size_t>(n);
  }
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string reply = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return reply;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      stop();
      return std::nullopt;
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) {
      stop();
      return std::nullopt;
    }
    char chunk[4096];
    const ssize_t n = read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      stop();
      return std::nullopt;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

NdjsonAdapter::NdjsonAdapter(std::string feature, std::string command, std::chrono::milliseconds timeout)
    : feature_(std::move(feature)), command_(std::move(command)), timeout_(timeout) {
  std::signal(SIGPIPE, SIG_IGN);
}

void NdjsonAdapter::disable(const std::string& reason) {
  if (!enabled_) return;
  enabled_ = false;
  process_.reset();
  spdlog::warn("{} adapter disabled: {}", feature_, reason);
}

std::optional<std::string> NdjsonAdapter::call(const std::string& request) {
  if (!enabled_) return std::nullopt;
  if (!process_) {
    process_ = std::make_unique<ChildProcess>(command_);
    if (!process_->running()) {
      disable("could not start '" + command_ + "'");
      return std::nullopt;
    }
  }
  auto reply = process_->exchange(request, timeout_);
  if (!reply) {
    disable("no reply from '" + command_ + "'");
    return std::nullopt;
  }
  if (!json::accept(*reply)) {
    disable("reply is not JSON");
    return std::nullopt;
  }
  return reply;
}

SemanticScorer make_embedding_scorer(std::shared_ptr<NdjsonAdapter> adapter) {
  return [adapter](std::string_view a, std::string_view b) -> std::optional<double> {
    const auto reply = adapter->call(json{{"a", a}, {"b", b}}.dump());
    if (!reply) return std::nullopt;
    const json j = json::parse(*reply);
    if (!j.is_object() || !j.contains("cosine") || !j["cosine"].is_number()) {
      adapter->disable("reply lacks a numeric 'cosine'");
      return std::nullopt;
    }
    return std::clamp(j["cosine"].get<double>(), -1.0, 1.0);
  };
}

CorrectionStrategy make_external_corrector(std::shared_ptr<NdjsonAdapter> adapter, CorrectionStrategy fallback) {
  return [adapter, fallback](std::string_view name, std::span<const std::string> candidates) -> Suggestion {
    const auto reply = adapter->call(
        json{{"text", name}, {"candidates", std::vector<std::string>(candidates.begin(), candidates.end())}}.dump());
    if (reply) {
      const json j = json::parse(*reply);
      if (j.is_object() && j.contains("best") && j["best"].is_string() && j.contains("score") &&
          j["score"].is_number()) {
        const auto best = j["best"].get<std::string>();
        if (std::find(candidates.begin(), candidates.end(), best) != candidates.end())
          return {best, std::clamp(j["score"].get<double>(), 0.0, 1.0)};
      }
      adapter->disable("reply does not name one of the candidates");
    }
    return fallback(name, candidates);
  };
}

std::vector<TermOccurrence> ner_occurrences(NdjsonAdapter& adapter, const DocumentTree& tree) {
  std::vector<TermOccurrence> out;
  for (std::size_t h = 0; h < tree.headings.size() && adapter.enabled(); ++h) {
    const Heading& heading = tree.headings[h];
    const auto reply = adapter.call(json{{"heading", heading.title}, {"text", heading.body.text}}.dump());
    if (!reply) break;
    const json j = json::parse(*reply);
    if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array()) {
      adapter.disable("reply lacks a 'terms' array");
      break;
    }
    const std::size_t body_len = unicode::length(heading.body.text);
    for (const json& t : j["terms"]) {
      if (!t.is_object() || !t.contains("term") || !t["term"].is_string() || !t.contains("offset") ||
          !t["offset"].is_number_unsigned())
        continue;
      const auto offset = t["offset"].get<std::size_t>();
      const auto term = t["term"].get<std::string>();
      if (offset >= body_len || term.empty() || !unicode::is_valid(term)) continue;
      out.push_back({term, h, heading.body.begin + offset});
    }
  }
  return out;
}

}  // namespace ckg
