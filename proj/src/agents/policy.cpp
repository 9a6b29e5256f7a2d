#include "alphaloop/agents/policy.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <spdlog/spdlog.h>

#include "alphaloop/core/error.hpp"

namespace alphaloop::agents {

std::string_view to_string(PolicyKind k) {
  return k == PolicyKind::External ? "external" : "deterministic";
}

PolicyKind parse_policy_kind(std::string_view s) {
  if (s == "deterministic") return PolicyKind::Deterministic;
  if (s == "external") return PolicyKind::External;
  throw Error(ErrorCode::ConfigError, "policy kind must be deterministic or external, got '" +
                                          std::string(s) + "'");
}

ExternalBackend::ExternalBackend(std::string command, int timeout_ms)
    : command_(std::move(command)), timeout_ms_(timeout_ms) {}

ExternalBackend::~ExternalBackend() { stop(); }

bool ExternalBackend::start() {
  started_ = true;
  int in[2];
  int out[2];
  if (pipe(in) != 0) return false;
  if (pipe(out) != 0) {
    close(in[0]);
    close(in[1]);
    return false;
  }
  const pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {in[0], in[1], out[0], out[1]}) close(fd);
    return false;
  }
  if (pid == 0) {
    dup2(in[0], STDIN_FILENO);
    dup2(out[1], STDOUT_FILENO);
    for (int fd : {in[0], in[1], out[0], out[1]}) close(fd);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in[0]);
  close(out[1]);
  pid_ = pid;
  to_child_ = in[1];
  from_child_ = out[0];
  signal(SIGPIPE, SIG_IGN);
  alive_ = true;
  return true;
}

void ExternalBackend::stop() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    kill(pid_, SIGTERM);
    waitpid(pid_, nullptr, 0);
  }
  pid_ = -1;
  alive_ = false;
}

std::optional<nlohmann::json> ExternalBackend::query(const std::string& agent,
                                                     const nlohmann::json& inputs) {
  if (!started_ && !start()) spdlog::warn("external policy '{}' could not be started", command_);
  if (!alive_) return std::nullopt;

  const std::string line = nlohmann::json{{"agent", agent}, {"inputs", inputs}}.dump() + "\n";
  std::size_t sent = 0;
  while (sent < line.size()) {
    const ssize_t n = write(to_child_, line.data() + sent, line.size() - sent);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      spdlog::warn("external policy: write failed, falling back to deterministic policy");
      stop();
      return std::nullopt;
    }
    sent += static_cast<std::size_t>(n);
  }

  std::size_t nl;
  while ((nl = buffer_.find('\n')) == std::string::npos) {
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = poll(&pfd, 1, timeout_ms_);
    if (ready <= 0) {
      spdlog::warn("external policy: no response within {} ms, falling back", timeout_ms_);
      stop();
      return std::nullopt;
    }
    char chunk[4096];
    const ssize_t n = read(from_child_, chunk, sizeof chunk);
    if (n <= 0) {
      spdlog::warn("external policy: process closed its output, falling back");
      stop();
      return std::nullopt;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
  const std::string reply = buffer_.substr(0, nl);
  buffer_.erase(0, nl + 1);
  try {
    auto j = nlohmann::json::parse(reply);
    if (!j.is_object()) throw nlohmann::json::type_error::create(302, "response is not an object", nullptr);
    return j;
  } catch (const nlohmann::json::exception& e) {
    spdlog::warn("external policy: malformed response for {} ({}), falling back", agent, e.what());
    return std::nullopt;
  }
}

std::unique_ptr<PolicyBackend> make_backend(PolicyKind kind, const std::string& command) {
  if (kind == PolicyKind::External) {
    if (command.empty()) throw Error(ErrorCode::ConfigError, "external policy needs a command");
    return std::make_unique<ExternalBackend>(command);
  }
  return std::make_unique<DeterministicBackend>();
}

}  // namespace alphaloop::agents
