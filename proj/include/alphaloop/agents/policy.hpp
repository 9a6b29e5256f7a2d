#pragma once

#include <memory>
#include <optional>
#include <string>

#include "json.hpp"

namespace alphaloop::agents {

enum class PolicyKind { Deterministic, External };

std::string_view to_string(PolicyKind k);
/// "deterministic" or "external"; throws ConfigError otherwise.
PolicyKind parse_policy_kind(std::string_view s);

/// Seam where an outside decision maker can replace the deterministic agents.
/// query() returns nullopt when the caller should fall back to its own policy.
class PolicyBackend {
 public:
  virtual ~PolicyBackend() = default;
  virtual PolicyKind kind() const = 0;
  virtual std::optional<nlohmann::json> query(const std::string& agent,
                                              const nlohmann::json& inputs) = 0;
};

class DeterministicBackend final : public PolicyBackend {
 public:
  PolicyKind kind() const override { return PolicyKind::Deterministic; }
  std::optional<nlohmann::json> query(const std::string&, const nlohmann::json&) override {
    return std::nullopt;
  }
};

/// Runs `command` through /bin/sh once and exchanges one JSON line per
/// request: {"agent": ..., "inputs": ...} in, a response object out. Any I/O
/// failure, timeout or unparsable line logs a warning and yields nullopt;
/// after an I/O failure the backend stays disabled.
class ExternalBackend final : public PolicyBackend {
 public:
  explicit ExternalBackend(std::string command, int timeout_ms = 30000);
  ~ExternalBackend() override;
  ExternalBackend(const ExternalBackend&) = delete;
  ExternalBackend& operator=(const ExternalBackend&) = delete;

  PolicyKind kind() const override { return PolicyKind::External; }
  std::optional<nlohmann::json> query(const std::string& agent,
                                      const nlohmann::json& inputs) override;
  bool alive() const { return alive_; }

 private:
  bool start();
  void stop();

  std::string command_;
  int timeout_ms_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  bool alive_ = false;
  bool started_ = false;
  std::string buffer_;
};

std::unique_ptr<PolicyBackend> make_backend(PolicyKind kind, const std::string& command);

}  // namespace alphaloop::agents
