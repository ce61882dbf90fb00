#pragma once

#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "distval/game.hpp"

namespace distval {

struct BridgeOptions {
  std::vector<std::string> command;  // argv of the child process
  int n_players = 0;
  FamilyTag family;                  // classes == 0 lets the bridge announce d
  int timeout_ms = 30000;            // per reply
};

/// Payoff source backed by a child process speaking newline-delimited JSON on
/// stdin/stdout:
///
///   -> {"hello": {"n": 4, "family": "categorical", "d": 3}}
///   <- {"ready": true, "d": 3}
///   -> {"id": 7, "coalition": [0, 2]}
///   <- {"id": 7, "params": {"logits": [0.1, 0.2, 0.3]}}
///
/// Replies to a batch may arrive in any order. A reply {"id": k, "error": msg}
/// is an OracleFailure; anything unparseable is a ProtocolViolation.
class BridgeSource final : public PayoffSource {
 public:
  explicit BridgeSource(const BridgeOptions& options);
  ~BridgeSource() override;

  BridgeSource(const BridgeSource&) = delete;
  BridgeSource& operator=(const BridgeSource&) = delete;

  PayoffParams query(const Coalition& c) override;
  std::vector<PayoffParams> query_batch(std::span<const Coalition> coalitions) override;

  /// Family as confirmed by the handshake (d filled in for categorical).
  const FamilyTag& family() const noexcept { return family_; }

 private:
  std::string read_line();
  void write_line(const std::string& line);
  void shutdown() noexcept;

  FamilyTag family_;
  int n_players_;
  int timeout_ms_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  long next_id_ = 0;
  std::mutex mutex_;
};

StochasticGame build_bridge_game(const BridgeOptions& options);

}  // namespace distval
