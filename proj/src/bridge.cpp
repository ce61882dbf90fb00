#include "distval/bridge.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <map>

#include <json.hpp>

#include "distval/builders.hpp"
#include "distval/error.hpp"

extern char** environ;

namespace distval {

using nlohmann::json;

namespace {

[[noreturn]] void violation(const std::string& message) {
  throw Error(ErrorCode::protocol_violation, message);
}

PayoffParams decode_params(const json& params, const FamilyTag& family) {
  if (!params.is_object()) violation("reply 'params' is not an object");
  try {
    switch (family.family) {
      case Family::bernoulli: return bernoulli(params.at("pi").get<double>());
      case Family::gaussian:
        return gaussian(params.at("mu").get<double>(), params.at("sigma").get<double>());
      case Family::categorical: {
        const auto logits = params.at("logits").get<std::vector<double>>();
        if (static_cast<int>(logits.size()) != family.classes) {
          violation("expected " + std::to_string(family.classes) + " logits, got " +
                    std::to_string(logits.size()));
        }
        return categorical(Eigen::Map<const Eigen::VectorXd>(logits.data(),
                                                             static_cast<Eigen::Index>(logits.size())));
      }
    }
  } catch (const json::exception& e) {
    violation(std::string("bad params: ") + e.what());
  }
  violation("unknown family");
}

}  // namespace

BridgeSource::BridgeSource(const BridgeOptions& options)
    : family_(options.family), n_players_(options.n_players), timeout_ms_(options.timeout_ms) {
  if (options.command.empty()) throw Error(ErrorCode::bridge_start_failure, "empty command");
  int in_pipe[2];
  int out_pipe[2];
  if (pipe2(in_pipe, O_CLOEXEC) != 0) {
    throw Error(ErrorCode::bridge_start_failure, std::strerror(errno));
  }
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw Error(ErrorCode::bridge_start_failure, std::strerror(errno));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  std::vector<char*> argv;
  for (const auto& arg : options.command) argv.push_back(const_cast<char*>(arg.c_str()));
  argv.push_back(nullptr);
  pid_t pid = -1;
  const int rc = posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  if (rc != 0) {
    shutdown();
    throw Error(ErrorCode::bridge_start_failure,
                "cannot start '" + options.command.front() + "': " + std::strerror(rc));
  }
  pid_ = pid;
  // A child that dies early must not kill us with SIGPIPE.
  signal(SIGPIPE, SIG_IGN);

  try {
    json hello = {{"hello",
                   {{"n", n_players_},
                    {"family", std::string(to_string(family_.family))},
                    {"d", family_.classes > 0 ? json(family_.classes) : json(nullptr)}}}};
    write_line(hello.dump());
    json reply;
    try {
      reply = json::parse(read_line());
    } catch (const json::parse_error& e) {
      violation(std::string("handshake reply is not JSON: ") + e.what());
    }
    if (!reply.is_object() || reply.value("ready", false) != true) {
      throw Error(ErrorCode::bridge_start_failure, "bridge did not report ready");
    }
    if (family_.family == Family::categorical) {
      if (!reply.contains("d") || !reply.at("d").is_number_integer()) {
        violation("handshake reply lacks integer 'd'");
      }
      const int d = reply.at("d").get<int>();
      if (d < 2 || (family_.classes > 0 && d != family_.classes)) {
        violation("bridge announced d=" + std::to_string(d));
      }
      family_.classes = d;
    }
  } catch (const Error& e) {
    shutdown();
    if (e.code() == ErrorCode::timeout || e.code() == ErrorCode::protocol_violation) {
      throw Error(ErrorCode::bridge_start_failure, std::string("handshake failed: ") + e.what());
    }
    throw;
  }
}

BridgeSource::~BridgeSource() { shutdown(); }

void BridgeSource::shutdown() noexcept {
  if (to_child_ >= 0) {
    close(to_child_);
    to_child_ = -1;
  }
  if (from_child_ >= 0) {
    close(from_child_);
    from_child_ = -1;
  }
  if (pid_ > 0) {
    int status = 0;
    for (int attempt = 0; attempt < 50; ++attempt) {
      if (waitpid(pid_, &status, WNOHANG) != 0) {
        pid_ = -1;
        return;
      }
      usleep(10000);
    }
    kill(pid_, SIGKILL);
    waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

void BridgeSource::write_line(const std::string& line) {
  std::string data = line + "\n";
  const char* p = data.data();
  std::size_t left = data.size();
  while (left > 0) {
    const ssize_t n = write(to_child_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::oracle_failure, std::string("bridge write failed: ") + std::strerror(errno));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

std::string BridgeSource::read_line() {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms_);
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      return line;
    }
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                               deadline - std::chrono::steady_clock::now())
                               .count();
    if (remaining <= 0) throw Error(ErrorCode::timeout, "no reply from bridge within timeout");
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = poll(&pfd, 1, static_cast<int>(remaining));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::oracle_failure, std::strerror(errno));
    }
    if (ready == 0) continue;
    char chunk[4096];
    const ssize_t n = read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::oracle_failure, std::strerror(errno));
    }
    if (n == 0) throw Error(ErrorCode::oracle_failure, "bridge closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

PayoffParams BridgeSource::query(const Coalition& c) {
  const Coalition one[] = {c};
  return std::move(query_batch(one).front());
}

std::vector<PayoffParams> BridgeSource::query_batch(std::span<const Coalition> coalitions) {
  // Bounded in-flight window: both pipes stay below their buffer sizes.
  constexpr std::size_t kWindow = 128;
  std::lock_guard lock(mutex_);
  if (pid_ <= 0) throw Error(ErrorCode::oracle_failure, "bridge is not running");
  std::vector<PayoffParams> out(coalitions.size());
  for (std::size_t start = 0; start < coalitions.size(); start += kWindow) {
    const std::size_t end = std::min(coalitions.size(), start + kWindow);
    std::map<long, std::size_t> pending;
    std::string requests;
    for (std::size_t k = start; k < end; ++k) {
      if (coalitions[k].n_players() != n_players_) {
        throw Error(ErrorCode::invalid_argument, "coalition player count does not match bridge");
      }
      const long id = next_id_++;
      pending.emplace(id, k);
      if (!requests.empty()) requests += '\n';
      requests += json{{"id", id}, {"coalition", coalitions[k].members()}}.dump();
    }
    write_line(requests);
    while (!pending.empty()) {
      json reply;
      try {
        reply = json::parse(read_line());
      } catch (const json::parse_error& e) {
        violation(std::string("reply is not JSON: ") + e.what());
      }
      if (!reply.is_object() || !reply.contains("id") || !reply.at("id").is_number_integer()) {
        violation("reply without integer id: " + reply.dump());
      }
      const long id = reply.at("id").get<long>();
      auto it = pending.find(id);
      if (it == pending.end()) violation("reply for unknown id " + std::to_string(id));
      if (reply.contains("error")) {
        throw Error(ErrorCode::oracle_failure,
                    "bridge error for {" + coalitions[it->second].key() + "}: " +
                        reply.at("error").dump());
      }
      if (!reply.contains("params")) violation("reply without params: " + reply.dump());
      out[it->second] = decode_params(reply.at("params"), family_);
      pending.erase(it);
    }
  }
  return out;
}

StochasticGame build_bridge_game(const BridgeOptions& options) {
  auto source = std::make_shared<BridgeSource>(options);
  const FamilyTag family = source->family();
  return StochasticGame(options.n_players, family, std::move(source));
}

}  // namespace distval
