#include "distval/game.hpp"

#include <mutex>
#include <optional>
#include <shared_mutex>
#include <unordered_map>

#include "distval/error.hpp"

namespace distval {

std::vector<PayoffParams> PayoffSource::query_batch(std::span<const Coalition> coalitions) {
  std::vector<PayoffParams> out;
  out.reserve(coalitions.size());
  for (const auto& c : coalitions) out.push_back(query(c));
  return out;
}

namespace {

class FunctionSource final : public PayoffSource {
 public:
  explicit FunctionSource(PayoffFunction f) : f_(std::move(f)) {}
  PayoffParams query(const Coalition& c) override { return f_(c); }

 private:
  PayoffFunction f_;
};

class Memo {
 public:
  std::optional<PayoffParams> find(std::uint64_t mask) const {
    std::shared_lock lock(mutex_);
    auto it = table_.find(mask);
    if (it == table_.end()) return std::nullopt;
    return it->second;
  }
  void insert(std::uint64_t mask, PayoffParams params) {
    std::unique_lock lock(mutex_);
    table_.emplace(mask, std::move(params));
  }

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::uint64_t, PayoffParams> table_;
};

template <typename F>
auto guard_oracle(F&& call) {
  try {
    return call();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::oracle_failure, e.what());
  } catch (...) {
    throw Error(ErrorCode::oracle_failure, "payoff oracle threw a non-standard exception");
  }
}

}  // namespace

struct StochasticGame::State {
  int n_players = 0;
  FamilyTag kind;
  std::shared_ptr<PayoffSource> source;
  mutable Memo memo;
  // mixture
  double weight = 0.0;
  std::shared_ptr<const StochasticGame> first;
  std::shared_ptr<const StochasticGame> second;
};

StochasticGame::StochasticGame(int n_players, FamilyTag kind, std::shared_ptr<PayoffSource> source) {
  if (n_players < 1 || n_players > kMaxPlayers) {
    throw Error(n_players < 1 ? ErrorCode::invalid_argument : ErrorCode::too_many_players,
                "game player count " + std::to_string(n_players));
  }
  if (kind.family == Family::categorical && kind.classes < 2) {
    throw Error(ErrorCode::spec_validation, "categorical games need d >= 2");
  }
  if (!source) throw Error(ErrorCode::invalid_argument, "null payoff source");
  auto state = std::make_shared<State>();
  state->n_players = n_players;
  state->kind = kind;
  state->source = std::move(source);
  state_ = std::move(state);
}

StochasticGame::StochasticGame(int n_players, FamilyTag kind, PayoffFunction oracle)
    : StochasticGame(n_players, kind, std::make_shared<FunctionSource>(std::move(oracle))) {}

StochasticGame StochasticGame::mixture(double weight, StochasticGame first, StochasticGame second) {
  if (!(weight >= 0.0 && weight <= 1.0)) {
    throw Error(ErrorCode::out_of_range, "mixture weight must lie in [0, 1]");
  }
  if (first.n_players() != second.n_players() || first.kind() != second.kind()) {
    throw Error(ErrorCode::spec_validation, "mixture components must share n and family");
  }
  StochasticGame out = first;
  auto state = std::make_shared<State>();
  state->n_players = first.n_players();
  state->kind = first.kind();
  state->weight = weight;
  state->first = std::make_shared<const StochasticGame>(std::move(first));
  state->second = std::make_shared<const StochasticGame>(std::move(second));
  out.state_ = std::move(state);
  return out;
}

int StochasticGame::n_players() const noexcept { return state_->n_players; }
const FamilyTag& StochasticGame::kind() const noexcept { return state_->kind; }
bool StochasticGame::is_mixture() const noexcept { return state_->first != nullptr; }

double StochasticGame::mixture_weight() const {
  if (!is_mixture()) throw Error(ErrorCode::invalid_argument, "not a mixture game");
  return state_->weight;
}
const StochasticGame& StochasticGame::first() const {
  if (!is_mixture()) throw Error(ErrorCode::invalid_argument, "not a mixture game");
  return *state_->first;
}
const StochasticGame& StochasticGame::second() const {
  if (!is_mixture()) throw Error(ErrorCode::invalid_argument, "not a mixture game");
  return *state_->second;
}

PayoffParams StochasticGame::payoff(const Coalition& c) const {
  if (is_mixture()) {
    throw Error(ErrorCode::invalid_argument, "mixture games have no single payoff parameter set");
  }
  if (c.n_players() != n_players()) {
    throw Error(ErrorCode::invalid_argument, "coalition player count does not match game");
  }
  if (auto hit = state_->memo.find(c.mask())) return *hit;
  PayoffParams params = guard_oracle([&] { return state_->source->query(c); });
  validate(params, kind());
  state_->memo.insert(c.mask(), params);
  return params;
}

void StochasticGame::prefetch(std::span<const Coalition> coalitions) const {
  if (is_mixture()) {
    first().prefetch(coalitions);
    second().prefetch(coalitions);
    return;
  }
  std::vector<Coalition> missing;
  for (const auto& c : coalitions) {
    if (!state_->memo.find(c.mask())) missing.push_back(c);
  }
  if (missing.empty()) return;
  auto replies = guard_oracle([&] { return state_->source->query_batch(missing); });
  if (replies.size() != missing.size()) {
    throw Error(ErrorCode::oracle_failure, "batch query returned the wrong number of payoffs");
  }
  for (std::size_t k = 0; k < missing.size(); ++k) {
    validate(replies[k], kind());
    state_->memo.insert(missing[k].mask(), std::move(replies[k]));
  }
}

Eigen::VectorXd StochasticGame::expected_payoff(const Coalition& c) const {
  if (is_mixture()) {
    return state_->weight * first().expected_payoff(c) +
           (1.0 - state_->weight) * second().expected_payoff(c);
  }
  return expected_outcome(payoff(c));
}

PayoffParams query_payoff(const StochasticGame& g, const Coalition& c) { return g.payoff(c); }

}  // namespace distval
