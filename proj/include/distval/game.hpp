#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "distval/coalition.hpp"
#include "distval/payoff.hpp"

namespace distval {

/// Something that maps coalitions to payoff parameters. Implementations must
/// be deterministic; StochasticGame serializes nothing and may call query()
/// from several threads at once.
class PayoffSource {
 public:
  virtual ~PayoffSource() = default;
  virtual PayoffParams query(const Coalition& c) = 0;
  /// Default forwards to query() one coalition at a time.
  virtual std::vector<PayoffParams> query_batch(std::span<const Coalition> coalitions);
};

using PayoffFunction = std::function<PayoffParams(const Coalition&)>;

/// An n-player stochastic game: either a parametric payoff oracle (memoized on
/// the coalition bitmask) or a two-component mixture game that equals the
/// first game with probability `weight` and the second otherwise.
class StochasticGame {
 public:
  StochasticGame(int n_players, FamilyTag kind, std::shared_ptr<PayoffSource> source);
  StochasticGame(int n_players, FamilyTag kind, PayoffFunction oracle);

  static StochasticGame mixture(double weight, StochasticGame first, StochasticGame second);

  int n_players() const noexcept;
  const FamilyTag& kind() const noexcept;

  bool is_mixture() const noexcept;
  double mixture_weight() const;
  const StochasticGame& first() const;
  const StochasticGame& second() const;

  /// Payoff parameters of a parametric game. Throws InvalidArgument for
  /// mixture games (their payoff is not a single parameter set), OracleFailure
  /// when the source throws anything other than a distval::Error.
  PayoffParams payoff(const Coalition& c) const;

  /// Queries every coalition not yet cached in one batch.
  void prefetch(std::span<const Coalition> coalitions) const;

  /// E[v(S)]: pi, mu, or class probabilities. Defined for mixtures too.
  Eigen::VectorXd expected_payoff(const Coalition& c) const;

 private:
  struct State;
  std::shared_ptr<const State> state_;
};

PayoffParams query_payoff(const StochasticGame& g, const Coalition& c);

}  // namespace distval
