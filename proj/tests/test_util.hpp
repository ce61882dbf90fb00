#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "distval/game.hpp"
#include "distval/payoff.hpp"

namespace distval::testing {

/// Game whose payoff for coalition S is table[S.mask()].
inline StochasticGame table_game(int n, FamilyTag family, std::vector<PayoffParams> table) {
  auto shared = std::make_shared<const std::vector<PayoffParams>>(std::move(table));
  return StochasticGame(n, family, [shared](const Coalition& c) { return (*shared)[c.mask()]; });
}

inline Eigen::VectorXd random_logits(std::mt19937_64& rng, int d, double sd = 2.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Eigen::VectorXd v(d);
  for (int k = 0; k < d; ++k) v[k] = normal(rng);
  return v;
}

inline std::vector<PayoffParams> random_table(std::mt19937_64& rng, int n, FamilyTag family) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 2.0);
  std::vector<PayoffParams> table;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    switch (family.family) {
      case Family::bernoulli: table.push_back(bernoulli(unit(rng))); break;
      case Family::gaussian: table.push_back(gaussian(normal(rng), 2.0 * unit(rng))); break;
      case Family::categorical: table.push_back(categorical(random_logits(rng, family.classes))); break;
    }
  }
  return table;
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace distval::testing
