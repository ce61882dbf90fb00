#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "distval/coalition.hpp"

namespace distval {

enum class StructureKind { shapley, leave_one_out, size_weighted, random_order, custom };

std::string_view to_string(StructureKind kind);

struct WeightedPermutation {
  std::vector<int> order;  // order[t] = player at position t
  double probability = 0.0;
};

/// Per-player coalition distributions p^i over subsets of [n] \ {i}.
///
/// Symmetric kinds (shapley, size_weighted) hold only the size table p̄(k)
/// and evaluate pmf(i, S) from |S|. Random-order and custom kinds hold sparse
/// per-player tables keyed on the coalition bitmask.
class CoalitionStructure {
 public:
  int n_players() const noexcept { return n_players_; }
  StructureKind kind() const noexcept { return kind_; }

  /// Probability of S under p^i; zero whenever i ∈ S.
  double pmf(int player, const Coalition& s) const;

  /// Size table p̄(k), k = 0..n-1, for symmetric kinds; empty otherwise.
  const std::vector<double>& size_pmf() const noexcept { return size_pmf_; }

  /// Support of p^i with its probabilities, ascending by bitmask. Only
  /// available for tabular kinds or when n is within the enumeration limit.
  std::vector<std::pair<Coalition, double>> support(int player) const;

  /// True for kinds sampled through a permutation (shapley, random_order);
  /// one permutation then yields a coalition for every player.
  bool samples_permutations() const noexcept;

  std::vector<int> sample_permutation(std::mt19937_64& rng) const;
  Coalition sample(int player, std::mt19937_64& rng) const;

  friend CoalitionStructure make_shapley(int n);
  friend CoalitionStructure make_leave_one_out(int n);
  friend CoalitionStructure make_size_weighted(int n, const std::vector<double>& weights);
  friend CoalitionStructure make_random_order(int n, const std::vector<WeightedPermutation>& perms);
  friend CoalitionStructure make_custom(int n,
                                        const std::map<int, std::map<std::string, double>>& tables);

 private:
  CoalitionStructure(int n, StructureKind kind);

  struct Table {
    std::vector<std::uint64_t> masks;  // ascending
    std::vector<double> probs;
    std::vector<double> cumulative;
  };

  int n_players_;
  StructureKind kind_;
  std::vector<double> size_pmf_;
  std::vector<double> size_cumulative_;  // C(n-1, k) * p̄(k), accumulated
  std::vector<Table> tables_;            // per player, tabular kinds only
  std::vector<WeightedPermutation> permutations_;
  std::vector<double> permutation_cumulative_;
};

CoalitionStructure make_shapley(int n);
CoalitionStructure make_leave_one_out(int n);
/// weights[k] is the unnormalized probability of each single coalition of
/// size k; normalized so that every player's PMF sums to one.
CoalitionStructure make_size_weighted(int n, const std::vector<double>& weights);
CoalitionStructure make_random_order(int n, const std::vector<WeightedPermutation>& perms);
/// tables[i] maps coalition keys ("1,2", "" for ∅) to probabilities.
CoalitionStructure make_custom(int n, const std::map<int, std::map<std::string, double>>& tables);

/// Uniform permutation distribution over all n! orders (n ≤ 10).
std::vector<WeightedPermutation> uniform_permutations(int n);

struct EfficiencyReport {
  bool efficient = false;
  double grand_sum = 0.0;       // Σ_i p^i([n] \ i)
  double max_deviation = 0.0;   // over both conditions
  std::vector<Coalition> violations;  // S failing the balance condition
};

/// Exact lattice check of the efficiency conditions, tolerance 1e-10.
EfficiencyReport is_efficient(const CoalitionStructure& p);
/// Exact check that pmf(i, S) depends on |S| only, tolerance 1e-10.
bool is_symmetric(const CoalitionStructure& p);

Coalition sample_coalition(const CoalitionStructure& p, int player, std::mt19937_64& rng);

/// Natural-log binomial coefficient.
double log_binomial(int n, int k);

}  // namespace distval
