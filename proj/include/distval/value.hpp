#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "distval/game.hpp"
#include "distval/marginal.hpp"
#include "distval/structure.hpp"

namespace distval {

/// Mixture over coalitions of BernoulliMC; both directions may carry mass.
struct BernoulliValue {
  double q_plus = 0.0;
  double q_minus = 0.0;
  double q_zero = 0.0;
};

struct GaussianComponent {
  double weight = 0.0;
  double mean = 0.0;
  double sd = 0.0;
};

/// Gaussian mixture plus the law of the variance-direction tracker.
/// sign_pmf = (P(−1), P(0), P(+1)). Components are sorted by (mean, sd).
struct GaussianValue {
  std::vector<GaussianComponent> components;
  std::array<double, 3> sign_pmf{0.0, 0.0, 0.0};
};

/// transition(r, s): probability the player moves the outcome from class s
/// (without the player) to class r (with the player).
struct CategoricalValue {
  Eigen::MatrixXd transition;

  /// Total off-diagonal mass: the probability the player changes the class.
  double change_mass() const {
    double mass = 0.0;
    for (Eigen::Index s = 0; s < transition.cols(); ++s) {
      for (Eigen::Index r = 0; r < transition.rows(); ++r) {
        if (r != s) mass += transition(r, s);
      }
    }
    return mass;
  }

  /// Probability of no change, taken as the complement of change_mass() so
  /// that a value without transitions reports exactly 1.
  double p_zero() const { return 1.0 - change_mass(); }
};

using DistributionalValue = std::variant<BernoulliValue, GaussianValue, CategoricalValue>;

/// Empty (all-zero) value of the game's family, ready to accumulate into.
DistributionalValue zero_value(const FamilyTag& kind);

/// value += weight * term, for values of the same family. Gaussian
/// components are appended unmerged; call normalize_components afterwards.
void accumulate(DistributionalValue& value, double weight, const DistributionalValue& term);

/// Sorts Gaussian components and merges those whose (mean, sd) agree within
/// 1e-12. No-op for other families.
void normalize_components(DistributionalValue& value);

/// Law of v(S ∪ i) ⊖ v(S) as a (single-coalition) distributional value.
/// For mixture games this is the weighted combination of both components.
DistributionalValue coalition_marginal(const StochasticGame& g, const Coalition& s, int player);

struct ExecutionOptions {
  int threads = 1;
};

/// Exact law q_i by enumerating the support of p^i.
DistributionalValue exact_value(const StochasticGame& g, const CoalitionStructure& p, int player,
                                const ExecutionOptions& exec = {});

/// Fixed-length numeric summary used for Monte Carlo standard errors:
///   Bernoulli   (q_plus, q_minus, q_zero)
///   Gaussian    (mean, second moment, P(sign −1), P(sign 0), P(sign +1), Dirac-at-0 mass)
///   Categorical transition matrix, column-major
Eigen::VectorXd summary_vector(const DistributionalValue& value);

struct McOptions {
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct McEstimate {
  int player = 0;
  DistributionalValue value;
  Eigen::VectorXd summary;          // summary_vector(value)
  Eigen::VectorXd standard_error;   // per summary entry
  std::size_t samples = 0;
};

/// Rao-Blackwellized Monte Carlo: samples coalitions (a whole permutation per
/// draw for permutation-based structures) and averages the analytic
/// per-coalition laws. Sample t uses an RNG stream derived from (seed, t), so
/// results do not depend on the thread count.
std::vector<McEstimate> mc_value(const StochasticGame& g, const CoalitionStructure& p,
                                 const std::vector<int>& players, const McOptions& options);
McEstimate mc_value(const StochasticGame& g, const CoalitionStructure& p, int player,
                    const McOptions& options);

/// Class label of the model's output for a coalition under a given noise seed.
using OutcomeOracle = std::function<int(const Coalition&, std::uint64_t seed)>;

inline constexpr std::size_t kSystematicSupportLimit = std::size_t{1} << 16;

struct SampledOptions {
  std::size_t coalition_samples = 100;
  std::size_t seed_count = 100;
  std::uint64_t seed = 0;
};

/// Nested-sampling estimator: draws k coalitions from p^i and r noise seeds,
/// and for every (coalition, seed) pair evaluates the outcome with and
/// without the player under the same seed.
///
/// When p^i has an enumerable support of at most kSystematicSupportLimit
/// coalitions, the k draws are systematic (one uniform offset, k evenly
/// spaced points through the cumulative pmf). Each draw is still marginally
/// distributed as p^i, but the coalition frequencies deviate from p^i by
/// less than 1/k. Larger supports fall back to independent draws.
CategoricalValue mc_value_sampled(const OutcomeOracle& oracle, int classes,
                                  const CoalitionStructure& p, int player,
                                  const SampledOptions& options);

/// Derived stream seed for index `index` under master seed `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// ---- statistics -----------------------------------------------------------

struct Transition {
  int from = 0;
  int to = 0;
  double probability = 0.0;
};

struct FlipAway {
  int from = 0;
  double probability = 0.0;
};

/// ι = 1 − q_i(0).
double importance(const DistributionalValue& value);
/// E[ξ_i]: scalar for Bernoulli/Gaussian, class vector (row − column sums) for categorical.
Eigen::VectorXd expectation(const DistributionalValue& value);
double bernoulli_variance(const BernoulliValue& value);
/// Variance for Bernoulli and Gaussian values; UnsupportedFamily for categorical.
double variance(const DistributionalValue& value);
/// Shannon entropy (nats) over the difference set; UnsupportedFamily for Gaussian.
double entropy(const DistributionalValue& value);
Transition mode_change(const CategoricalValue& value);
FlipAway flip_away(const CategoricalValue& value);
std::vector<Transition> top_transitions(const CategoricalValue& value, std::size_t k);
/// Σ_c |E[ξ_i]_c|: the class-aggregated magnitude of the standard values.
double abs_importance(const DistributionalValue& value);

/// Every statistic defined for the value's family.
struct ValueStats {
  double importance = 0.0;
  Eigen::VectorXd expectation;
  std::optional<double> variance;  // Bernoulli, Gaussian
  std::optional<double> entropy;   // Bernoulli, categorical
  std::optional<Transition> mode_change;
  std::optional<FlipAway> flip_away;
};

ValueStats compute_stats(const DistributionalValue& value);

}  // namespace distval
