#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "distval/builders.hpp"
#include "distval/structure.hpp"
#include "distval/value.hpp"

namespace distval {

// ---- independent oracles ---------------------------------------------------
//
// These share no code with the analytic paths they check: plain loops over
// the subset lattice and plain argmax over sampled Gumbel vectors.

/// Σ_S p^i(S) (u(S ∪ i) − u(S)) by walking every subset of [n] \ {i}.
double oracle_standard_value(const std::function<double(const Coalition&)>& u,
                             const CoalitionStructure& p, int player);

/// Empirical joint of (argmax(α + ε), argmax(β + ε)) over `samples` shared
/// Gumbel draws; entry (r, s) counts with-class r and without-class s.
Eigen::MatrixXd oracle_categorical_joint(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                                         std::size_t samples, std::uint64_t seed);

/// ½ Σ |a − b| over matching entries.
double total_variation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// ---- property suite ----------------------------------------------------------

enum class PropertyStatus { pass, fail, not_applicable };
std::string_view to_string(PropertyStatus status);

struct PropertyReport {
  std::string property;
  PropertyStatus status = PropertyStatus::pass;
  double max_dev = 0.0;
  double tol = 0.0;
  std::size_t trials = 0;
  nlohmann::json witness;  // worst trial, or the reason for not_applicable
};

/// Property ids in report order.
const std::vector<std::string>& property_ids();

namespace tolerance {
inline constexpr double kExpectation = 1e-10;     // prop1_i, prop1_iv
inline constexpr double kExact = 1e-12;           // prop1_ii, prop1_iii, prop1_v
inline constexpr double kMarginal = 1e-9;         // row/column sums of a joint
inline constexpr double kOracleTv = 0.005;        // analytic vs 10^6 Gumbel draws
inline constexpr double kStructure = 1e-10;       // efficiency / symmetry lattice checks
}  // namespace tolerance

struct SuiteOptions {
  std::vector<std::string> selection;  // empty selects every property
  std::uint64_t seed = 0;
  std::size_t trials = 100;
  int threads = 1;
  /// Replaces the generated structures for the prop1_* properties;
  /// games are then drawn with this structure's player count.
  std::optional<CoalitionStructure> structure;
  std::size_t oracle_trials = 100;       // (α, β) pairs for oracle_tv
  std::size_t oracle_samples = 1000000;  // Gumbel draws per pair
  std::size_t pairs_per_trial = 10;      // (α, β) pairs per marginal_consistency trial
};

/// Runs the selected properties. Failures, including exceptions raised while
/// checking a trial, are reported rather than thrown. Unknown ids throw
/// InvalidArgument.
std::vector<PropertyReport> run_property_suite(const SuiteOptions& options);

nlohmann::json to_json(const PropertyReport& report);

// ---- ranking diagnostics -----------------------------------------------------

struct RankDiscrepancy {
  std::vector<double> importance;      // ι_i = 1 − q_i(0)
  std::vector<double> abs_importance;  // ι^Abs_i = Σ_c |φ_i(u_c)|
  std::vector<int> order_importance;   // players by ι, descending, ties by index
  std::vector<int> order_abs;          // players by ι^Abs, descending, ties by index
  bool orders_differ = false;          // some pair is strictly ordered differently
  bool top_differs = false;            // the highest-ranked sets are disjoint
  bool aggregation_bias = false;       // some player has ι > 0 but ι^Abs = 0
};

RankDiscrepancy rank_discrepancy(const StochasticGame& g, const CoalitionStructure& p,
                                 const ExecutionOptions& exec = {});

// ---- fidelity ordering ---------------------------------------------------------

enum class FidelityScheme {
  csv_transition,  // (A) transition probability from c2 to c1
  standard_value,  // (B) φ_i(u_{c1})
  negated_other,   // (C) −φ_i(u_{c2})
};
std::string_view to_string(FidelityScheme scheme);  // "A", "B", "C"
FidelityScheme parse_scheme(std::string_view text);

struct FidelityStep {
  int step = 0;
  int removed_player = -1;  // -1 at step 0
  double p_c1 = 0.0;
  double p_c2 = 0.0;
};

struct FidelityTrace {
  FidelityScheme scheme = FidelityScheme::csv_transition;
  int c1 = 0;
  int c2 = 1;
  std::vector<int> order;  // full player ranking under the scheme
  std::vector<FidelityStep> steps;
};

/// Ranks players by the scheme's score (descending, ties by index), removes
/// the first `steps` of them cumulatively from the grand coalition, and
/// records the class probabilities c1 and c2 after each removal.
FidelityTrace fidelity_trace(const StochasticGame& g, const std::vector<CategoricalValue>& values,
                             int c1, int c2, FidelityScheme scheme, int steps);

/// Ten features, three classes, x = 1, baseline 0. Feature 0 carries the
/// dominant transition from class 1 to class 0.
LinearSoftmaxSpec synthetic_fidelity_spec();

}  // namespace distval
