#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "distval/game.hpp"
#include "distval/structure.hpp"
#include "distval/value.hpp"

namespace distval {

struct GameSpec;

/// Explicit payoff for each of the 2^n coalitions, keyed by coalition key.
struct TableGameSpec {
  int n_players = 0;
  FamilyTag family;
  std::map<std::string, PayoffParams> payoffs;
};

/// softmax(masked(x)ᵀ W + b): features outside the coalition take their
/// baseline value. With `groups`, player p controls features groups[p].
struct LinearSoftmaxSpec {
  int n_players = 0;
  Eigen::MatrixXd weights;  // features x classes
  Eigen::VectorXd bias;     // classes
  Eigen::VectorXd input;    // features
  Eigen::VectorXd baseline; // features
  std::vector<std::vector<int>> groups;
};

/// Two-player probabilistic XOR: v(∅) = v({0,1}) = Ber(0), v({0}) = v({1}) = Ber(1).
struct XorSpec {};

struct MixtureSpec {
  double weight = 0.5;
  std::shared_ptr<const GameSpec> first;
  std::shared_ptr<const GameSpec> second;
};

struct BridgeSpec {
  std::vector<std::string> command;
  int n_players = 0;
  FamilyTag family;
  int timeout_ms = 30000;
};

struct GameSpec {
  std::variant<TableGameSpec, LinearSoftmaxSpec, XorSpec, MixtureSpec, BridgeSpec> payload;

  int n_players() const;
  FamilyTag family() const;
};

/// Parses the "game" object of a game-spec file. Throws SpecValidation.
GameSpec parse_game_spec(const nlohmann::json& game);
nlohmann::json to_json(const GameSpec& spec);

/// Checks the spec invariants (dimensions, table completeness, ranges).
void validate(const GameSpec& spec);

StochasticGame build_game(const GameSpec& spec);
StochasticGame make_xor_game();

/// Input vector after masking players outside the coalition to baseline.
Eigen::VectorXd masked_input(const LinearSoftmaxSpec& spec, const Coalition& c);
Eigen::VectorXd linear_softmax_logits(const LinearSoftmaxSpec& spec, const Coalition& c);

/// Re-exports any parametric game as a table over all 2^n coalitions.
TableGameSpec export_table(const StochasticGame& g);

/// Parses a "structure" object: shapley | leave_one_out (loo) | size_weighted |
/// random_order | custom.
CoalitionStructure parse_structure(const nlohmann::json& structure, int n_players);

/// Outcome oracle for a parametric categorical game: argmax(θ_S + ε) with the
/// Gumbel vector ε generated from the noise seed alone, so the same seed
/// couples every coalition.
OutcomeOracle gumbel_outcome_oracle(const StochasticGame& g);

nlohmann::json params_to_json(const PayoffParams& params);
PayoffParams params_from_json(const nlohmann::json& j, const FamilyTag& family);

}  // namespace distval
