#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "distval/structure.hpp"
#include "distval/value.hpp"
#include "distval/verify.hpp"

namespace distval {

inline constexpr std::string_view kVersion = "0.1.0";

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

/// 17 significant digits, enough to round-trip any double.
std::string format_number(double x);

struct Provenance {
  std::string spec_sha256;
  std::string structure;
  std::string mode;  // exact | mc | sampled
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  std::size_t seeds = 0;
};

struct PlayerResult {
  int player = 0;
  DistributionalValue value;
  Eigen::VectorXd standard_error;  // empty unless estimated by mc
  std::size_t samples = 0;
};

struct ExplainResult {
  Provenance provenance;
  int n_players = 0;
  FamilyTag family;
  nlohmann::json v_empty;  // {"expected": [...], "params": {...}|null}
  nlohmann::json v_grand;
  std::vector<PlayerResult> players;
};

nlohmann::json value_to_json(const DistributionalValue& value);
nlohmann::json to_json(const ExplainResult& result, std::size_t top_k = 3);

/// Long-format CSV. Headers by family:
///   categorical  player,from,to,prob   (every (to, from) cell, diagonal included)
///   bernoulli    player,atom,prob      (atoms 1, -1, 0)
///   gaussian     player,component,weight,mean,sd
std::string to_csv(const ExplainResult& result);

/// [{"property", "status", "max_dev", "tol", "trials", "witness"}, ...]
nlohmann::json suite_to_json(const std::vector<PropertyReport>& reports);
/// property,status,max_dev,tol,trials
std::string suite_to_csv(const std::vector<PropertyReport>& reports);

nlohmann::json fidelity_to_json(const std::vector<FidelityTrace>& traces);
/// step,scheme,removed_player,p_c1,p_c2 with one block per scheme;
/// removed_player is empty on step 0.
std::string fidelity_to_csv(const std::vector<FidelityTrace>& traces);

/// Every player's support with probabilities, plus efficiency and symmetry flags.
nlohmann::json structure_to_json(const CoalitionStructure& p);
/// player,coalition,prob
std::string structure_to_csv(const CoalitionStructure& p);

}  // namespace distval
