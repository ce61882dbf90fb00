#include "distval/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "distval/error.hpp"

namespace distval {

namespace {

constexpr double kNormalizationTol = 1e-12;
constexpr double kStructureTol = 1e-10;

void check_n(int n) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "structure needs n >= 1");
  if (n > kMaxPlayers) throw Error(ErrorCode::too_many_players, std::to_string(n) + " players");
}

std::vector<double> accumulate(const std::vector<double>& weights) {
  std::vector<double> out(weights.size());
  std::partial_sum(weights.begin(), weights.end(), out.begin());
  return out;
}

std::size_t draw_index(const std::vector<double>& cumulative, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, cumulative.back());
  const double u = unif(rng);
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  // Skip zero-width slots that share the final boundary.
  while (it != cumulative.begin() && *it == *(it - 1)) --it;
  return static_cast<std::size_t>(it - cumulative.begin());
}

std::uint64_t predecessors(const std::vector<int>& order, int player) {
  std::uint64_t mask = 0;
  for (int p : order) {
    if (p == player) return mask;
    mask |= std::uint64_t{1} << p;
  }
  return mask;
}

}  // namespace

std::string_view to_string(StructureKind kind) {
  switch (kind) {
    case StructureKind::shapley: return "shapley";
    case StructureKind::leave_one_out: return "leave_one_out";
    case StructureKind::size_weighted: return "size_weighted";
    case StructureKind::random_order: return "random_order";
    case StructureKind::custom: return "custom";
  }
  return "unknown";
}

double log_binomial(int n, int k) {
  if (k < 0 || k > n) return -INFINITY;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

CoalitionStructure::CoalitionStructure(int n, StructureKind kind) : n_players_(n), kind_(kind) {}

double CoalitionStructure::pmf(int player, const Coalition& s) const {
  if (player < 0 || player >= n_players_) {
    throw Error(ErrorCode::index_out_of_range, "player " + std::to_string(player));
  }
  if (s.n_players() != n_players_) {
    throw Error(ErrorCode::invalid_argument, "coalition player count does not match structure");
  }
  if (s.contains(player)) return 0.0;
  if (!size_pmf_.empty()) return size_pmf_[static_cast<std::size_t>(s.size())];
  const Table& t = tables_[static_cast<std::size_t>(player)];
  auto it = std::lower_bound(t.masks.begin(), t.masks.end(), s.mask());
  if (it == t.masks.end() || *it != s.mask()) return 0.0;
  return t.probs[static_cast<std::size_t>(it - t.masks.begin())];
}

std::vector<std::pair<Coalition, double>> CoalitionStructure::support(int player) const {
  if (player < 0 || player >= n_players_) {
    throw Error(ErrorCode::index_out_of_range, "player " + std::to_string(player));
  }
  std::vector<std::pair<Coalition, double>> out;
  if (!tables_.empty()) {
    const Table& t = tables_[static_cast<std::size_t>(player)];
    for (std::size_t k = 0; k < t.masks.size(); ++k) {
      if (t.probs[k] > 0.0) out.emplace_back(Coalition(n_players_, t.masks[k]), t.probs[k]);
    }
    return out;
  }
  if (kind_ == StructureKind::leave_one_out) {
    out.emplace_back(Coalition::grand(n_players_).without(player), 1.0);
    return out;
  }
  for (const Coalition& s : enumerate_subsets(n_players_, player)) {
    const double p = size_pmf_[static_cast<std::size_t>(s.size())];
    if (p > 0.0) out.emplace_back(s, p);
  }
  return out;
}

bool CoalitionStructure::samples_permutations() const noexcept {
  return kind_ == StructureKind::shapley || kind_ == StructureKind::random_order;
}

std::vector<int> CoalitionStructure::sample_permutation(std::mt19937_64& rng) const {
  if (kind_ == StructureKind::random_order) {
    return permutations_[draw_index(permutation_cumulative_, rng)].order;
  }
  if (kind_ != StructureKind::shapley) {
    throw Error(ErrorCode::invalid_argument,
                std::string(to_string(kind_)) + " structures are not permutation-based");
  }
  std::vector<int> order(static_cast<std::size_t>(n_players_));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

Coalition CoalitionStructure::sample(int player, std::mt19937_64& rng) const {
  if (player < 0 || player >= n_players_) {
    throw Error(ErrorCode::index_out_of_range, "player " + std::to_string(player));
  }
  if (samples_permutations()) {
    return Coalition(n_players_, predecessors(sample_permutation(rng), player));
  }
  if (!tables_.empty()) {
    const Table& t = tables_[static_cast<std::size_t>(player)];
    return Coalition(n_players_, t.masks[draw_index(t.cumulative, rng)]);
  }
  // Symmetric: draw |S| with mass C(n-1, k) p̄(k), then a uniform k-subset.
  const std::size_t k = draw_index(size_cumulative_, rng);
  std::vector<int> others;
  others.reserve(static_cast<std::size_t>(n_players_ - 1));
  for (int j = 0; j < n_players_; ++j) {
    if (j != player) others.push_back(j);
  }
  std::uint64_t mask = 0;
  for (std::size_t t = 0; t < k; ++t) {
    std::uniform_int_distribution<std::size_t> pick(t, others.size() - 1);
    std::swap(others[t], others[pick(rng)]);
    mask |= std::uint64_t{1} << others[t];
  }
  return Coalition(n_players_, mask);
}

CoalitionStructure make_shapley(int n) {
  check_n(n);
  CoalitionStructure p(n, StructureKind::shapley);
  p.size_pmf_.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    p.size_pmf_[static_cast<std::size_t>(k)] = std::exp(-std::log(n) - log_binomial(n - 1, k));
  }
  // Mass per size is exactly 1/n.
  p.size_cumulative_ = accumulate(std::vector<double>(static_cast<std::size_t>(n), 1.0 / n));
  return p;
}

CoalitionStructure make_leave_one_out(int n) {
  check_n(n);
  CoalitionStructure p(n, StructureKind::leave_one_out);
  p.size_pmf_.assign(static_cast<std::size_t>(n), 0.0);
  p.size_pmf_.back() = 1.0;
  p.size_cumulative_ = accumulate(p.size_pmf_);
  return p;
}

CoalitionStructure make_size_weighted(int n, const std::vector<double>& weights) {
  check_n(n);
  if (weights.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::invalid_weights, "expected " + std::to_string(n) + " size weights, got " +
                                                std::to_string(weights.size()));
  }
  std::vector<double> size_mass(weights.size());
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    const double w = weights[static_cast<std::size_t>(k)];
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::invalid_weights, "size weight " + std::to_string(k) + " is " +
                                                  std::to_string(w));
    }
    size_mass[static_cast<std::size_t>(k)] = w * std::exp(log_binomial(n - 1, k));
    total += size_mass[static_cast<std::size_t>(k)];
  }
  if (!(total > 0.0)) throw Error(ErrorCode::invalid_weights, "all size weights are zero");
  CoalitionStructure p(n, StructureKind::size_weighted);
  p.size_pmf_.resize(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    p.size_pmf_[k] = weights[k] / total;
    size_mass[k] /= total;
  }
  p.size_cumulative_ = accumulate(size_mass);
  return p;
}

CoalitionStructure make_random_order(int n, const std::vector<WeightedPermutation>& perms) {
  check_n(n);
  if (perms.empty()) throw Error(ErrorCode::not_normalized, "empty permutation distribution");
  double total = 0.0;
  std::vector<std::map<std::uint64_t, double>> per_player(static_cast<std::size_t>(n));
  for (const auto& wp : perms) {
    std::vector<int> sorted = wp.order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> identity(static_cast<std::size_t>(n));
    std::iota(identity.begin(), identity.end(), 0);
    if (sorted != identity) {
      throw Error(ErrorCode::bad_permutation, "order is not a permutation of [0, " +
                                                  std::to_string(n) + ")");
    }
    if (!std::isfinite(wp.probability) || wp.probability < 0.0) {
      throw Error(ErrorCode::not_normalized, "negative or non-finite permutation probability");
    }
    total += wp.probability;
    std::uint64_t before = 0;
    for (int player : wp.order) {
      per_player[static_cast<std::size_t>(player)][before] += wp.probability;
      before |= std::uint64_t{1} << player;
    }
  }
  if (std::abs(total - 1.0) > kNormalizationTol) {
    throw Error(ErrorCode::not_normalized, "permutation probabilities sum to " +
                                               std::to_string(total));
  }
  CoalitionStructure p(n, StructureKind::random_order);
  p.tables_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& t = p.tables_[static_cast<std::size_t>(i)];
    for (const auto& [mask, prob] : per_player[static_cast<std::size_t>(i)]) {
      t.masks.push_back(mask);
      t.probs.push_back(prob);
    }
    t.cumulative = accumulate(t.probs);
  }
  p.permutations_ = perms;
  std::vector<double> w;
  for (const auto& wp : perms) w.push_back(wp.probability);
  p.permutation_cumulative_ = accumulate(w);
  return p;
}

CoalitionStructure make_custom(int n, const std::map<int, std::map<std::string, double>>& tables) {
  check_n(n);
  CoalitionStructure p(n, StructureKind::custom);
  p.tables_.resize(static_cast<std::size_t>(n));
  for (const auto& [player, table] : tables) {
    if (player < 0 || player >= n) {
      throw Error(ErrorCode::index_out_of_range, "table for player " + std::to_string(player));
    }
  }
  for (int i = 0; i < n; ++i) {
    std::map<std::uint64_t, double> entries;
    double total = 0.0;
    if (auto it = tables.find(i); it != tables.end()) {
      for (const auto& [key, prob] : it->second) {
        const Coalition s = Coalition::from_key(n, key);
        if (s.contains(i)) {
          throw Error(ErrorCode::self_membership, "player " + std::to_string(i) +
                                                      " table contains key '" + key + "'");
        }
        if (!std::isfinite(prob) || prob < 0.0) {
          throw Error(ErrorCode::not_normalized, "probability for key '" + key + "' is invalid");
        }
        entries[s.mask()] += prob;
        total += prob;
      }
    }
    if (std::abs(total - 1.0) > kNormalizationTol) {
      throw Error(ErrorCode::not_normalized, "player " + std::to_string(i) +
                                                 " table sums to " + std::to_string(total));
    }
    auto& t = p.tables_[static_cast<std::size_t>(i)];
    for (const auto& [mask, prob] : entries) {
      t.masks.push_back(mask);
      t.probs.push_back(prob);
    }
    t.cumulative = accumulate(t.probs);
  }
  return p;
}

std::vector<WeightedPermutation> uniform_permutations(int n) {
  check_n(n);
  if (n > 10) throw Error(ErrorCode::too_many_players, "uniform permutation table needs n <= 10");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<WeightedPermutation> out;
  do {
    out.push_back({order, 0.0});
  } while (std::next_permutation(order.begin(), order.end()));
  const double w = 1.0 / static_cast<double>(out.size());
  for (auto& wp : out) wp.probability = w;
  return out;
}

EfficiencyReport is_efficient(const CoalitionStructure& p) {
  const int n = p.n_players();
  require_enumerable(n);
  EfficiencyReport report;
  const Coalition grand = Coalition::grand(n);
  for (int i = 0; i < n; ++i) report.grand_sum += p.pmf(i, grand.without(i));
  report.max_deviation = std::abs(report.grand_sum - 1.0);
  const std::uint64_t full = full_mask(n);
  for (std::uint64_t mask = 1; mask < full; ++mask) {
    const Coalition s(n, mask);
    double inflow = 0.0;
    double outflow = 0.0;
    for (int i = 0; i < n; ++i) {
      if (s.contains(i)) {
        inflow += p.pmf(i, s.without(i));
      } else {
        outflow += p.pmf(i, s);
      }
    }
    const double dev = std::abs(inflow - outflow);
    report.max_deviation = std::max(report.max_deviation, dev);
    if (dev > kStructureTol) report.violations.push_back(s);
  }
  report.efficient =
      std::abs(report.grand_sum - 1.0) <= kStructureTol && report.violations.empty();
  return report;
}

bool is_symmetric(const CoalitionStructure& p) {
  const int n = p.n_players();
  require_enumerable(n);
  std::vector<double> reference(static_cast<std::size_t>(n), NAN);
  for (int i = 0; i < n; ++i) {
    for (const Coalition& s : enumerate_subsets(n, i)) {
      const double value = p.pmf(i, s);
      double& ref = reference[static_cast<std::size_t>(s.size())];
      if (std::isnan(ref)) {
        ref = value;
      } else if (std::abs(ref - value) > kStructureTol) {
        return false;
      }
    }
  }
  return true;
}

Coalition sample_coalition(const CoalitionStructure& p, int player, std::mt19937_64& rng) {
  return p.sample(player, rng);
}

}  // namespace distval
