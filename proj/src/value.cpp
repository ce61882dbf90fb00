#include "distval/value.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "distval/error.hpp"
#include "parallel.hpp"

namespace distval {

namespace {

constexpr std::size_t kCoalitionBlock = 1024;
constexpr std::size_t kSampleBlock = 4096;
constexpr double kMergeTolerance = 1e-12;

DistributionalValue single_marginal(const PayoffParams& with, const PayoffParams& without) {
  if (const auto* b = std::get_if<BernoulliParams>(&with)) {
    const BernoulliMC mc = bernoulli_mc(b->pi, std::get<BernoulliParams>(without).pi);
    return BernoulliValue{mc.q_plus, mc.q_minus, mc.q_zero};
  }
  if (const auto* g = std::get_if<GaussianParams>(&with)) {
    const auto& h = std::get<GaussianParams>(without);
    const GaussianMC mc = gaussian_mc(g->mu, g->sigma, h.mu, h.sigma);
    GaussianValue v;
    v.components.push_back({1.0, mc.mean, mc.sd});
    v.sign_pmf[static_cast<std::size_t>(mc.sign_tracker + 1)] = 1.0;
    return v;
  }
  return CategoricalValue{categorical_mc(std::get<CategoricalParams>(with).logits,
                                         std::get<CategoricalParams>(without).logits)
                              .joint};
}

// Every coalition a player's marginals touch: S and S ∪ i.
std::vector<Coalition> touched_coalitions(const std::vector<Coalition>& subsets, int player) {
  std::vector<Coalition> out;
  out.reserve(2 * subsets.size());
  for (const auto& s : subsets) {
    out.push_back(s);
    out.push_back(s.with(player));
  }
  return out;
}

}  // namespace

DistributionalValue zero_value(const FamilyTag& kind) {
  switch (kind.family) {
    case Family::bernoulli: return BernoulliValue{};
    case Family::gaussian: return GaussianValue{};
    case Family::categorical:
      return CategoricalValue{Eigen::MatrixXd::Zero(kind.classes, kind.classes)};
  }
  throw Error(ErrorCode::unsupported_family, "unknown family");
}

void accumulate(DistributionalValue& value, double weight, const DistributionalValue& term) {
  if (value.index() != term.index()) {
    throw Error(ErrorCode::family_mismatch, "cannot mix values of different families");
  }
  if (auto* b = std::get_if<BernoulliValue>(&value)) {
    const auto& t = std::get<BernoulliValue>(term);
    b->q_plus += weight * t.q_plus;
    b->q_minus += weight * t.q_minus;
    b->q_zero += weight * t.q_zero;
  } else if (auto* g = std::get_if<GaussianValue>(&value)) {
    const auto& t = std::get<GaussianValue>(term);
    for (const auto& c : t.components) g->components.push_back({weight * c.weight, c.mean, c.sd});
    for (std::size_t k = 0; k < 3; ++k) g->sign_pmf[k] += weight * t.sign_pmf[k];
  } else {
    auto& c = std::get<CategoricalValue>(value);
    const auto& t = std::get<CategoricalValue>(term);
    if (c.transition.rows() != t.transition.rows()) {
      throw Error(ErrorCode::family_mismatch, "categorical values differ in class count");
    }
    c.transition += weight * t.transition;
  }
}

void normalize_components(DistributionalValue& value) {
  auto* g = std::get_if<GaussianValue>(&value);
  if (g == nullptr || g->components.empty()) return;
  auto& comps = g->components;
  std::stable_sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) {
    return a.mean != b.mean ? a.mean < b.mean : a.sd < b.sd;
  });
  std::vector<GaussianComponent> merged;
  for (const auto& c : comps) {
    if (c.weight == 0.0) continue;
    if (!merged.empty() && std::abs(merged.back().mean - c.mean) <= kMergeTolerance &&
        std::abs(merged.back().sd - c.sd) <= kMergeTolerance) {
      merged.back().weight += c.weight;
    } else {
      merged.push_back(c);
    }
  }
  comps = std::move(merged);
}

DistributionalValue coalition_marginal(const StochasticGame& g, const Coalition& s, int player) {
  if (s.contains(player)) {
    throw Error(ErrorCode::already_member, "coalition already contains the player");
  }
  const Coalition with = s.with(player);
  if (g.is_mixture()) {
    DistributionalValue out = zero_value(g.kind());
    accumulate(out, g.mixture_weight(), coalition_marginal(g.first(), s, player));
    accumulate(out, 1.0 - g.mixture_weight(), coalition_marginal(g.second(), s, player));
    return out;
  }
  return single_marginal(g.payoff(with), g.payoff(s));
}

DistributionalValue exact_value(const StochasticGame& g, const CoalitionStructure& p, int player,
                                const ExecutionOptions& exec) {
  if (p.n_players() != g.n_players()) {
    throw Error(ErrorCode::invalid_argument, "structure and game differ in player count");
  }
  require_enumerable(g.n_players());
  const auto support = p.support(player);
  {
    std::vector<Coalition> subsets;
    subsets.reserve(support.size());
    for (const auto& [s, w] : support) subsets.push_back(s);
    g.prefetch(touched_coalitions(subsets, player));
  }
  const std::size_t blocks = detail::block_count(support.size(), kCoalitionBlock);
  std::vector<DistributionalValue> partial(blocks, zero_value(g.kind()));
  detail::parallel_tasks(blocks, exec.threads, [&](std::size_t b) {
    const std::size_t end = std::min(support.size(), (b + 1) * kCoalitionBlock);
    for (std::size_t k = b * kCoalitionBlock; k < end; ++k) {
      accumulate(partial[b], support[k].second,
                 coalition_marginal(g, support[k].first, player));
    }
  });
  DistributionalValue out = zero_value(g.kind());
  for (const auto& part : partial) accumulate(out, 1.0, part);
  normalize_components(out);
  return out;
}

Eigen::VectorXd summary_vector(const DistributionalValue& value) {
  if (const auto* b = std::get_if<BernoulliValue>(&value)) {
    return Eigen::Vector3d(b->q_plus, b->q_minus, b->q_zero);
  }
  if (const auto* g = std::get_if<GaussianValue>(&value)) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(6);
    for (const auto& c : g->components) {
      out[0] += c.weight * c.mean;
      out[1] += c.weight * (c.mean * c.mean + c.sd * c.sd);
      if (c.mean == 0.0 && c.sd == 0.0) out[5] += c.weight;
    }
    out[2] = g->sign_pmf[0];
    out[3] = g->sign_pmf[1];
    out[4] = g->sign_pmf[2];
    return out;
  }
  const auto& t = std::get<CategoricalValue>(value).transition;
  return Eigen::Map<const Eigen::VectorXd>(t.data(), t.size());
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over a golden-ratio stride.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<McEstimate> mc_value(const StochasticGame& g, const CoalitionStructure& p,
                                 const std::vector<int>& players, const McOptions& options) {
  if (options.samples < 1) throw Error(ErrorCode::invalid_argument, "mc_value needs samples >= 1");
  if (p.n_players() != g.n_players()) {
    throw Error(ErrorCode::invalid_argument, "structure and game differ in player count");
  }
  for (int i : players) {
    if (i < 0 || i >= g.n_players()) {
      throw Error(ErrorCode::index_out_of_range, "player " + std::to_string(i));
    }
  }
  using CountMap = std::unordered_map<std::uint64_t, std::uint64_t>;
  const std::size_t blocks = detail::block_count(options.samples, kSampleBlock);
  // counts[block][player slot]
  std::vector<std::vector<CountMap>> counts(blocks, std::vector<CountMap>(players.size()));
  detail::parallel_tasks(blocks, options.threads, [&](std::size_t b) {
    const std::size_t end = std::min(options.samples, (b + 1) * kSampleBlock);
    for (std::size_t t = b * kSampleBlock; t < end; ++t) {
      std::mt19937_64 rng(derive_seed(options.seed, t));
      if (p.samples_permutations()) {
        const std::vector<int> order = p.sample_permutation(rng);
        std::vector<std::uint64_t> before(static_cast<std::size_t>(g.n_players()));
        std::uint64_t mask = 0;
        for (int q : order) {
          before[static_cast<std::size_t>(q)] = mask;
          mask |= std::uint64_t{1} << q;
        }
        for (std::size_t slot = 0; slot < players.size(); ++slot) {
          ++counts[b][slot][before[static_cast<std::size_t>(players[slot])]];
        }
      } else {
        for (std::size_t slot = 0; slot < players.size(); ++slot) {
          ++counts[b][slot][p.sample(players[slot], rng).mask()];
        }
      }
    }
  });

  std::vector<McEstimate> out;
  out.reserve(players.size());
  const double n_samples = static_cast<double>(options.samples);
  for (std::size_t slot = 0; slot < players.size(); ++slot) {
    const int player = players[slot];
    std::map<std::uint64_t, std::uint64_t> merged;
    for (const auto& block : counts) {
      for (const auto& [mask, count] : block[slot]) merged[mask] += count;
    }
    std::vector<std::pair<std::uint64_t, std::uint64_t>> distinct(merged.begin(), merged.end());
    {
      std::vector<Coalition> subsets;
      for (const auto& [mask, count] : distinct) subsets.emplace_back(g.n_players(), mask);
      g.prefetch(touched_coalitions(subsets, player));
    }
    std::vector<DistributionalValue> laws(distinct.size());
    detail::parallel_tasks(distinct.size(), options.threads, [&](std::size_t k) {
      laws[k] = coalition_marginal(g, Coalition(g.n_players(), distinct[k].first), player);
    });

    McEstimate est;
    est.player = player;
    est.samples = options.samples;
    est.value = zero_value(g.kind());
    Eigen::VectorXd mean;
    std::vector<Eigen::VectorXd> summaries(laws.size());
    for (std::size_t k = 0; k < laws.size(); ++k) {
      const double weight = static_cast<double>(distinct[k].second) / n_samples;
      accumulate(est.value, weight, laws[k]);
      summaries[k] = summary_vector(laws[k]);
      if (k == 0) mean = Eigen::VectorXd::Zero(summaries[k].size());
      mean += weight * summaries[k];
    }
    Eigen::VectorXd squares = Eigen::VectorXd::Zero(mean.size());
    for (std::size_t k = 0; k < laws.size(); ++k) {
      squares += static_cast<double>(distinct[k].second) *
                 (summaries[k] - mean).cwiseAbs2();
    }
    normalize_components(est.value);
    est.summary = summary_vector(est.value);
    est.standard_error = options.samples > 1
                             ? (squares / ((n_samples - 1.0) * n_samples)).cwiseSqrt().eval()
                             : Eigen::VectorXd::Zero(mean.size()).eval();
    out.push_back(std::move(est));
  }
  return out;
}

McEstimate mc_value(const StochasticGame& g, const CoalitionStructure& p, int player,
                    const McOptions& options) {
  return std::move(mc_value(g, p, std::vector<int>{player}, options).front());
}

namespace {

bool small_support(const CoalitionStructure& p) {
  const int n = p.n_players();
  if (n - 1 > enumeration_limit() || n - 1 >= 63) return false;
  if (p.kind() == StructureKind::custom || p.kind() == StructureKind::leave_one_out) return true;
  return (std::size_t{1} << (n - 1)) <= kSystematicSupportLimit;
}

std::vector<Coalition> draw_coalitions(const CoalitionStructure& p, int player,
                                       const SampledOptions& options) {
  const std::size_t k = options.coalition_samples;
  std::vector<Coalition> out;
  out.reserve(k);
  if (!small_support(p)) {
    for (std::size_t t = 0; t < k; ++t) {
      std::mt19937_64 rng(derive_seed(options.seed, t));
      out.push_back(p.sample(player, rng));
    }
    return out;
  }
  const auto support = p.support(player);
  std::mt19937_64 rng(derive_seed(options.seed, 0));
  const double offset = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  std::size_t index = 0;
  double cumulative = support.empty() ? 1.0 : support[0].second;
  for (std::size_t t = 0; t < k; ++t) {
    const double u = (static_cast<double>(t) + offset) / static_cast<double>(k);
    while (u >= cumulative && index + 1 < support.size()) cumulative += support[++index].second;
    out.push_back(support[index].first);
  }
  return out;
}

}  // namespace

CategoricalValue mc_value_sampled(const OutcomeOracle& oracle, int classes,
                                  const CoalitionStructure& p, int player,
                                  const SampledOptions& options) {
  if (options.seed_count == 0) throw Error(ErrorCode::invalid_argument, "no noise seeds (r = 0)");
  if (options.coalition_samples == 0) {
    throw Error(ErrorCode::invalid_argument, "no coalition samples (k = 0)");
  }
  if (classes < 2) throw Error(ErrorCode::invalid_argument, "categorical needs d >= 2");
  std::vector<std::uint64_t> noise_seeds(options.seed_count);
  for (std::size_t j = 0; j < options.seed_count; ++j) {
    noise_seeds[j] = derive_seed(options.seed ^ 0xA5A5A5A5A5A5A5A5ULL, j);
  }
  auto label = [&](const Coalition& c, std::uint64_t noise) {
    int y = 0;
    try {
      y = oracle(c, noise);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::oracle_failure, e.what());
    }
    if (y < 0 || y >= classes) {
      throw Error(ErrorCode::oracle_failure, "outcome label " + std::to_string(y) +
                                                 " outside [0, " + std::to_string(classes) + ")");
    }
    return y;
  };
  const std::vector<Coalition> coalitions = draw_coalitions(p, player, options);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(classes, classes);
  for (const Coalition& s : coalitions) {
    const Coalition with = s.with(player);
    for (std::uint64_t noise : noise_seeds) counts(label(with, noise), label(s, noise)) += 1.0;
  }
  counts /= static_cast<double>(options.coalition_samples * options.seed_count);
  return CategoricalValue{std::move(counts)};
}

}  // namespace distval
