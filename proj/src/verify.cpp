#include "distval/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "distval/error.hpp"
#include "parallel.hpp"

namespace distval {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Plain exp-normalize; no max shift, no compensated sums.
std::vector<double> naive_softmax(const Eigen::VectorXd& logits) {
  std::vector<double> p(static_cast<std::size_t>(logits.size()));
  double total = 0.0;
  for (Eigen::Index k = 0; k < logits.size(); ++k) {
    p[static_cast<std::size_t>(k)] = std::exp(logits[k]);
    total += p[static_cast<std::size_t>(k)];
  }
  for (double& x : p) x /= total;
  return p;
}

double standard_gumbel(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = unit(rng);
  while (u <= 0.0) u = unit(rng);
  return -std::log(-std::log(u));
}

}  // namespace

double oracle_standard_value(const std::function<double(const Coalition&)>& u,
                             const CoalitionStructure& p, int player) {
  const int n = p.n_players();
  require_enumerable(n);
  if (player < 0 || player >= n) throw Error(ErrorCode::index_out_of_range, "player out of range");
  const std::uint64_t bit = std::uint64_t{1} << player;
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    if (mask & bit) continue;
    const double weight = p.pmf(player, Coalition(n, mask));
    if (weight == 0.0) continue;
    total += weight * (u(Coalition(n, mask | bit)) - u(Coalition(n, mask)));
  }
  return total;
}

Eigen::MatrixXd oracle_categorical_joint(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                                         std::size_t samples, std::uint64_t seed) {
  if (alpha.size() != beta.size() || alpha.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "alpha and beta must share a length >= 2");
  }
  if (samples == 0) throw Error(ErrorCode::invalid_argument, "need at least one sample");
  const Eigen::Index d = alpha.size();
  std::mt19937_64 rng(seed);
  std::vector<double> noise(static_cast<std::size_t>(d));
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t t = 0; t < samples; ++t) {
    for (double& e : noise) e = standard_gumbel(rng);
    Eigen::Index with = 0;
    Eigen::Index without = 0;
    for (Eigen::Index k = 1; k < d; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      if (alpha[k] + noise[kk] > alpha[with] + noise[static_cast<std::size_t>(with)]) with = k;
      if (beta[k] + noise[kk] > beta[without] + noise[static_cast<std::size_t>(without)]) without = k;
    }
    counts(with, without) += 1.0;
  }
  return counts / static_cast<double>(samples);
}

double total_variation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::invalid_argument, "total variation of differently shaped matrices");
  }
  return 0.5 * (a - b).cwiseAbs().sum();
}

std::string_view to_string(PropertyStatus status) {
  switch (status) {
    case PropertyStatus::pass: return "pass";
    case PropertyStatus::fail: return "fail";
    case PropertyStatus::not_applicable: return "not_applicable";
  }
  return "fail";
}

const std::vector<std::string>& property_ids() {
  static const std::vector<std::string> ids = {
      "prop1_i",         "prop1_ii",    "prop1_iii",           "prop1_iv",          "prop1_v",
      "marginal_consistency", "oracle_tv", "efficiency_structure", "symmetry_structure"};
  return ids;
}

namespace {

struct TrialResult {
  double dev = 0.0;
  bool structural_failure = false;
  json witness = json::object();
};

struct Generator {
  std::mt19937_64 rng;

  explicit Generator(std::uint64_t seed) : rng(seed) {}

  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  double normal(double sd) { return std::normal_distribution<double>(0.0, sd)(rng); }

  Eigen::VectorXd logits(int d, double sd) {
    Eigen::VectorXd v(d);
    for (int k = 0; k < d; ++k) v[k] = normal(sd);
    return v;
  }

  PayoffParams params(const FamilyTag& family) {
    switch (family.family) {
      case Family::bernoulli: return bernoulli(uniform(0.0, 1.0));
      case Family::gaussian: {
        const double mu = normal(2.0);
        const double sigma = uniform(0.0, 1.0) < 0.2 ? 0.0 : uniform(0.0, 2.0);
        return gaussian(mu, sigma);
      }
      case Family::categorical: return categorical(logits(family.classes, 2.0));
    }
    return bernoulli(0.0);
  }

  std::vector<PayoffParams> table(int n, const FamilyTag& family) {
    std::vector<PayoffParams> t;
    t.reserve(std::size_t{1} << n);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) t.push_back(params(family));
    return t;
  }

  std::vector<int> permutation(int n) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
  }

  CoalitionStructure random_order(int n) {
    const int count = uniform_int(1, 6);
    std::vector<WeightedPermutation> perms;
    double total = 0.0;
    for (int k = 0; k < count; ++k) {
      perms.push_back({permutation(n), uniform(0.05, 1.0)});
      total += perms.back().probability;
    }
    for (auto& wp : perms) wp.probability /= total;
    return make_random_order(n, perms);
  }

  std::vector<double> size_weights(int n) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (double& x : w) x = uniform(0.0, 1.0);
    return w;
  }
};

StochasticGame table_game(int n, const FamilyTag& family, std::vector<PayoffParams> table) {
  auto shared = std::make_shared<const std::vector<PayoffParams>>(std::move(table));
  return StochasticGame(n, family, [shared](const Coalition& c) { return (*shared)[c.mask()]; });
}

const FamilyTag kFamilies[] = {{Family::bernoulli, 0}, {Family::gaussian, 0}, {Family::categorical, 0}};

FamilyTag with_classes(FamilyTag family, Generator& gen) {
  if (family.family == Family::categorical) family.classes = gen.uniform_int(2, 5);
  return family;
}

json family_json(const FamilyTag& f) {
  json j = {{"family", std::string(to_string(f.family))}};
  if (f.family == Family::categorical) j["d"] = f.classes;
  return j;
}

/// Folds one check into a trial. A structural failure outranks any float gap
/// when choosing the witness.
void keep_worst(TrialResult& acc, double dev, json witness, bool structural = false) {
  if (std::isnan(dev)) dev = kInf;
  const bool worse = acc.witness.empty() || (structural && !acc.structural_failure) ||
                     (structural == acc.structural_failure && dev > acc.dev);
  acc.dev = std::max(acc.dev, dev);
  acc.structural_failure = acc.structural_failure || structural;
  if (worse) acc.witness = std::move(witness);
}

/// Largest entrywise gap between two values of one family. Gaussian values
/// are also compared component by component; differing component counts are
/// an infinite gap.
double value_gap(const DistributionalValue& a, const DistributionalValue& b) {
  const Eigen::VectorXd sa = summary_vector(a);
  const Eigen::VectorXd sb = summary_vector(b);
  if (sa.size() != sb.size()) return kInf;
  double gap = (sa - sb).cwiseAbs().maxCoeff();
  if (const auto* ga = std::get_if<GaussianValue>(&a)) {
    const auto& gb = std::get<GaussianValue>(b);
    if (ga->components.size() != gb.components.size()) return kInf;
    for (std::size_t k = 0; k < ga->components.size(); ++k) {
      const auto& x = ga->components[k];
      const auto& y = gb.components[k];
      gap = std::max({gap, std::abs(x.weight - y.weight), std::abs(x.mean - y.mean),
                      std::abs(x.sd - y.sd)});
    }
  }
  return gap;
}

/// True when exactly the same summary entries are zero in both values.
bool same_zero_pattern(const DistributionalValue& a, const DistributionalValue& b) {
  const Eigen::VectorXd sa = summary_vector(a);
  const Eigen::VectorXd sb = summary_vector(b);
  if (sa.size() != sb.size()) return false;
  for (Eigen::Index k = 0; k < sa.size(); ++k) {
    if ((sa[k] == 0.0) != (sb[k] == 0.0)) return false;
  }
  return true;
}

/// Deviation of a value from the point mass at 0. Returns (float gap, whether
/// any mass sits on a nonzero difference).
std::pair<double, bool> distance_from_zero(const DistributionalValue& value) {
  if (const auto* b = std::get_if<BernoulliValue>(&value)) {
    return {std::abs(1.0 - b->q_zero), b->q_plus != 0.0 || b->q_minus != 0.0};
  }
  if (const auto* g = std::get_if<GaussianValue>(&value)) {
    bool stray = false;
    double weight = 0.0;
    for (const auto& c : g->components) {
      if (c.mean != 0.0 || c.sd != 0.0) stray = true;
      weight += c.weight;
    }
    return {std::max(std::abs(1.0 - weight), std::abs(1.0 - g->sign_pmf[1])),
            stray || g->components.size() != 1};
  }
  const auto& q = std::get<CategoricalValue>(value).transition;
  bool stray = false;
  for (Eigen::Index r = 0; r < q.rows(); ++r) {
    for (Eigen::Index s = 0; s < q.cols(); ++s) {
      if (r != s && q(r, s) != 0.0) stray = true;
    }
  }
  return {std::abs(1.0 - q.trace()), stray};
}

struct Context {
  const SuiteOptions& options;
  std::uint64_t stream;  // per-property seed

  int players(Generator& gen) const {
    return options.structure ? options.structure->n_players() : gen.uniform_int(2, 6);
  }
};

// ---- value properties --------------------------------------------------------

TrialResult prop1_i(const Context& ctx, std::size_t trial, std::uint64_t seed) {
  TrialResult out;
  Generator gen(seed);
  const bool hand = trial == 0 && !ctx.options.structure;
  for (const FamilyTag& base : kFamilies) {
    FamilyTag family = with_classes(base, gen);
    int n = ctx.players(gen);
    std::vector<PayoffParams> table;
    if (hand) {
      // Two-player XOR embedded in every family: v(∅) = v([2]) low, singletons high.
      n = 2;
      for (std::uint64_t mask = 0; mask < 4; ++mask) {
        const bool high = mask == 1 || mask == 2;
        switch (family.family) {
          case Family::bernoulli: table.push_back(bernoulli(high ? 1.0 : 0.0)); break;
          case Family::gaussian: table.push_back(gaussian(high ? 1.0 : 0.0, 0.0)); break;
          case Family::categorical: {
            Eigen::VectorXd l = Eigen::VectorXd::Zero(family.classes);
            l[1] = high ? 8.0 : -8.0;
            table.push_back(categorical(l));
          }
        }
      }
    } else {
      table = gen.table(n, family);
    }
    const CoalitionStructure p = ctx.options.structure ? *ctx.options.structure : make_shapley(n);
    const StochasticGame g = table_game(n, family, table);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd e = expectation(exact_value(g, p, i));
      for (Eigen::Index c = 0; c < e.size(); ++c) {
        const auto u = [&](const Coalition& s) {
          const PayoffParams& params = table[s.mask()];
          if (const auto* b = std::get_if<BernoulliParams>(&params)) return b->pi;
          if (const auto* gp = std::get_if<GaussianParams>(&params)) return gp->mu;
          return naive_softmax(std::get<CategoricalParams>(params).logits)[static_cast<std::size_t>(c)];
        };
        const double phi = oracle_standard_value(u, p, i);
        json w = family_json(family);
        w.update({{"trial", trial}, {"n", n}, {"player", i}, {"class", c},
                  {"distributional", e[c]}, {"standard", phi}, {"hand_built", hand}});
        keep_worst(out, std::abs(e[c] - phi), std::move(w));
      }
    }
  }
  return out;
}

TrialResult prop1_ii(const Context& ctx, std::size_t trial, std::uint64_t seed) {
  TrialResult out;
  Generator gen(seed);
  const bool hand = trial == 0 && !ctx.options.structure;
  for (const FamilyTag& base : kFamilies) {
    const FamilyTag family = with_classes(base, gen);
    // Hand-built case: the XOR of players 0 and 1 with a third, ignored player.
    const int n = hand ? 3 : ctx.players(gen);
    const int null_player = hand ? 2 : gen.uniform_int(0, n - 1);
    std::vector<PayoffParams> table = gen.table(n, family);
    const std::uint64_t bit = std::uint64_t{1} << null_player;
    for (std::uint64_t mask = 0; mask < table.size(); ++mask) {
      if (hand) {
        const bool high = (mask & 3) == 1 || (mask & 3) == 2;
        if (family.family == Family::bernoulli) table[mask] = bernoulli(high ? 1.0 : 0.0);
      }
      if (mask & bit) table[mask] = table[mask & ~bit];
    }
    const CoalitionStructure p = ctx.options.structure ? *ctx.options.structure : make_shapley(n);
    const auto value = exact_value(table_game(n, family, table), p, null_player);
    const auto [gap, stray] = distance_from_zero(value);
    json w = family_json(family);
    w.update({{"trial", trial}, {"n", n}, {"player", null_player}, {"hand_built", hand}});
    if (stray) w["stray_mass"] = true;
    keep_worst(out, gap, std::move(w), stray);
  }
  return out;
}

TrialResult prop1_iii(const Context& ctx, std::size_t trial, std::uint64_t seed) {
  TrialResult out;
  Generator gen(seed);
  for (const FamilyTag& base : kFamilies) {
    const FamilyTag family = with_classes(base, gen);
    const int n = ctx.players(gen);
    const double weight = gen.uniform(0.0, 1.0);
    const StochasticGame first = table_game(n, family, gen.table(n, family));
    const StochasticGame second = table_game(n, family, gen.table(n, family));
    const StochasticGame mixed = StochasticGame::mixture(weight, first, second);
    const CoalitionStructure p = ctx.options.structure ? *ctx.options.structure : make_shapley(n);
    for (int i = 0; i < n; ++i) {
      DistributionalValue expected = zero_value(family);
      accumulate(expected, weight, exact_value(first, p, i));
      accumulate(expected, 1.0 - weight, exact_value(second, p, i));
      normalize_components(expected);
      const double gap = value_gap(exact_value(mixed, p, i), expected);
      json w = family_json(family);
      w.update({{"trial", trial}, {"n", n}, {"player", i}, {"weight", weight}});
      keep_worst(out, gap, std::move(w));
    }
  }
  return out;
}

TrialResult prop1_iv(const Context& ctx, std::size_t trial, std::uint64_t seed) {
  TrialResult out;
  Generator gen(seed);
  for (const FamilyTag& base : kFamilies) {
    const FamilyTag family = with_classes(base, gen);
    const int n = ctx.players(gen);
    const CoalitionStructure p = ctx.options.structure ? *ctx.options.structure
                                 : trial % 2 == 0      ? make_shapley(n)
                                                       : gen.random_order(n);
    const StochasticGame g = table_game(n, family, gen.table(n, family));
    Eigen::VectorXd total;
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd e = expectation(exact_value(g, p, i));
      total = i == 0 ? e : (total + e).eval();
    }
    const Eigen::VectorXd target =
        g.expected_payoff(Coalition::grand(n)) - g.expected_payoff(Coalition(n));
    json w = family_json(family);
    w.update({{"trial", trial}, {"n", n}, {"structure", std::string(to_string(p.kind()))}});
    keep_worst(out, (total - target).cwiseAbs().maxCoeff(), std::move(w));
  }
  return out;
}

std::uint64_t swap_bits(std::uint64_t mask, int i, int j) {
  const std::uint64_t bi = (mask >> i) & 1U;
  const std::uint64_t bj = (mask >> j) & 1U;
  if (bi == bj) return mask;
  return mask ^ ((std::uint64_t{1} << i) | (std::uint64_t{1} << j));
}

TrialResult prop1_v(const Context& ctx, std::size_t trial, std::uint64_t seed) {
  TrialResult out;
  Generator gen(seed);
  const bool hand = trial == 0 && !ctx.options.structure;
  for (const FamilyTag& base : kFamilies) {
    const FamilyTag family = with_classes(base, gen);
    const int n = hand ? 2 : ctx.players(gen);
    int i = 0;
    int j = 1;
    if (!hand) {
      i = gen.uniform_int(0, n - 1);
      do j = gen.uniform_int(0, n - 1); while (j == i);
    }
    std::vector<PayoffParams> table = gen.table(n, family);
    for (std::uint64_t mask = 0; mask < table.size(); ++mask) {
      if (hand && family.family == Family::bernoulli) {
        table[mask] = bernoulli(mask == 1 || mask == 2 ? 1.0 : 0.0);
      }
    }
    // Duplicate i and j: every coalition reads the entry of its i<->j mirror
    // with the smaller mask.
    for (std::uint64_t mask = 0; mask < table.size(); ++mask) {
      const std::uint64_t mirror = swap_bits(mask, i, j);
      if (mirror < mask) table[mask] = table[mirror];
    }
    const CoalitionStructure p = ctx.options.structure ? *ctx.options.structure
                                 : trial % 2 == 0      ? make_shapley(n)
                                                       : make_size_weighted(n, gen.size_weights(n));
    const StochasticGame g = table_game(n, family, table);
    const auto vi = exact_value(g, p, i);
    const auto vj = exact_value(g, p, j);
    json w = family_json(family);
    w.update({{"trial", trial}, {"n", n}, {"players", {i, j}}, {"hand_built", hand},
              {"structure", std::string(to_string(p.kind()))}});
    const bool broken = !same_zero_pattern(vi, vj);
    if (broken) w["zero_pattern_differs"] = true;
    keep_worst(out, value_gap(vi, vj), std::move(w), broken);
  }
  return out;
}

// ---- categorical kernel --------------------------------------------------------

TrialResult marginal_consistency(const Context& ctx, std::size_t trial, std::uint64_t seed) {
  TrialResult out;
  Generator gen(seed);
  for (std::size_t k = 0; k < ctx.options.pairs_per_trial; ++k) {
    const int d = gen.uniform_int(2, 12);
    const double scale = gen.uniform(0.0, 1.0) < 0.2 ? 20.0 : 3.0;
    const Eigen::VectorXd alpha = gen.logits(d, scale);
    const Eigen::VectorXd beta = gen.logits(d, scale);
    const Eigen::MatrixXd joint = categorical_mc(alpha, beta).joint;
    const std::vector<double> pa = naive_softmax(alpha);
    const std::vector<double> pb = naive_softmax(beta);
    double gap = 0.0;
    bool below = false;
    for (int r = 0; r < d; ++r) {
      gap = std::max(gap, std::abs(joint.row(r).sum() - pa[static_cast<std::size_t>(r)]));
      gap = std::max(gap, std::abs(joint.col(r).sum() - pb[static_cast<std::size_t>(r)]));
      for (int s = 0; s < d; ++s) {
        // With-class ranked strictly after the without-class by α − β.
        if (alpha[r] - beta[r] < alpha[s] - beta[s] && joint(r, s) != 0.0) below = true;
      }
    }
    json w = {{"trial", trial}, {"pair", k}, {"d", d}, {"alpha", std::vector<double>(alpha.begin(), alpha.end())},
              {"beta", std::vector<double>(beta.begin(), beta.end())}};
    if (below) w["lower_triangle_mass"] = true;
    keep_worst(out, gap, std::move(w), below);
  }
  return out;
}

TrialResult oracle_tv(const Context& ctx, std::size_t trial, std::uint64_t seed) {
  static constexpr int kDims[] = {2, 3, 5, 10};
  Generator gen(seed);
  const int d = kDims[trial % 4];
  const Eigen::VectorXd alpha = gen.logits(d, 1.5);
  const Eigen::VectorXd beta = gen.logits(d, 1.5);
  const Eigen::MatrixXd empirical =
      oracle_categorical_joint(alpha, beta, ctx.options.oracle_samples, gen.rng());
  TrialResult out;
  keep_worst(out, total_variation(categorical_mc(alpha, beta).joint, empirical),
             {{"trial", trial}, {"d", d},
              {"alpha", std::vector<double>(alpha.begin(), alpha.end())},
              {"beta", std::vector<double>(beta.begin(), beta.end())},
              {"samples", ctx.options.oracle_samples}});
  return out;
}

// ---- structure predicates ------------------------------------------------------

TrialResult efficiency_structure(const Context&, std::size_t trial, std::uint64_t seed) {
  TrialResult out;
  Generator gen(seed);
  const int n = gen.uniform_int(1, 6);
  const auto claim = [&](const CoalitionStructure& p, bool expected) {
    const EfficiencyReport r = is_efficient(p);
    json w = {{"trial", trial}, {"n", n}, {"structure", std::string(to_string(p.kind()))},
              {"efficient", r.efficient}, {"grand_sum", r.grand_sum}};
    const bool broken = r.efficient != expected;
    if (broken) w["misclassified"] = true;
    keep_worst(out, expected ? r.max_deviation : 0.0, std::move(w), broken);
  };
  claim(make_shapley(n), true);
  claim(gen.random_order(n), true);
  // Leave-one-out puts mass 1 on [n] \ i for each i, so Σ_i p^i([n] \ i) = n.
  const EfficiencyReport loo = is_efficient(make_leave_one_out(n));
  json w = {{"trial", trial}, {"n", n}, {"structure", "leave_one_out"}, {"grand_sum", loo.grand_sum}};
  const bool broken = loo.efficient != (n == 1);
  if (broken) w["misclassified"] = true;
  keep_worst(out, std::abs(loo.grand_sum - n), std::move(w), broken);
  return out;
}

TrialResult symmetry_structure(const Context&, std::size_t trial, std::uint64_t seed) {
  TrialResult out;
  Generator gen(seed);
  const int n = gen.uniform_int(2, 6);
  // Player 0 draws a uniform singleton; everyone else always sees ∅.
  std::map<int, std::map<std::string, double>> tables;
  for (int j = 1; j < n; ++j) tables[0][std::to_string(j)] = 1.0 / (n - 1);
  for (int i = 1; i < n; ++i) tables[i][""] = 1.0;
  const std::pair<CoalitionStructure, bool> cases[] = {
      {make_shapley(n), true},
      {make_size_weighted(n, gen.size_weights(n)), true},
      {make_leave_one_out(n), true},
      {make_custom(n, tables), false},
  };
  for (const auto& [p, expected] : cases) {
    const bool symmetric = is_symmetric(p);
    json w = {{"trial", trial}, {"n", n}, {"structure", std::string(to_string(p.kind()))},
              {"symmetric", symmetric}};
    const bool broken = symmetric != expected;
    if (broken) w["misclassified"] = true;
    keep_worst(out, 0.0, std::move(w), broken);
  }
  return out;
}

using TrialFn = TrialResult (*)(const Context&, std::size_t, std::uint64_t);

struct PropertyDef {
  const char* id;
  TrialFn trial;
  double tol;
};

const PropertyDef kProperties[] = {
    {"prop1_i", prop1_i, tolerance::kExpectation},
    {"prop1_ii", prop1_ii, tolerance::kExact},
    {"prop1_iii", prop1_iii, tolerance::kExact},
    {"prop1_iv", prop1_iv, tolerance::kExpectation},
    {"prop1_v", prop1_v, tolerance::kExact},
    {"marginal_consistency", marginal_consistency, tolerance::kMarginal},
    {"oracle_tv", oracle_tv, tolerance::kOracleTv},
    {"efficiency_structure", efficiency_structure, tolerance::kStructure},
    {"symmetry_structure", symmetry_structure, tolerance::kStructure},
};

std::optional<json> not_applicable(const std::string& id, const SuiteOptions& options) {
  if (!options.structure) return std::nullopt;
  const std::string kind(to_string(options.structure->kind()));
  if (id == "prop1_iv") {
    const EfficiencyReport r = is_efficient(*options.structure);
    if (!r.efficient) {
      return json{{"reason", "structure is not efficient"},
                  {"structure", kind},
                  {"grand_sum", r.grand_sum},
                  {"max_deviation", r.max_deviation}};
    }
  }
  if (id == "prop1_v" && !is_symmetric(*options.structure)) {
    return json{{"reason", "structure is not symmetric"}, {"structure", kind}};
  }
  return std::nullopt;
}

PropertyReport run_property(const PropertyDef& def, std::size_t index, const SuiteOptions& options) {
  PropertyReport report;
  report.property = def.id;
  report.tol = def.tol;
  try {
    if (auto reason = not_applicable(def.id, options)) {
      report.status = PropertyStatus::not_applicable;
      report.witness = std::move(*reason);
      return report;
    }
  } catch (const std::exception& e) {
    report.status = PropertyStatus::fail;
    report.max_dev = kInf;
    report.witness = {{"error", e.what()}};
    return report;
  }
  const std::size_t trials =
      def.trial == oracle_tv ? options.oracle_trials : options.trials;
  const Context ctx{options, derive_seed(options.seed, index)};
  std::vector<TrialResult> results(trials);
  detail::parallel_tasks(trials, options.threads, [&](std::size_t t) {
    try {
      results[t] = def.trial(ctx, t, derive_seed(ctx.stream, t));
    } catch (const std::exception& e) {
      results[t].dev = kInf;
      results[t].structural_failure = true;
      results[t].witness = {{"trial", t}, {"error", e.what()}};
    }
  });
  report.trials = trials;
  const TrialResult* worst = nullptr;
  bool structural = false;
  for (const auto& r : results) {
    structural = structural || r.structural_failure;
    report.max_dev = std::max(report.max_dev, r.dev);
    const bool worse = worst == nullptr ||
                       (r.structural_failure && !worst->structural_failure) ||
                       (r.structural_failure == worst->structural_failure && r.dev > worst->dev);
    if (worse) worst = &r;
  }
  if (worst != nullptr) report.witness = worst->witness;
  report.status = !structural && report.max_dev <= report.tol ? PropertyStatus::pass
                                                              : PropertyStatus::fail;
  return report;
}

}  // namespace

std::vector<PropertyReport> run_property_suite(const SuiteOptions& options) {
  for (const auto& id : options.selection) {
    if (std::find(property_ids().begin(), property_ids().end(), id) == property_ids().end()) {
      throw Error(ErrorCode::invalid_argument, "unknown property '" + id + "'");
    }
  }
  std::vector<PropertyReport> reports;
  for (std::size_t k = 0; k < std::size(kProperties); ++k) {
    const PropertyDef& def = kProperties[k];
    const bool selected = options.selection.empty() ||
                          std::find(options.selection.begin(), options.selection.end(), def.id) !=
                              options.selection.end();
    if (selected) reports.push_back(run_property(def, k, options));
  }
  return reports;
}

nlohmann::json to_json(const PropertyReport& report) {
  const auto number = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  return {{"property", report.property},
          {"status", std::string(to_string(report.status))},
          {"max_dev", number(report.max_dev)},
          {"tol", report.tol},
          {"trials", report.trials},
          {"witness", report.witness}};
}

namespace {

std::vector<int> rank_players(const std::vector<double>& score) {
  std::vector<int> order(score.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)];
  });
  return order;
}

// -1, 0, +1 with scores closer than 1e-12 counted as tied.
int compare(double a, double b) {
  if (std::abs(a - b) <= 1e-12) return 0;
  return a < b ? -1 : 1;
}

}  // namespace

RankDiscrepancy rank_discrepancy(const StochasticGame& g, const CoalitionStructure& p,
                                 const ExecutionOptions& exec) {
  require_enumerable(g.n_players());
  RankDiscrepancy out;
  const int n = g.n_players();
  for (int i = 0; i < n; ++i) {
    const DistributionalValue v = exact_value(g, p, i, exec);
    out.importance.push_back(importance(v));
    out.abs_importance.push_back(abs_importance(v));
  }
  out.order_importance = rank_players(out.importance);
  out.order_abs = rank_players(out.abs_importance);
  const auto& a = out.importance;
  const auto& b = out.abs_importance;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > 1e-12 && b[i] <= 1e-12) out.aggregation_bias = true;
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if (compare(a[i], a[j]) != compare(b[i], b[j])) out.orders_differ = true;
    }
  }
  const double top_a = *std::max_element(a.begin(), a.end());
  const double top_b = *std::max_element(b.begin(), b.end());
  bool shared_top = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (compare(a[i], top_a) == 0 && compare(b[i], top_b) == 0) shared_top = true;
  }
  out.top_differs = !shared_top;
  return out;
}

}  // namespace distval
