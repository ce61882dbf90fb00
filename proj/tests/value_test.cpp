#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "distval/builders.hpp"
#include "distval/error.hpp"
#include "distval/value.hpp"
#include "distval/verify.hpp"
#include "test_util.hpp"

namespace distval {
namespace {

using testing::random_table;
using testing::table_game;

const FamilyTag kBernoulli{Family::bernoulli, 0};
const FamilyTag kGaussian{Family::gaussian, 0};

FamilyTag categorical_tag(int d) { return {Family::categorical, d}; }

// Two-player XOR as a 2-class categorical game: class 1 iff exactly one player.
StochasticGame xor_categorical() {
  std::vector<PayoffParams> t;
  for (std::uint64_t mask = 0; mask < 4; ++mask) {
    const double high = (mask == 1 || mask == 2) ? 40.0 : -40.0;
    t.push_back(categorical(Eigen::Vector2d(0.0, high)));
  }
  return table_game(2, categorical_tag(2), t);
}

// ---- exact values -----------------------------------------------------------------

TEST(ExactValue, XorShapley) {
  const StochasticGame g = make_xor_game();
  const auto p = make_shapley(2);
  for (int i = 0; i < 2; ++i) {
    const auto v = std::get<BernoulliValue>(exact_value(g, p, i));
    EXPECT_EQ(v.q_plus, 0.5);
    EXPECT_EQ(v.q_minus, 0.5);
    EXPECT_EQ(v.q_zero, 0.0);
    EXPECT_EQ(importance(v), 1.0);
    EXPECT_EQ(expectation(v)[0], 0.0);
    EXPECT_EQ(bernoulli_variance(v), 1.0);
    EXPECT_NEAR(entropy(v), std::log(2.0), 1e-15);
  }
}

TEST(ExactValue, NullPlayerIsPointMassAtZero) {
  std::mt19937_64 rng(1);
  const int n = 4;
  const int null_player = 2;
  for (const FamilyTag family : {kBernoulli, kGaussian, categorical_tag(4)}) {
    auto table = random_table(rng, n, family);
    for (std::uint64_t mask = 0; mask < table.size(); ++mask) {
      if (mask & (1U << null_player)) table[mask] = table[mask & ~(1U << null_player)];
    }
    const auto v = exact_value(table_game(n, family, table), make_shapley(n), null_player);
    EXPECT_NEAR(importance(v), 0.0, 1e-15);
    if (const auto* b = std::get_if<BernoulliValue>(&v)) {
      EXPECT_EQ(b->q_plus, 0.0);
      EXPECT_EQ(b->q_minus, 0.0);
    } else if (const auto* gv = std::get_if<GaussianValue>(&v)) {
      ASSERT_EQ(gv->components.size(), 1U);
      EXPECT_EQ(gv->components[0].mean, 0.0);
      EXPECT_EQ(gv->components[0].sd, 0.0);
      EXPECT_NEAR(gv->sign_pmf[1], 1.0, 1e-15);
    } else {
      const auto& q = std::get<CategoricalValue>(v).transition;
      EXPECT_EQ((q - Eigen::MatrixXd(q.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(ExactValue, TwoPlayerCategoricalIsHalfAndHalfMixture) {
  std::mt19937_64 rng(2);
  const auto table = random_table(rng, 2, categorical_tag(3));
  const StochasticGame g = table_game(2, categorical_tag(3), table);
  const auto& th = [&](std::uint64_t m) { return std::get<CategoricalParams>(table[m]).logits; };
  const Eigen::MatrixXd expected =
      0.5 * categorical_mc(th(1), th(0)).joint + 0.5 * categorical_mc(th(3), th(2)).joint;
  const auto v = std::get<CategoricalValue>(exact_value(g, make_shapley(2), 0));
  EXPECT_LE((v.transition - expected).cwiseAbs().maxCoeff(), 1e-15);

  const auto est = mc_value(g, make_shapley(2), 0, {1000000, 5, 1});
  for (Eigen::Index k = 0; k < est.summary.size(); ++k) {
    EXPECT_NEAR(est.summary[k], summary_vector(v)[k], 4 * est.standard_error[k] + 1e-12);
  }
}

TEST(ExactValue, GaussianMixtureMergesAndTracksSign) {
  // v(S) depends only on whether player 0 is present; σ rises with player 0.
  std::vector<PayoffParams> t;
  for (std::uint64_t mask = 0; mask < 8; ++mask) {
    t.push_back((mask & 1) ? gaussian(2.0, 3.0) : gaussian(0.5, 1.0));
  }
  const auto v = std::get<GaussianValue>(exact_value(table_game(3, kGaussian, t), make_shapley(3), 0));
  ASSERT_EQ(v.components.size(), 1U);
  EXPECT_NEAR(v.components[0].weight, 1.0, 1e-15);
  EXPECT_EQ(v.components[0].mean, 1.5);
  EXPECT_EQ(v.components[0].sd, 2.0);
  EXPECT_NEAR(v.sign_pmf[2], 1.0, 1e-15);
  EXPECT_THROW(entropy(DistributionalValue(v)), Error);
}

TEST(ExactValue, GaussianComponentCountIsBounded) {
  std::mt19937_64 rng(3);
  const int n = 5;
  const auto g = table_game(n, kGaussian, random_table(rng, n, kGaussian));
  for (int i = 0; i < n; ++i) {
    const auto v = std::get<GaussianValue>(exact_value(g, make_shapley(n), i));
    EXPECT_LE(v.components.size(), std::size_t{1} << (n - 1));
    double w = 0.0;
    for (const auto& c : v.components) w += c.weight;
    EXPECT_NEAR(w, 1.0, 1e-10);
    EXPECT_NEAR(v.sign_pmf[0] + v.sign_pmf[1] + v.sign_pmf[2], 1.0, 1e-12);
  }
}

TEST(ExactValue, ThreadCountDoesNotChangeBits) {
  std::mt19937_64 rng(4);
  const int n = 12;
  const auto g = table_game(n, categorical_tag(3), random_table(rng, n, categorical_tag(3)));
  const auto p = make_shapley(n);
  const auto one = std::get<CategoricalValue>(exact_value(g, p, 3, {1}));
  const auto many = std::get<CategoricalValue>(exact_value(g, p, 3, {8}));
  EXPECT_EQ((one.transition - many.transition).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ExactValue, StatisticsIgnoreEnumerationOrder) {
  std::mt19937_64 rng(5);
  const int n = 5;
  for (const FamilyTag family : {kBernoulli, kGaussian, categorical_tag(3)}) {
    const auto g = table_game(n, family, random_table(rng, n, family));
    const auto p = make_shapley(n);
    const auto forward = exact_value(g, p, 1);
    auto subsets = enumerate_subsets(n, 1);
    std::shuffle(subsets.begin(), subsets.end(), rng);
    DistributionalValue shuffled = zero_value(family);
    for (const auto& s : subsets) accumulate(shuffled, p.pmf(1, s), coalition_marginal(g, s, 1));
    normalize_components(shuffled);
    EXPECT_NEAR(importance(forward), importance(shuffled), 1e-12);
    EXPECT_LE((expectation(forward) - expectation(shuffled)).cwiseAbs().maxCoeff(), 1e-12);
    if (family.family != Family::categorical) {
      EXPECT_NEAR(variance(forward), variance(shuffled), 1e-12);
    }
    if (family.family != Family::gaussian) {
      EXPECT_NEAR(entropy(forward), entropy(shuffled), 1e-12);
    }
  }
}

TEST(ExactValue, RejectsMismatchedStructure) {
  EXPECT_THROW(exact_value(make_xor_game(), make_shapley(3), 0), Error);
}

// ---- Monte Carlo ------------------------------------------------------------------

TEST(MonteCarlo, XorWithinBinomialBand) {
  const auto est = mc_value(make_xor_game(), make_shapley(2), 1, {10000, 7, 1});
  const auto& v = std::get<BernoulliValue>(est.value);
  EXPECT_NEAR(v.q_plus, 0.5, 0.02);
  EXPECT_NEAR(v.q_plus + v.q_minus, 1.0, 1e-12);
}

TEST(MonteCarlo, LeaveOneOutIsExactAfterOneSample) {
  std::mt19937_64 rng(6);
  const auto g = table_game(3, categorical_tag(3), random_table(rng, 3, categorical_tag(3)));
  const auto p = make_leave_one_out(3);
  const auto est = mc_value(g, p, 0, {1, 1, 1});
  EXPECT_LE((summary_vector(est.value) - summary_vector(exact_value(g, p, 0))).cwiseAbs().maxCoeff(),
            1e-15);
}

TEST(MonteCarlo, DeterministicAcrossRunsAndThreads) {
  std::mt19937_64 rng(7);
  const int n = 6;
  const auto g = table_game(n, kGaussian, random_table(rng, n, kGaussian));
  const std::vector<int> players = {0, 1, 2, 3, 4, 5};
  const auto a = mc_value(g, make_shapley(n), players, {20000, 42, 1});
  const auto b = mc_value(g, make_shapley(n), players, {20000, 42, 1});
  const auto c = mc_value(g, make_shapley(n), players, {20000, 42, 8});
  for (std::size_t k = 0; k < players.size(); ++k) {
    EXPECT_EQ((a[k].summary - b[k].summary).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((a[k].summary - c[k].summary).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((a[k].standard_error - c[k].standard_error).cwiseAbs().maxCoeff(), 0.0);
  }
}

// Every family and structure kind, n up to 8, 10^5 samples, 4 standard errors.
TEST(MonteCarlo, ConsistentWithExactValue) {
  std::mt19937_64 rng(8);
  int checked = 0;
  for (int n : {3, 5, 8}) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (double& x : w) x = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    std::vector<int> forward(static_cast<std::size_t>(n));
    std::iota(forward.begin(), forward.end(), 0);
    const std::vector<int> backward(forward.rbegin(), forward.rend());
    const CoalitionStructure structures[] = {make_shapley(n), make_size_weighted(n, w),
                                             make_leave_one_out(n),
                                             make_random_order(n, {{forward, 0.4}, {backward, 0.6}})};
    for (const FamilyTag family : {kBernoulli, kGaussian, categorical_tag(3)}) {
      const auto g = table_game(n, family, random_table(rng, n, family));
      for (const auto& p : structures) {
        const int i = checked % n;
        const auto est = mc_value(g, p, i, {100000, static_cast<std::uint64_t>(checked), 1});
        const Eigen::VectorXd exact = summary_vector(exact_value(g, p, i));
        for (Eigen::Index k = 0; k < exact.size(); ++k) {
          EXPECT_LE(std::abs(est.summary[k] - exact[k]), 4 * est.standard_error[k] + 1e-12)
              << to_string(p.kind()) << " " << to_string(family.family) << " entry " << k;
        }
        ++checked;
      }
    }
  }
}

// ---- nested sampling ------------------------------------------------------------

TEST(NestedSampling, CoalitionIndependentOracleNeverChanges) {
  const OutcomeOracle oracle = [](const Coalition&, std::uint64_t seed) {
    return static_cast<int>(seed % 4);
  };
  const auto v = mc_value_sampled(oracle, 4, make_shapley(5), 2, {50, 200, 3});
  EXPECT_EQ(v.p_zero(), 1.0);
}

TEST(NestedSampling, GumbelSimulatorMatchesExact) {
  std::mt19937_64 rng(9);
  const int n = 4;
  const auto g = table_game(n, categorical_tag(3), random_table(rng, n, categorical_tag(3)));
  const auto p = make_shapley(n);
  const auto estimate = mc_value_sampled(gumbel_outcome_oracle(g), 3, p, 1, {200, 5000, 11});
  const auto exact = std::get<CategoricalValue>(exact_value(g, p, 1));
  EXPECT_LE(total_variation(estimate.transition, exact.transition), 0.02);
}

TEST(NestedSampling, Errors) {
  const OutcomeOracle oracle = [](const Coalition&, std::uint64_t) { return 0; };
  EXPECT_THROW(mc_value_sampled(oracle, 2, make_shapley(2), 0, {10, 0, 0}), Error);
  EXPECT_THROW(mc_value_sampled(oracle, 2, make_shapley(2), 0, {0, 10, 0}), Error);
  const OutcomeOracle bad = [](const Coalition&, std::uint64_t) { return 7; };
  try {
    mc_value_sampled(bad, 2, make_shapley(2), 0, {3, 3, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::oracle_failure);
  }
}

// ---- statistics -----------------------------------------------------------------

TEST(Statistics, ImportanceCases) {
  EXPECT_EQ(importance(BernoulliValue{0.0, 0.0, 1.0}), 0.0);
  CategoricalValue diag{Eigen::Vector3d(0.2, 0.3, 0.5).asDiagonal()};
  EXPECT_NEAR(importance(diag), 0.0, 1e-15);
  GaussianValue g;
  g.components = {{0.25, 0.0, 0.0}, {0.75, 0.0, 1.0}};
  g.sign_pmf = {0.0, 0.25, 0.75};
  EXPECT_EQ(importance(g), 0.75);
}

TEST(Statistics, ExpectationCases) {
  GaussianValue dirac;
  dirac.components = {{1.0, 1.0, 0.0}};
  dirac.sign_pmf = {0.0, 1.0, 0.0};
  EXPECT_EQ(expectation(dirac)[0], 1.0);

  std::mt19937_64 rng(10);
  for (int k = 0; k < 100; ++k) {
    const auto q = categorical_mc(testing::random_logits(rng, 5), testing::random_logits(rng, 5));
    EXPECT_NEAR(expectation(CategoricalValue{q.joint}).sum(), 0.0, 1e-12);
  }
}

TEST(Statistics, BernoulliVarianceMatchesSimulation) {
  EXPECT_EQ(bernoulli_variance({0.0, 0.0, 1.0}), 0.0);
  const BernoulliValue v{0.5, 0.0, 0.5};
  EXPECT_EQ(bernoulli_variance(v), 0.25);
  std::mt19937_64 rng(11);
  std::discrete_distribution<int> atom({v.q_plus, v.q_minus, v.q_zero});
  const int values[] = {1, -1, 0};
  double sum = 0.0, sq = 0.0;
  const int draws = 1000000;
  for (int k = 0; k < draws; ++k) {
    const double x = values[atom(rng)];
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sq / draws - (sum / draws) * (sum / draws), 0.25, 0.002);
}

TEST(Statistics, ModeChange) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(3, 3);
  q(0, 2) = 0.4;
  q(1, 1) = 0.6;
  const Transition t = mode_change(CategoricalValue{q});
  EXPECT_EQ(t.from, 2);
  EXPECT_EQ(t.to, 0);
  EXPECT_EQ(t.probability, 0.4);

  const Transition none = mode_change(CategoricalValue{Eigen::MatrixXd(Eigen::Vector3d(0.2, 0.3, 0.5).asDiagonal())});
  EXPECT_EQ(none.probability, 0.0);
  EXPECT_EQ(none.from, 0);
  EXPECT_EQ(none.to, 1);
}

TEST(Statistics, FlipAwayOnXorEmbedding) {
  const auto v = std::get<CategoricalValue>(exact_value(xor_categorical(), make_leave_one_out(2), 0));
  const FlipAway f = flip_away(v);
  EXPECT_EQ(f.from, 1);
  EXPECT_NEAR(f.probability, 1.0, 1e-12);
  EXPECT_EQ(flip_away(CategoricalValue{Eigen::MatrixXd(Eigen::Vector2d(0.5, 0.5).asDiagonal())}).probability, 0.0);
}

TEST(Statistics, FlipAwayMatchesBruteForce) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 100; ++k) {
    Eigen::MatrixXd q = Eigen::MatrixXd::NullaryExpr(4, 4, [&] {
      return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    });
    q /= q.sum();
    double best = -1.0;
    int best_s = -1;
    for (int s = 0; s < 4; ++s) {
      double away = 0.0;
      for (int r = 0; r < 4; ++r) {
        if (r != s) away += q(r, s);
      }
      if (away > best) {
        best = away;
        best_s = s;
      }
    }
    const FlipAway f = flip_away(CategoricalValue{q});
    EXPECT_EQ(f.from, best_s);
    EXPECT_NEAR(f.probability, best, 1e-15);
  }
}

TEST(Statistics, EntropyCases) {
  EXPECT_EQ(entropy(BernoulliValue{0.0, 0.0, 1.0}), 0.0);
  for (int d : {2, 3, 5}) {
    const double atoms = d * d - d + 1;
    Eigen::MatrixXd q = Eigen::MatrixXd::Constant(d, d, 1.0 / atoms);
    q.diagonal().setConstant(1.0 / atoms / d);
    EXPECT_NEAR(entropy(CategoricalValue{q}), std::log(atoms), 1e-12);
  }
}

TEST(Statistics, TopTransitions) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(3, 3);
  q(0, 1) = 0.2;
  q(2, 1) = 0.3;
  q(1, 1) = 0.5;
  const CategoricalValue v{q};
  const auto top = top_transitions(v, 5);
  ASSERT_EQ(top.size(), 2U);
  EXPECT_EQ(top[0].to, 2);
  EXPECT_EQ(top[0].from, 1);
  EXPECT_EQ(top[1].probability, 0.2);
  const auto one = top_transitions(v, 1);
  const Transition mode = mode_change(v);
  EXPECT_EQ(one[0].from, mode.from);
  EXPECT_EQ(one[0].to, mode.to);
  EXPECT_EQ(one[0].probability, mode.probability);
  EXPECT_THROW(top_transitions(v, 0), Error);
}

TEST(Statistics, ComputeStatsPerFamily) {
  const ValueStats b = compute_stats(BernoulliValue{0.5, 0.5, 0.0});
  EXPECT_TRUE(b.variance && b.entropy);
  EXPECT_FALSE(b.mode_change);
  GaussianValue g;
  g.components = {{1.0, 1.0, 2.0}};
  g.sign_pmf = {0.0, 0.0, 1.0};
  const ValueStats gs = compute_stats(g);
  EXPECT_NEAR(*gs.variance, 4.0, 1e-15);
  EXPECT_FALSE(gs.entropy);
  const ValueStats c = compute_stats(CategoricalValue{Eigen::Matrix2d::Identity() * 0.5});
  EXPECT_FALSE(c.variance);
  EXPECT_TRUE(c.mode_change && c.flip_away && c.entropy);
}

}  // namespace
}  // namespace distval
