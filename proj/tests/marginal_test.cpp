#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "distval/error.hpp"
#include "distval/logspace.hpp"
#include "distval/marginal.hpp"
#include "distval/verify.hpp"
#include "test_util.hpp"

namespace distval {
namespace {

using testing::logistic;
using testing::random_logits;

// ---- Bernoulli ----------------------------------------------------------------

TEST(BernoulliMarginal, PointCases) {
  const auto up = bernoulli_mc(1.0, 0.0);
  EXPECT_EQ(up.q_plus, 1.0);
  EXPECT_EQ(up.q_minus, 0.0);
  EXPECT_EQ(up.q_zero, 0.0);

  const auto same = bernoulli_mc(0.4, 0.4);
  EXPECT_EQ(same.q_zero, 1.0);
  EXPECT_EQ(same.q_plus + same.q_minus, 0.0);
}

// Both payoffs read one shared uniform: v = 1{u <= π}.
TEST(BernoulliMarginal, MatchesCoupledUniformSimulation) {
  const double with = 0.7;
  const double without = 0.2;
  const auto q = bernoulli_mc(with, without);
  EXPECT_NEAR(q.q_plus, 0.5, 1e-15);
  EXPECT_EQ(q.q_minus, 0.0);
  EXPECT_NEAR(q.q_zero, 0.5, 1e-15);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int draws = 1000000;
  int plus = 0;
  int minus = 0;
  for (int k = 0; k < draws; ++k) {
    const double u = unit(rng);
    const int diff = (u <= with ? 1 : 0) - (u <= without ? 1 : 0);
    plus += diff == 1;
    minus += diff == -1;
  }
  EXPECT_NEAR(plus / double(draws), q.q_plus, 0.003);
  EXPECT_NEAR(minus / double(draws), q.q_minus, 0.003);
  EXPECT_NEAR(1.0 - (plus + minus) / double(draws), q.q_zero, 0.003);
}

TEST(BernoulliMarginal, ExpectationIsParameterDifference) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double a = unit(rng);
    const double b = unit(rng);
    const auto q = bernoulli_mc(a, b);
    EXPECT_EQ(q.q_plus - q.q_minus, a - b);
    EXPECT_EQ(std::min(q.q_plus, q.q_minus), 0.0);
    EXPECT_NEAR(q.q_plus + q.q_minus + q.q_zero, 1.0, 1e-12);
  }
}

TEST(BernoulliMarginal, RejectsOutOfRange) {
  EXPECT_THROW(bernoulli_mc(1.1, 0.0), Error);
  EXPECT_THROW(bernoulli_mc(0.5, -0.1), Error);
}

// ---- Gaussian -----------------------------------------------------------------

TEST(GaussianMarginal, DiracWhenSigmasAgree) {
  const auto q = gaussian_mc(1.0, 1.0, 0.0, 1.0);
  EXPECT_EQ(q.mean, 1.0);
  EXPECT_EQ(q.sd, 0.0);
  EXPECT_EQ(q.sign_tracker, 0);
  const auto same = gaussian_mc(0.3, 2.0, 0.3, 2.0);
  EXPECT_EQ(same.mean, 0.0);
  EXPECT_EQ(same.sd, 0.0);
}

// Both payoffs share ε: (μ₁ + σ₁ε) − (μ₀ + σ₀ε).
TEST(GaussianMarginal, MatchesSharedNoiseSimulation) {
  const auto q = gaussian_mc(1.0, 2.0, 0.0, 1.0);
  EXPECT_EQ(q.mean, 1.0);
  EXPECT_EQ(q.sd, 1.0);
  EXPECT_EQ(q.sign_tracker, 1);

  std::mt19937_64 rng(23);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int draws = 1000000;
  double sum = 0.0;
  double sq = 0.0;
  for (int k = 0; k < draws; ++k) {
    const double e = normal(rng);
    const double diff = (1.0 + 2.0 * e) - (0.0 + 1.0 * e);
    sum += diff;
    sq += diff * diff;
  }
  const double mean = sum / draws;
  EXPECT_NEAR(mean, q.mean, 0.005);
  EXPECT_NEAR(std::sqrt(sq / draws - mean * mean), q.sd, 0.005);
}

TEST(GaussianMarginal, SwapNegatesMeanAndSign) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    const double m1 = normal(rng), m0 = normal(rng);
    const double s1 = std::abs(normal(rng)), s0 = std::abs(normal(rng));
    const auto a = gaussian_mc(m1, s1, m0, s0);
    const auto b = gaussian_mc(m0, s0, m1, s1);
    EXPECT_EQ(a.mean, -b.mean);
    EXPECT_EQ(a.sd, b.sd);
    EXPECT_EQ(a.sign_tracker, -b.sign_tracker);
    EXPECT_EQ(a.sign_tracker == 0, a.sd == 0.0);
  }
}

TEST(GaussianMarginal, RejectsNegativeSigma) {
  try {
    gaussian_mc(0.0, -1.0, 0.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::negative_sigma);
  }
}

// ---- categorical ----------------------------------------------------------------

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

TEST(CategoricalMarginal, IdenticalArgumentsStayOnDiagonal) {
  const auto q = categorical_mc(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3));
  EXPECT_TRUE(q.joint.isApprox(Eigen::MatrixXd::Identity(3, 3) / 3.0, 1e-15));
  EXPECT_EQ(q.joint(0, 1), 0.0);
  EXPECT_EQ(q.joint(2, 0), 0.0);
}

TEST(CategoricalMarginal, TwoClassClosedForm) {
  const auto q = categorical_mc(vec({1, 0}), vec({-1, 0}));
  EXPECT_NEAR(q.joint(0, 1), logistic(1.0) - logistic(-1.0), 1e-12);
  EXPECT_NEAR(q.joint(0, 1), 0.46212, 1e-5);
  EXPECT_EQ(q.joint(1, 0), 0.0);
  EXPECT_NEAR(categorical_no_change(vec({1, 0}), vec({-1, 0})), 1.0 - (logistic(1) - logistic(-1)),
              1e-12);
}

// With L = ε₀ − ε₁ ~ Logistic(0, 1): with = 0 iff L > a₁ − a₀, without = 0 iff
// L > b₁ − b₀, so one off-diagonal is σ(a₀ − a₁) − σ(b₀ − b₁) when positive.
TEST(CategoricalMarginal, TwoClassLogisticOracle) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 500; ++k) {
    const Eigen::VectorXd a = random_logits(rng, 2, 3.0);
    const Eigen::VectorXd b = random_logits(rng, 2, 3.0);
    const double gap = logistic(a[0] - a[1]) - logistic(b[0] - b[1]);
    const auto q = categorical_mc(a, b);
    EXPECT_NEAR(q.joint(0, 1), std::max(gap, 0.0), 1e-12);
    EXPECT_NEAR(q.joint(1, 0), std::max(-gap, 0.0), 1e-12);
  }
}

TEST(CategoricalMarginal, ThreeClassAgainstGumbelOracle) {
  const Eigen::VectorXd a = vec({2, 0, 0});
  const Eigen::VectorXd b = vec({0, 0, 2});
  const Eigen::MatrixXd empirical = oracle_categorical_joint(a, b, 1000000, 99);
  EXPECT_LE(total_variation(categorical_mc(a, b).joint, empirical), 0.005);
}

TEST(CategoricalMarginal, RandomPairsAgainstGumbelOracle) {
  std::mt19937_64 rng(77);
  for (int d : {2, 3, 5, 10}) {
    for (int k = 0; k < 3; ++k) {
      const Eigen::VectorXd a = random_logits(rng, d, 1.5);
      const Eigen::VectorXd b = random_logits(rng, d, 1.5);
      const Eigen::MatrixXd empirical = oracle_categorical_joint(a, b, 1000000, rng());
      EXPECT_LE(total_variation(categorical_mc(a, b).joint, empirical), 0.005) << "d=" << d;
    }
  }
}

TEST(CategoricalMarginal, MarginalsMatchSoftmax) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 1000; ++k) {
    const int d = 2 + k % 11;
    const Eigen::VectorXd a = random_logits(rng, d, 3.0);
    const Eigen::VectorXd b = random_logits(rng, d, 3.0);
    const Eigen::MatrixXd j = categorical_mc(a, b).joint;
    EXPECT_LE((j.rowwise().sum() - logspace::softmax(a)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((j.colwise().sum().transpose() - logspace::softmax(b)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_GE(j.minCoeff(), 0.0);
    EXPECT_NEAR(j.sum(), 1.0, 1e-9);
  }
}

TEST(CategoricalMarginal, LowerTriangleInSortedOrderIsZero) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 300; ++k) {
    const int d = 2 + k % 9;
    const Eigen::VectorXd a = random_logits(rng, d);
    const Eigen::VectorXd b = random_logits(rng, d);
    const Eigen::MatrixXd j = categorical_mc(a, b).joint;
    for (int r = 0; r < d; ++r) {
      for (int s = 0; s < d; ++s) {
        if (a[r] - b[r] < a[s] - b[s]) {
          EXPECT_EQ(j(r, s), 0.0);
        }
      }
    }
  }
}

TEST(CategoricalMarginal, ShiftInvariance) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 200; ++k) {
    const int d = 2 + k % 8;
    const Eigen::VectorXd a = random_logits(rng, d);
    const Eigen::VectorXd b = random_logits(rng, d);
    const Eigen::MatrixXd base = categorical_mc(a, b).joint;
    const double shift = std::normal_distribution<double>(0.0, 10.0)(rng);
    const Eigen::VectorXd a_shift = (a.array() + shift).matrix();
    const Eigen::VectorXd b_shift = (b.array() - shift).matrix();
    EXPECT_LE((categorical_mc(a_shift, b).joint - base).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((categorical_mc(a, b_shift).joint - base).cwiseAbs().maxCoeff(), 1e-12);
  }
}

// Reversing the class order flips which of two tied classes the stable sort
// puts first; the result must not depend on it.
TEST(CategoricalMarginal, TieInvariance) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 200; ++k) {
    const int d = 3 + k % 6;
    Eigen::VectorXd a = random_logits(rng, d);
    Eigen::VectorXd b = random_logits(rng, d);
    b[1] = a[1] - (a[0] - b[0]);  // ν₀ = ν₁
    if (d > 4) b[3] = a[3] - (a[2] - b[2]);
    const Eigen::MatrixXd forward = categorical_mc(a, b).joint;
    const Eigen::VectorXd ra = a.reverse();
    const Eigen::VectorXd rb = b.reverse();
    const Eigen::MatrixXd backward = categorical_mc(ra, rb).joint.reverse();
    EXPECT_LE((forward - backward).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(CategoricalMarginal, NoChangeMatchesDiagonal) {
  std::mt19937_64 rng(14);
  for (int k = 0; k < 200; ++k) {
    const Eigen::VectorXd a = random_logits(rng, 6);
    const Eigen::VectorXd b = random_logits(rng, 6);
    EXPECT_NEAR(categorical_no_change(a, b), categorical_mc(a, b).joint.trace(), 1e-12);
  }
  EXPECT_NEAR(categorical_no_change(vec({0.3, -2, 5}), vec({0.3, -2, 5})), 1.0, 1e-15);
}

TEST(CategoricalMarginal, ExtremeLogitsStayNormalized) {
  std::mt19937_64 rng(15);
  for (double scale : {50.0, 300.0, 2000.0}) {
    for (int k = 0; k < 50; ++k) {
      const int d = 2 + k % 10;
      const Eigen::VectorXd a = random_logits(rng, d, scale);
      const Eigen::VectorXd b = random_logits(rng, d, scale);
      const Eigen::MatrixXd j = categorical_mc(a, b).joint;
      ASSERT_TRUE(j.allFinite());
      EXPECT_NEAR(j.sum(), 1.0, 1e-9);
      EXPECT_LE((j.rowwise().sum() - logspace::softmax(a)).cwiseAbs().maxCoeff(), 1e-9);
      EXPECT_LE((j.colwise().sum().transpose() - logspace::softmax(b)).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(CategoricalMarginal, SinglePrecisionInstantiation) {
  const Eigen::VectorXf a = Eigen::Vector3f(1.0f, 0.0f, -1.0f);
  const Eigen::VectorXf b = Eigen::Vector3f(-1.0f, 0.5f, 0.0f);
  const Eigen::MatrixXf jf = categorical_joint(a, b);
  const Eigen::MatrixXd jd = categorical_joint(a.cast<double>(), b.cast<double>());
  EXPECT_LE((jf.cast<double>() - jd).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(CategoricalMarginal, Errors) {
  const double inf = std::numeric_limits<double>::infinity();
  try {
    categorical_mc(vec({0, inf}), vec({0, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_finite);
  }
  EXPECT_THROW(categorical_mc(vec({0}), vec({0})), Error);
  EXPECT_THROW(categorical_mc(vec({0, 1}), vec({0, 1, 2})), Error);
}

}  // namespace
}  // namespace distval
