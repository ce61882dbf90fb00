#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "distval/error.hpp"
#include "distval/logspace.hpp"

namespace distval {

// Distributions of one stochastic marginal contribution v(S ∪ i) ⊖ v(S) under
// shared reparameterization noise.

/// Law over {+1, -1, 0} of the difference of two Bernoulli payoffs driven by
/// one shared uniform: at most one of q_plus / q_minus is nonzero.
struct BernoulliMC {
  double q_plus = 0.0;
  double q_minus = 0.0;
  double q_zero = 1.0;
};

BernoulliMC bernoulli_mc(double pi_with, double pi_without);

/// N(mean, sd²) with the sign of σ_with − σ_without carried alongside.
struct GaussianMC {
  double mean = 0.0;
  double sd = 0.0;
  int sign_tracker = 0;
};

GaussianMC gaussian_mc(double mu_with, double sigma_with, double mu_without, double sigma_without);

/// joint(r, s) = P(v(S ∪ i) = r, v(S) = s) under shared Gumbel noise.
struct CategoricalMC {
  Eigen::MatrixXd joint;

  double no_change() const { return joint.trace(); }
};

CategoricalMC categorical_mc(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta);
double categorical_no_change(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta);

namespace detail {

// Both tolerances widen with the scalar's machine epsilon so that float
// instantiations are checked at float resolution.
template <typename Scalar>
constexpr Scalar clamp_tolerance() {
  return std::max<Scalar>(Scalar(1e-15), Scalar(16) * std::numeric_limits<Scalar>::epsilon());
}
template <typename Scalar>
constexpr Scalar normalization_tolerance() {
  return std::max<Scalar>(Scalar(1e-9), Scalar(1024) * std::numeric_limits<Scalar>::epsilon());
}
// Beyond this exponent range the factored c_k form can overflow; the kernel
// then sums each entry's terms in log-domain directly.
inline constexpr double kFactoredExponentLimit = 600.0;

/// Order of classes by ν = α − β, descending, stable on the original index.
template <typename Derived>
std::vector<Eigen::Index> nu_order(const Eigen::MatrixBase<Derived>& nu) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(nu.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return nu[a] > nu[b]; });
  return order;
}

template <typename DerivedA, typename DerivedB>
void check_categorical_args(const Eigen::MatrixBase<DerivedA>& alpha,
                            const Eigen::MatrixBase<DerivedB>& beta) {
  if (alpha.size() != beta.size()) {
    throw Error(ErrorCode::invalid_argument, "alpha and beta differ in length");
  }
  if (alpha.size() < 2) throw Error(ErrorCode::invalid_argument, "categorical needs d >= 2");
  if (!alpha.allFinite() || !beta.allFinite()) {
    throw Error(ErrorCode::non_finite, "categorical natural parameters must be finite");
  }
}

/// Sorted-space quantities shared by the joint and the no-change kernels.
template <typename Scalar>
struct SortedLogits {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  std::vector<Eigen::Index> order;  // sorted position -> original class
  Vector a, b, nu;                  // gauge-fixed, sorted
  Vector prefix_a;                  // ᾱ_k = logsumexp(a_0..a_k)
  Vector suffix_b;                  // β̄_k = logsumexp(b_{k+1}..b_{d-1}), -inf at k = d-1
};

template <typename DerivedA, typename DerivedB>
SortedLogits<typename DerivedA::Scalar> sort_logits(const Eigen::MatrixBase<DerivedA>& alpha,
                                                    const Eigen::MatrixBase<DerivedB>& beta) {
  using Scalar = typename DerivedA::Scalar;
  const Eigen::Index d = alpha.size();
  SortedLogits<Scalar> s;
  // Softmax gauge: shifting all of α (or β) by a constant leaves the law unchanged.
  const auto a_shifted = (alpha.array() - alpha.maxCoeff()).matrix().eval();
  const auto b_shifted = (beta.array() - beta.maxCoeff()).matrix().eval();
  s.order = nu_order((a_shifted - b_shifted).eval());
  s.a.resize(d);
  s.b.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    s.a[k] = a_shifted[s.order[static_cast<std::size_t>(k)]];
    s.b[k] = b_shifted[s.order[static_cast<std::size_t>(k)]];
  }
  s.nu = s.a - s.b;
  s.prefix_a.resize(d);
  s.suffix_b.resize(d);
  s.prefix_a[0] = s.a[0];
  for (Eigen::Index k = 1; k < d; ++k) {
    s.prefix_a[k] = logspace::log_add_exp(s.prefix_a[k - 1], s.a[k]);
  }
  s.suffix_b[d - 1] = logspace::neg_infinity<Scalar>();
  for (Eigen::Index k = d - 2; k >= 0; --k) {
    s.suffix_b[k] = logspace::log_add_exp(s.suffix_b[k + 1], s.b[k + 1]);
  }
  return s;
}

/// Diagonal P(r, r) in sorted space:
///   e^{β_r − β̄_r} σ(β̄_r − ᾱ_r + ν_r) for r < d−1, e^{α_{d−1} − ᾱ_{d−1}} at the end.
template <typename Scalar>
Scalar sorted_diagonal(const SortedLogits<Scalar>& s, Eigen::Index r) {
  const Eigen::Index last = s.a.size() - 1;
  if (r == last) return std::exp(s.a[last] - s.prefix_a[last]);
  const Scalar gap = s.suffix_b[r] - s.prefix_a[r];
  return std::exp(s.b[r] - s.suffix_b[r] + logspace::log_logistic(gap + s.nu[r]));
}

/// σ(β̄_k − ᾱ_k + ν_k) − σ(β̄_k − ᾱ_k + ν_{k+1}), k = 0..d−2.
template <typename Scalar>
Scalar sigma_gap(const SortedLogits<Scalar>& s, Eigen::Index k) {
  const Scalar gap = s.suffix_b[k] - s.prefix_a[k];
#if defined(DISTVAL_MUTATE_CK_SIGN)
  return logspace::logistic(gap + s.nu[k + 1]) - logspace::logistic(gap + s.nu[k]);
#else
  return logspace::logistic_difference(gap + s.nu[k], gap + s.nu[k + 1]);
#endif
}

}  // namespace detail

/// Joint law of (argmax(α + ε), argmax(β + ε)) for shared ε ~ Gumbel(0, 1)^d,
/// returned in the original class indexing. O(d²).
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> categorical_joint(
    const Eigen::MatrixBase<DerivedA>& alpha, const Eigen::MatrixBase<DerivedB>& beta) {
  using Scalar = typename DerivedA::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  detail::check_categorical_args(alpha, beta);
  const Eigen::Index d = alpha.size();
  const auto s = detail::sort_logits(alpha, beta);

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> gaps(d - 1);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> log_scale(d - 1);  // −β̄_k − ᾱ_k
  for (Eigen::Index k = 0; k + 1 < d; ++k) {
    gaps[k] = detail::sigma_gap(s, k);
    log_scale[k] = -s.suffix_b[k] - s.prefix_a[k];
  }
  const bool factored = log_scale.cwiseAbs().maxCoeff() < detail::kFactoredExponentLimit &&
                        s.a.minCoeff() > -detail::kFactoredExponentLimit &&
                        s.b.minCoeff() > -detail::kFactoredExponentLimit;

  Matrix sorted = Matrix::Zero(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    sorted(r, r) = detail::sorted_diagonal(s, r);
    if (factored) {
      // P(r, s) = e^{α_r + β_s} Σ_{k=r}^{s−1} c_k, partial sums of nonnegative c_k.
      logspace::CompensatedSum<Scalar> partial;
      for (Eigen::Index col = r + 1; col < d; ++col) {
        partial.add(std::exp(log_scale[col - 1]) * gaps[col - 1]);
        sorted(r, col) = std::exp(s.a[r] + s.b[col]) * partial.value();
      }
    } else {
      for (Eigen::Index col = r + 1; col < d; ++col) {
        logspace::CompensatedSum<Scalar> direct;
        for (Eigen::Index k = r; k < col; ++k) {
          direct.add(std::exp(s.a[r] + s.b[col] + log_scale[k]) * gaps[k]);
        }
        sorted(r, col) = direct.value();
      }
    }
  }

  if (!sorted.allFinite()) {
    throw Error(ErrorCode::normalization_failure, "categorical joint has non-finite entries");
  }
  if (sorted.minCoeff() < -detail::clamp_tolerance<Scalar>()) {
    throw Error(ErrorCode::normalization_failure,
                "categorical joint has a negative entry " + std::to_string(sorted.minCoeff()));
  }
  sorted = sorted.cwiseMax(Scalar(0));
  const Scalar total = sorted.sum();
  if (std::abs(total - Scalar(1)) > detail::normalization_tolerance<Scalar>()) {
    throw Error(ErrorCode::normalization_failure,
                "categorical joint sums to " + std::to_string(static_cast<double>(total)));
  }
  sorted /= total;

  Matrix joint(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      joint(s.order[static_cast<std::size_t>(r)], s.order[static_cast<std::size_t>(c)]) =
          sorted(r, c);
    }
  }
  return joint;
}

/// Σ_r P(r, r) without forming the off-diagonal entries. O(d log d).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar categorical_no_change_probability(
    const Eigen::MatrixBase<DerivedA>& alpha, const Eigen::MatrixBase<DerivedB>& beta) {
  using Scalar = typename DerivedA::Scalar;
  detail::check_categorical_args(alpha, beta);
  const auto s = detail::sort_logits(alpha, beta);
  logspace::CompensatedSum<Scalar> sum;
  for (Eigen::Index r = 0; r < alpha.size(); ++r) sum.add(detail::sorted_diagonal(s, r));
  const Scalar value = sum.value();
  if (!std::isfinite(value) || value > Scalar(1) + detail::normalization_tolerance<Scalar>()) {
    throw Error(ErrorCode::normalization_failure, "no-change probability out of range");
  }
  return std::min(value, Scalar(1));
}

}  // namespace distval
