#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Core>

// Scalar helpers for log-domain probability arithmetic.
namespace distval::logspace {

template <typename Scalar>
Scalar neg_infinity() {
  return -std::numeric_limits<Scalar>::infinity();
}

/// log(e^a + e^b), exact for infinite arguments.
template <typename Scalar>
Scalar log_add_exp(Scalar a, Scalar b) {
  if (a == neg_infinity<Scalar>()) return b;
  if (b == neg_infinity<Scalar>()) return a;
  const Scalar hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  if (x.size() == 0) return neg_infinity<Scalar>();
  const Scalar hi = x.maxCoeff();
  if (!std::isfinite(hi)) return hi;
  return hi + std::log((x.array() - hi).exp().sum());
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax(
    const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = (x.array() - x.maxCoeff()).exp().matrix();
  return out / out.sum();
}

template <typename Scalar>
Scalar logistic(Scalar x) {
  if (x >= 0) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

/// log(sigma(x)) = -softplus(-x).
template <typename Scalar>
Scalar log_logistic(Scalar x) {
  if (x >= 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

/// sigma(upper) - sigma(lower) for upper >= lower, evaluated as
/// sigma(upper) * sigma(-lower) * (1 - e^(lower - upper)); every factor is
/// nonnegative so the result never cancels. Equal arguments give exactly 0.
template <typename Scalar>
Scalar logistic_difference(Scalar upper, Scalar lower) {
  if (upper == lower) return Scalar(0);
  return logistic(upper) * logistic(-lower) * -std::expm1(lower - upper);
}

/// Kahan-Babuska (Neumaier) running sum.
template <typename Scalar>
class CompensatedSum {
 public:
  void add(Scalar x) {
    const Scalar t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  Scalar value() const { return sum_ + carry_; }

 private:
  Scalar sum_ = 0;
  Scalar carry_ = 0;
};

}  // namespace distval::logspace
