#include "distval/marginal.hpp"

#include <string>

namespace distval {

BernoulliMC bernoulli_mc(double pi_with, double pi_without) {
  if (!(pi_with >= 0.0 && pi_with <= 1.0) || !(pi_without >= 0.0 && pi_without <= 1.0)) {
    throw Error(ErrorCode::out_of_range, "Bernoulli parameters must lie in [0, 1]");
  }
  const double lo = std::min(pi_with, pi_without);
  const double hi = std::max(pi_with, pi_without);
  return {pi_with - lo, pi_without - lo, 1.0 - hi + lo};
}

GaussianMC gaussian_mc(double mu_with, double sigma_with, double mu_without,
                       double sigma_without) {
  if (sigma_with < 0.0 || sigma_without < 0.0) {
    throw Error(ErrorCode::negative_sigma, "Gaussian sigma must be nonnegative");
  }
  const double spread = sigma_with - sigma_without;
  return {mu_with - mu_without, std::abs(spread), (spread > 0.0) - (spread < 0.0)};
}

CategoricalMC categorical_mc(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta) {
  return {categorical_joint(alpha, beta)};
}

double categorical_no_change(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta) {
  return categorical_no_change_probability(alpha, beta);
}

}  // namespace distval
