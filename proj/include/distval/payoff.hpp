#pragma once

#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Core>

namespace distval {

enum class Family { bernoulli, gaussian, categorical };

std::string_view to_string(Family family);
Family parse_family(std::string_view text);

/// Payoff family of a game; `classes` is d for categorical games, 0 otherwise.
struct FamilyTag {
  Family family = Family::bernoulli;
  int classes = 0;

  friend bool operator==(const FamilyTag&, const FamilyTag&) = default;
};

struct BernoulliParams {
  double pi = 0.0;
};

struct GaussianParams {
  double mu = 0.0;
  double sigma = 0.0;  // sigma == 0 is a Dirac payoff
};

struct CategoricalParams {
  Eigen::VectorXd logits;  // natural parameters, P(class j) = softmax(logits)_j
};

using PayoffParams = std::variant<BernoulliParams, GaussianParams, CategoricalParams>;

PayoffParams bernoulli(double pi);
PayoffParams gaussian(double mu, double sigma);
PayoffParams categorical(Eigen::VectorXd logits);

FamilyTag family_of(const PayoffParams& params);

/// Throws OutOfRange / NegativeSigma / NonFinite for invalid parameters, and
/// FamilyMismatch when `params` does not match `expected`.
void validate(const PayoffParams& params, const FamilyTag& expected);

/// E[v(S)] as a vector: (pi), (mu), or softmax(logits).
Eigen::VectorXd expected_outcome(const PayoffParams& params);

bool bit_identical(const PayoffParams& a, const PayoffParams& b);

}  // namespace distval
