#include "distval/payoff.hpp"

#include <cmath>
#include <cstring>

#include "distval/error.hpp"
#include "distval/logspace.hpp"

namespace distval {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::bernoulli: return "bernoulli";
    case Family::gaussian: return "gaussian";
    case Family::categorical: return "categorical";
  }
  return "unknown";
}

Family parse_family(std::string_view text) {
  if (text == "bernoulli") return Family::bernoulli;
  if (text == "gaussian") return Family::gaussian;
  if (text == "categorical") return Family::categorical;
  throw Error(ErrorCode::spec_validation, "unknown payoff family '" + std::string(text) + "'");
}

PayoffParams bernoulli(double pi) { return BernoulliParams{pi}; }
PayoffParams gaussian(double mu, double sigma) { return GaussianParams{mu, sigma}; }
PayoffParams categorical(Eigen::VectorXd logits) { return CategoricalParams{std::move(logits)}; }

FamilyTag family_of(const PayoffParams& params) {
  if (std::holds_alternative<BernoulliParams>(params)) return {Family::bernoulli, 0};
  if (std::holds_alternative<GaussianParams>(params)) return {Family::gaussian, 0};
  return {Family::categorical, static_cast<int>(std::get<CategoricalParams>(params).logits.size())};
}

void validate(const PayoffParams& params, const FamilyTag& expected) {
  const FamilyTag actual = family_of(params);
  if (actual != expected) {
    throw Error(ErrorCode::family_mismatch,
                "payoff is " + std::string(to_string(actual.family)) + " (d=" +
                    std::to_string(actual.classes) + "), game expects " +
                    std::string(to_string(expected.family)) + " (d=" +
                    std::to_string(expected.classes) + ")");
  }
  if (const auto* b = std::get_if<BernoulliParams>(&params)) {
    if (!(b->pi >= 0.0 && b->pi <= 1.0)) {
      throw Error(ErrorCode::out_of_range, "Bernoulli pi=" + std::to_string(b->pi));
    }
  } else if (const auto* g = std::get_if<GaussianParams>(&params)) {
    if (!std::isfinite(g->mu) || !std::isfinite(g->sigma)) {
      throw Error(ErrorCode::non_finite, "Gaussian parameters must be finite");
    }
    if (g->sigma < 0.0) {
      throw Error(ErrorCode::negative_sigma, "sigma=" + std::to_string(g->sigma));
    }
  } else {
    const auto& c = std::get<CategoricalParams>(params);
    if (c.logits.size() < 2) throw Error(ErrorCode::spec_validation, "categorical needs d >= 2");
    if (!c.logits.allFinite()) throw Error(ErrorCode::non_finite, "categorical logits not finite");
  }
}

Eigen::VectorXd expected_outcome(const PayoffParams& params) {
  if (const auto* b = std::get_if<BernoulliParams>(&params)) {
    return Eigen::VectorXd::Constant(1, b->pi);
  }
  if (const auto* g = std::get_if<GaussianParams>(&params)) {
    return Eigen::VectorXd::Constant(1, g->mu);
  }
  return logspace::softmax(std::get<CategoricalParams>(params).logits);
}

bool bit_identical(const PayoffParams& a, const PayoffParams& b) {
  if (a.index() != b.index()) return false;
  auto same = [](double x, double y) { return std::memcmp(&x, &y, sizeof(double)) == 0; };
  if (const auto* x = std::get_if<BernoulliParams>(&a)) {
    return same(x->pi, std::get<BernoulliParams>(b).pi);
  }
  if (const auto* x = std::get_if<GaussianParams>(&a)) {
    const auto& y = std::get<GaussianParams>(b);
    return same(x->mu, y.mu) && same(x->sigma, y.sigma);
  }
  const auto& x = std::get<CategoricalParams>(a).logits;
  const auto& y = std::get<CategoricalParams>(b).logits;
  if (x.size() != y.size()) return false;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (!same(x[k], y[k])) return false;
  }
  return true;
}

}  // namespace distval
