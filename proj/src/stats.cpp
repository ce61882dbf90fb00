#include <algorithm>
#include <cmath>

#include "distval/error.hpp"
#include "distval/value.hpp"

namespace distval {

namespace {

double plogp(double p) { return p > 0.0 ? -p * std::log(p) : 0.0; }

void require_classes(const CategoricalValue& value) {
  if (value.transition.rows() < 2 || value.transition.rows() != value.transition.cols()) {
    throw Error(ErrorCode::invalid_argument, "categorical value needs a square d x d, d >= 2");
  }
}

}  // namespace

double importance(const DistributionalValue& value) {
  if (const auto* b = std::get_if<BernoulliValue>(&value)) return 1.0 - b->q_zero;
  if (const auto* g = std::get_if<GaussianValue>(&value)) {
    double dirac_at_zero = 0.0;
    for (const auto& c : g->components) {
      if (c.mean == 0.0 && c.sd == 0.0) dirac_at_zero += c.weight;
    }
    return 1.0 - dirac_at_zero;
  }
  return 1.0 - std::get<CategoricalValue>(value).p_zero();
}

Eigen::VectorXd expectation(const DistributionalValue& value) {
  if (const auto* b = std::get_if<BernoulliValue>(&value)) {
    return Eigen::VectorXd::Constant(1, b->q_plus - b->q_minus);
  }
  if (const auto* g = std::get_if<GaussianValue>(&value)) {
    double mean = 0.0;
    for (const auto& c : g->components) mean += c.weight * c.mean;
    return Eigen::VectorXd::Constant(1, mean);
  }
  const auto& t = std::get<CategoricalValue>(value).transition;
  return t.rowwise().sum() - t.colwise().sum().transpose();
}

double bernoulli_variance(const BernoulliValue& value) {
  const double mean = value.q_plus - value.q_minus;
  return std::max(0.0, (value.q_plus + value.q_minus) - mean * mean);
}

double variance(const DistributionalValue& value) {
  if (const auto* b = std::get_if<BernoulliValue>(&value)) return bernoulli_variance(*b);
  if (const auto* g = std::get_if<GaussianValue>(&value)) {
    double mean = 0.0;
    double second = 0.0;
    for (const auto& c : g->components) {
      mean += c.weight * c.mean;
      second += c.weight * (c.mean * c.mean + c.sd * c.sd);
    }
    return std::max(0.0, second - mean * mean);
  }
  throw Error(ErrorCode::unsupported_family, "variance is defined for scalar payoffs only");
}

double entropy(const DistributionalValue& value) {
  if (const auto* b = std::get_if<BernoulliValue>(&value)) {
    return plogp(b->q_plus) + plogp(b->q_minus) + plogp(b->q_zero);
  }
  if (std::holds_alternative<GaussianValue>(value)) {
    throw Error(ErrorCode::unsupported_family, "entropy of a Gaussian mixture is not defined here");
  }
  const auto& c = std::get<CategoricalValue>(value);
  const auto& t = c.transition;
  double h = plogp(c.p_zero());
  for (Eigen::Index s = 0; s < t.cols(); ++s) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      if (r != s) h += plogp(t(r, s));
    }
  }
  return h;
}

Transition mode_change(const CategoricalValue& value) {
  require_classes(value);
  const auto& t = value.transition;
  Transition best{0, 1, -1.0};
  for (Eigen::Index s = 0; s < t.cols(); ++s) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      if (r != s && t(r, s) > best.probability) {
        best = {static_cast<int>(s), static_cast<int>(r), t(r, s)};
      }
    }
  }
  return best;
}

FlipAway flip_away(const CategoricalValue& value) {
  require_classes(value);
  const auto& t = value.transition;
  FlipAway best{0, -1.0};
  for (Eigen::Index s = 0; s < t.cols(); ++s) {
    const double away = t.col(s).sum() - t(s, s);
    if (away > best.probability) best = {static_cast<int>(s), away};
  }
  best.probability = std::max(0.0, best.probability);
  return best;
}

std::vector<Transition> top_transitions(const CategoricalValue& value, std::size_t k) {
  require_classes(value);
  if (k < 1) throw Error(ErrorCode::invalid_argument, "top_transitions needs k >= 1");
  const auto& t = value.transition;
  std::vector<Transition> all;
  for (Eigen::Index s = 0; s < t.cols(); ++s) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      if (r != s && t(r, s) > 0.0) all.push_back({static_cast<int>(s), static_cast<int>(r), t(r, s)});
    }
  }
  // `all` is already in (from, to) order; stable sort keeps it as the tie-break.
  std::stable_sort(all.begin(), all.end(),
                   [](const Transition& a, const Transition& b) { return a.probability > b.probability; });
  if (all.size() > k) all.resize(k);
  return all;
}

double abs_importance(const DistributionalValue& value) {
  return expectation(value).cwiseAbs().sum();
}

ValueStats compute_stats(const DistributionalValue& value) {
  ValueStats stats;
  stats.importance = importance(value);
  stats.expectation = expectation(value);
  if (const auto* c = std::get_if<CategoricalValue>(&value)) {
    stats.entropy = entropy(value);
    stats.mode_change = mode_change(*c);
    stats.flip_away = flip_away(*c);
  } else {
    stats.variance = variance(value);
    if (std::holds_alternative<BernoulliValue>(value)) stats.entropy = entropy(value);
  }
  return stats;
}

}  // namespace distval
