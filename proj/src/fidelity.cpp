#include <algorithm>
#include <cmath>
#include <numeric>

#include "distval/error.hpp"
#include "distval/verify.hpp"

namespace distval {

std::string_view to_string(FidelityScheme scheme) {
  switch (scheme) {
    case FidelityScheme::csv_transition: return "A";
    case FidelityScheme::standard_value: return "B";
    case FidelityScheme::negated_other: return "C";
  }
  return "A";
}

FidelityScheme parse_scheme(std::string_view text) {
  if (text == "A" || text == "a" || text == "csv_transition") return FidelityScheme::csv_transition;
  if (text == "B" || text == "b" || text == "standard_value") return FidelityScheme::standard_value;
  if (text == "C" || text == "c" || text == "negated_other") return FidelityScheme::negated_other;
  throw Error(ErrorCode::invalid_argument, "unknown fidelity scheme '" + std::string(text) + "'");
}

namespace {

double scheme_score(const CategoricalValue& v, int c1, int c2, FidelityScheme scheme) {
  const Eigen::MatrixXd& q = v.transition;
  switch (scheme) {
    case FidelityScheme::csv_transition: return q(c1, c2);
    case FidelityScheme::standard_value: return q.row(c1).sum() - q.col(c1).sum();
    case FidelityScheme::negated_other: return -(q.row(c2).sum() - q.col(c2).sum());
  }
  return 0.0;
}

}  // namespace

FidelityTrace fidelity_trace(const StochasticGame& g, const std::vector<CategoricalValue>& values,
                             int c1, int c2, FidelityScheme scheme, int steps) {
  if (g.kind().family != Family::categorical) {
    throw Error(ErrorCode::unsupported_family, "fidelity traces need a categorical game");
  }
  const int d = g.kind().classes;
  if (c1 == c2 || c1 < 0 || c2 < 0 || c1 >= d || c2 >= d) {
    throw Error(ErrorCode::invalid_classes, "classes must be distinct and in [0, " +
                                                std::to_string(d) + ")");
  }
  const int n = g.n_players();
  if (static_cast<int>(values.size()) != n) {
    throw Error(ErrorCode::invalid_argument, "need one value per player");
  }
  if (steps < 0 || steps > n) {
    throw Error(ErrorCode::invalid_argument, "steps must lie in [0, n]");
  }
  for (const auto& v : values) {
    if (v.transition.rows() != d || v.transition.cols() != d) {
      throw Error(ErrorCode::invalid_argument, "value dimension does not match the game");
    }
  }

  FidelityTrace trace;
  trace.scheme = scheme;
  trace.c1 = c1;
  trace.c2 = c2;
  std::vector<double> score(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    score[static_cast<std::size_t>(i)] =
        scheme_score(values[static_cast<std::size_t>(i)], c1, c2, scheme);
  }
  trace.order.resize(static_cast<std::size_t>(n));
  std::iota(trace.order.begin(), trace.order.end(), 0);
  std::stable_sort(trace.order.begin(), trace.order.end(), [&](int a, int b) {
    return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)];
  });

  Coalition kept = Coalition::grand(n);
  const auto record = [&](int step, int removed) {
    const Eigen::VectorXd probs = g.expected_payoff(kept);
    trace.steps.push_back({step, removed, probs[c1], probs[c2]});
  };
  record(0, -1);
  for (int step = 1; step <= steps; ++step) {
    const int player = trace.order[static_cast<std::size_t>(step - 1)];
    kept = kept.without(player);
    record(step, player);
  }
  return trace;
}

LinearSoftmaxSpec synthetic_fidelity_spec() {
  constexpr int kFeatures = 10;
  constexpr int kClasses = 3;
  LinearSoftmaxSpec spec;
  spec.n_players = kFeatures;
  spec.weights.resize(kFeatures, kClasses);
  // Feature 0 pushes class 0 up and class 1 down; the rest are weak and
  // spread over all classes.
  spec.weights.row(0) << 3.0, -1.0, 0.0;
  for (int j = 1; j < kFeatures; ++j) {
    for (int c = 0; c < kClasses; ++c) {
      spec.weights(j, c) = 0.3 * std::sin(1.7 * j + 2.3 * c);
    }
  }
  spec.bias = Eigen::Vector3d(0.0, 0.5, 0.2);
  spec.input = Eigen::VectorXd::Ones(kFeatures);
  spec.baseline = Eigen::VectorXd::Zero(kFeatures);
  return spec;
}

}  // namespace distval
