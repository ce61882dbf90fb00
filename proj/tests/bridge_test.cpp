#include <unistd.h>

#include <filesystem>
#include <functional>
#include <fstream>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "distval/bridge.hpp"
#include "distval/builders.hpp"
#include "distval/error.hpp"
#include "distval/value.hpp"
#include "test_util.hpp"

namespace distval {
namespace {

const FamilyTag kCategorical{Family::categorical, 0};

LinearSoftmaxSpec random_model(std::mt19937_64& rng, int n, int d) {
  LinearSoftmaxSpec s;
  s.n_players = n;
  s.weights.resize(n, d);
  for (int r = 0; r < n; ++r) s.weights.row(r) = testing::random_logits(rng, d, 1.0).transpose();
  s.bias = testing::random_logits(rng, d, 0.5);
  s.input = testing::random_logits(rng, n, 1.5);
  s.baseline = testing::random_logits(rng, n, 0.3);
  return s;
}

std::string write_spec(const LinearSoftmaxSpec& s, const std::string& name) {
  const auto path = std::filesystem::temp_directory_path() /
                    ("distval_bridge_" + std::to_string(getpid()) + "_" + name + ".json");
  std::ofstream(path) << nlohmann::json{{"game", to_json(GameSpec{s})}}.dump();
  return path.string();
}

StochasticGame bridge(std::vector<std::string> args, FamilyTag family = kCategorical, int n = 3,
                      int timeout_ms = 5000) {
  args.insert(args.begin(), FAKE_BRIDGE_PATH);
  return build_bridge_game({args, n, family, timeout_ms});
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::invalid_argument;
}

TEST(Bridge, ConstantLogitsGiveNullValues) {
  const StochasticGame g = bridge({"constant"});
  EXPECT_EQ(g.kind().classes, 3);
  for (int i = 0; i < 3; ++i) {
    const auto v = std::get<CategoricalValue>(exact_value(g, make_shapley(3), i));
    EXPECT_NEAR(v.p_zero(), 1.0, 1e-15);
    EXPECT_NEAR(importance(v), 0.0, 1e-15);
  }
}

TEST(Bridge, MatchesNativeLinearSoftmax) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 3; ++trial) {
    const LinearSoftmaxSpec spec = random_model(rng, 5, 4);
    const std::string path = write_spec(spec, std::to_string(trial));
    for (const char* mode : {"linear", "reverse"}) {
      const StochasticGame remote = bridge({mode, path}, kCategorical, 5);
      const StochasticGame native = build_game(GameSpec{spec});
      for (int i = 0; i < 5; ++i) {
        const auto a = std::get<CategoricalValue>(exact_value(remote, make_shapley(5), i));
        const auto b = std::get<CategoricalValue>(exact_value(native, make_shapley(5), i));
        EXPECT_LE((a.transition - b.transition).cwiseAbs().maxCoeff(), 1e-10) << mode;
      }
    }
    std::filesystem::remove(path);
  }
}

TEST(Bridge, BernoulliParams) {
  const StochasticGame g = bridge({"bernoulli"}, {Family::bernoulli, 0}, 4);
  EXPECT_EQ(std::get<BernoulliParams>(g.payoff(Coalition::from_key(4, "0,2"))).pi, 0.5);
  const auto v = std::get<BernoulliValue>(exact_value(g, make_shapley(4), 1));
  EXPECT_NEAR(v.q_plus, 0.25, 1e-15);
}

TEST(Bridge, DeclaredClassCountIsForwarded) {
  const StochasticGame g = bridge({"constant"}, {Family::categorical, 5});
  EXPECT_EQ(std::get<CategoricalParams>(g.payoff(Coalition(3))).logits.size(), 5);
}

TEST(Bridge, ShortLogitsAreAProtocolViolation) {
  const StochasticGame g = bridge({"short"});
  EXPECT_EQ(code_of([&] { g.payoff(Coalition(3)); }), ErrorCode::protocol_violation);
}

TEST(Bridge, GarbageIsAProtocolViolation) {
  const StochasticGame g = bridge({"garbage"});
  EXPECT_EQ(code_of([&] { g.payoff(Coalition(3)); }), ErrorCode::protocol_violation);
}

TEST(Bridge, ErrorReplyBecomesOracleFailure) {
  const StochasticGame g = bridge({"error"});
  try {
    g.payoff(Coalition(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::oracle_failure);
    EXPECT_NE(std::string(e.what()).find("model exploded"), std::string::npos);
  }
}

TEST(Bridge, StartFailures) {
  EXPECT_EQ(code_of([] { bridge({"refuse"}); }), ErrorCode::bridge_start_failure);
  EXPECT_EQ(code_of([] { build_bridge_game({{"/nonexistent/model"}, 2, kCategorical, 2000}); }),
            ErrorCode::bridge_start_failure);
}

TEST(Bridge, SilentBridgeTimesOut) {
  const StochasticGame g = bridge({"silent"}, kCategorical, 3, 200);
  EXPECT_EQ(code_of([&] { g.payoff(Coalition(3)); }), ErrorCode::timeout);
}

TEST(Bridge, ExitedBridgeIsOracleFailure) {
  const StochasticGame g = bridge({"quit"});
  EXPECT_EQ(code_of([&] { g.payoff(Coalition(3)); }), ErrorCode::oracle_failure);
}

TEST(Bridge, SpecKindBuildsBridge) {
  const auto spec = parse_game_spec({{"kind", "bridge"},
                                     {"command", {FAKE_BRIDGE_PATH, "constant"}},
                                     {"n", 2},
                                     {"family", "categorical"}});
  const StochasticGame g = build_game(spec);
  EXPECT_EQ(g.n_players(), 2);
  EXPECT_EQ(g.kind().classes, 3);
}

}  // namespace
}  // namespace distval
