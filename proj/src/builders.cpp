#include "distval/builders.hpp"

#include <cmath>
#include <random>
#include <set>

#include "distval/bridge.hpp"
#include "distval/error.hpp"

namespace distval {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& message) {
  throw Error(ErrorCode::spec_validation, message);
}

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) fail(std::string("missing field '") + name + "'");
  return j.at(name);
}

Eigen::VectorXd vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) fail(std::string(what) + " must be an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) fail(std::string(what) + " must contain numbers only");
    out[static_cast<Eigen::Index>(k)] = j[k].get<double>();
  }
  return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

int player_count(const json& j) {
  const json& n = field(j, "n");
  if (!n.is_number_integer() || n.get<int>() < 1) fail("'n' must be a positive integer");
  return n.get<int>();
}

FamilyTag family_tag(const json& j) {
  FamilyTag tag{parse_family(field(j, "family").get<std::string>()), 0};
  if (j.contains("d") && !j.at("d").is_null()) tag.classes = j.at("d").get<int>();
  return tag;
}

GameSpec parse_spec_impl(const json& g) {
  const std::string kind = field(g, "kind").get<std::string>();
  GameSpec spec;
  if (kind == "xor") {
    spec.payload = XorSpec{};
  } else if (kind == "table") {
    TableGameSpec t;
    t.n_players = player_count(g);
    t.family = family_tag(g);
    const json& payoffs = field(g, "payoffs");
    if (!payoffs.is_object()) fail("'payoffs' must be an object keyed by coalition");
    if (t.family.family == Family::categorical && t.family.classes == 0 && !payoffs.empty()) {
      const json& first = payoffs.begin().value();
      t.family.classes = static_cast<int>(field(first, "logits").size());
    }
    for (const auto& [key, value] : payoffs.items()) {
      try {
        t.payoffs.emplace(key, params_from_json(value, t.family));
      } catch (const Error& e) {
        fail("payoff for '" + key + "': " + e.what());
      }
    }
    spec.payload = std::move(t);
  } else if (kind == "linear_softmax") {
    LinearSoftmaxSpec l;
    const json& w = field(g, "weights");
    if (!w.is_array() || w.empty() || !w[0].is_array()) fail("'weights' must be a features x d matrix");
    const auto rows = static_cast<Eigen::Index>(w.size());
    const auto cols = static_cast<Eigen::Index>(w[0].size());
    l.weights.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Eigen::VectorXd row = vector_from_json(w[static_cast<std::size_t>(r)], "weights row");
      if (row.size() != cols) fail("'weights' rows differ in length");
      l.weights.row(r) = row.transpose();
    }
    l.bias = vector_from_json(field(g, "bias"), "bias");
    l.input = vector_from_json(g.contains("input") ? g.at("input") : field(g, "x"), "input");
    l.baseline = g.contains("baseline") ? vector_from_json(g.at("baseline"), "baseline")
                                        : Eigen::VectorXd::Zero(l.input.size()).eval();
    if (g.contains("groups")) {
      for (const json& group : g.at("groups")) l.groups.push_back(group.get<std::vector<int>>());
    }
    l.n_players = g.contains("n") ? player_count(g)
                                  : static_cast<int>(l.groups.empty() ? rows : l.groups.size());
    spec.payload = std::move(l);
  } else if (kind == "mixture") {
    MixtureSpec m;
    m.weight = field(g, "weight").get<double>();
    m.first = std::make_shared<const GameSpec>(parse_spec_impl(field(g, "first")));
    m.second = std::make_shared<const GameSpec>(parse_spec_impl(field(g, "second")));
    spec.payload = std::move(m);
  } else if (kind == "bridge") {
    BridgeSpec b;
    const json& cmd = field(g, "command");
    if (cmd.is_string()) {
      b.command = {"/bin/sh", "-c", cmd.get<std::string>()};
    } else {
      b.command = cmd.get<std::vector<std::string>>();
    }
    b.n_players = player_count(g);
    b.family = family_tag(g);
    if (g.contains("timeout_ms")) b.timeout_ms = g.at("timeout_ms").get<int>();
    spec.payload = std::move(b);
  } else {
    fail("unknown game kind '" + kind + "'");
  }
  validate(spec);
  return spec;
}

void check_linear_softmax(const LinearSoftmaxSpec& l) {
  const Eigen::Index features = l.weights.rows();
  const Eigen::Index classes = l.weights.cols();
  if (classes < 2) fail("linear_softmax needs at least two classes");
  if (l.bias.size() != classes) fail("bias length must equal the number of weight columns");
  if (l.input.size() != features || l.baseline.size() != features) {
    fail("input and baseline must have one entry per weight row");
  }
  if (!l.weights.allFinite() || !l.bias.allFinite() || !l.input.allFinite() ||
      !l.baseline.allFinite()) {
    fail("linear_softmax parameters must be finite");
  }
  if (l.groups.empty()) {
    if (l.n_players != features) fail("without groups, n must equal the number of features");
    return;
  }
  if (static_cast<int>(l.groups.size()) != l.n_players) fail("one group per player required");
  std::set<int> seen;
  for (const auto& group : l.groups) {
    if (group.empty()) fail("groups must be nonempty");
    for (int f : group) {
      if (f < 0 || f >= features) fail("group feature index out of range");
      if (!seen.insert(f).second) fail("feature " + std::to_string(f) + " is in two groups");
    }
  }
}

}  // namespace

int GameSpec::n_players() const {
  return std::visit(
      [](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, XorSpec>) {
          return 2;
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          return s.first->n_players();
        } else {
          return s.n_players;
        }
      },
      payload);
}

FamilyTag GameSpec::family() const {
  return std::visit(
      [](const auto& s) -> FamilyTag {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, XorSpec>) {
          return {Family::bernoulli, 0};
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          return s.first->family();
        } else if constexpr (std::is_same_v<T, LinearSoftmaxSpec>) {
          return {Family::categorical, static_cast<int>(s.weights.cols())};
        } else {
          return s.family;
        }
      },
      payload);
}

nlohmann::json params_to_json(const PayoffParams& params) {
  if (const auto* b = std::get_if<BernoulliParams>(&params)) return {{"pi", b->pi}};
  if (const auto* g = std::get_if<GaussianParams>(&params)) {
    return {{"mu", g->mu}, {"sigma", g->sigma}};
  }
  return {{"logits", vector_to_json(std::get<CategoricalParams>(params).logits)}};
}

PayoffParams params_from_json(const nlohmann::json& j, const FamilyTag& family) {
  PayoffParams params;
  try {
    switch (family.family) {
      case Family::bernoulli: params = bernoulli(field(j, "pi").get<double>()); break;
      case Family::gaussian:
        params = gaussian(field(j, "mu").get<double>(), field(j, "sigma").get<double>());
        break;
      case Family::categorical:
        params = categorical(vector_from_json(field(j, "logits"), "logits"));
        break;
    }
  } catch (const json::exception& e) {
    fail(std::string("bad payoff parameters: ") + e.what());
  }
  try {
    distval::validate(params, family);
  } catch (const Error& e) {
    fail(std::string("bad payoff parameters: ") + e.what());
  }
  return params;
}

GameSpec parse_game_spec(const nlohmann::json& game) {
  try {
    return parse_spec_impl(game);
  } catch (const json::exception& e) {
    fail(std::string("malformed game spec: ") + e.what());
  }
}

nlohmann::json to_json(const GameSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, XorSpec>) {
          return {{"kind", "xor"}};
        } else if constexpr (std::is_same_v<T, TableGameSpec>) {
          json payoffs = json::object();
          for (const auto& [key, params] : s.payoffs) payoffs[key] = params_to_json(params);
          json out = {{"kind", "table"},
                      {"n", s.n_players},
                      {"family", std::string(to_string(s.family.family))},
                      {"payoffs", payoffs}};
          if (s.family.family == Family::categorical) out["d"] = s.family.classes;
          return out;
        } else if constexpr (std::is_same_v<T, LinearSoftmaxSpec>) {
          json weights = json::array();
          for (Eigen::Index r = 0; r < s.weights.rows(); ++r) {
            weights.push_back(vector_to_json(s.weights.row(r).transpose()));
          }
          json out = {{"kind", "linear_softmax"},    {"n", s.n_players},
                      {"weights", weights},          {"bias", vector_to_json(s.bias)},
                      {"input", vector_to_json(s.input)}, {"baseline", vector_to_json(s.baseline)}};
          if (!s.groups.empty()) out["groups"] = s.groups;
          return out;
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          return {{"kind", "mixture"},
                  {"weight", s.weight},
                  {"first", to_json(*s.first)},
                  {"second", to_json(*s.second)}};
        } else {
          json out = {{"kind", "bridge"},
                      {"command", s.command},
                      {"n", s.n_players},
                      {"family", std::string(to_string(s.family.family))},
                      {"timeout_ms", s.timeout_ms}};
          if (s.family.classes > 0) out["d"] = s.family.classes;
          return out;
        }
      },
      spec.payload);
}

void validate(const GameSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TableGameSpec>) {
          if (s.n_players < 1 || s.n_players > kMaxPlayers) fail("table game: bad n");
          require_enumerable(s.n_players);
          for (const auto& [key, params] : s.payoffs) {
            if (Coalition::from_key(s.n_players, key).key() != key) {
              fail("coalition key '" + key + "' is not canonical");
            }
            try {
              distval::validate(params, s.family);
            } catch (const Error& e) {
              fail("payoff for '" + key + "': " + e.what());
            }
          }
          for (std::uint64_t mask = 0; mask <= full_mask(s.n_players); ++mask) {
            const std::string key = Coalition(s.n_players, mask).key();
            if (!s.payoffs.contains(key)) fail("table game has no payoff for coalition '" + key + "'");
          }
        } else if constexpr (std::is_same_v<T, LinearSoftmaxSpec>) {
          check_linear_softmax(s);
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          if (!(s.weight >= 0.0 && s.weight <= 1.0)) fail("mixture weight must lie in [0, 1]");
          if (!s.first || !s.second) fail("mixture needs two components");
          if (s.first->n_players() != s.second->n_players() ||
              s.first->family() != s.second->family()) {
            fail("mixture components must share n and family");
          }
        } else if constexpr (std::is_same_v<T, BridgeSpec>) {
          if (s.command.empty()) fail("bridge command is empty");
          if (s.n_players < 1 || s.n_players > kMaxPlayers) fail("bridge: bad n");
          if (s.timeout_ms <= 0) fail("bridge timeout must be positive");
        }
      },
      spec.payload);
}

Eigen::VectorXd masked_input(const LinearSoftmaxSpec& spec, const Coalition& c) {
  Eigen::VectorXd out = spec.baseline;
  for (int player : c.members()) {
    if (spec.groups.empty()) {
      out[player] = spec.input[player];
    } else {
      for (int f : spec.groups[static_cast<std::size_t>(player)]) out[f] = spec.input[f];
    }
  }
  return out;
}

Eigen::VectorXd linear_softmax_logits(const LinearSoftmaxSpec& spec, const Coalition& c) {
  return spec.weights.transpose() * masked_input(spec, c) + spec.bias;
}

StochasticGame make_xor_game() {
  return StochasticGame(2, {Family::bernoulli, 0},
                        [](const Coalition& c) { return bernoulli(c.size() == 1 ? 1.0 : 0.0); });
}

StochasticGame build_game(const GameSpec& spec) {
  validate(spec);
  return std::visit(
      [](const auto& s) -> StochasticGame {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, XorSpec>) {
          return make_xor_game();
        } else if constexpr (std::is_same_v<T, TableGameSpec>) {
          std::vector<PayoffParams> table(std::size_t{1} << s.n_players);
          for (const auto& [key, params] : s.payoffs) {
            table[Coalition::from_key(s.n_players, key).mask()] = params;
          }
          return StochasticGame(s.n_players, s.family,
                                [table = std::move(table)](const Coalition& c) {
                                  return table[c.mask()];
                                });
        } else if constexpr (std::is_same_v<T, LinearSoftmaxSpec>) {
          return StochasticGame(s.n_players, {Family::categorical, static_cast<int>(s.weights.cols())},
                                [s](const Coalition& c) {
                                  return categorical(linear_softmax_logits(s, c));
                                });
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          return StochasticGame::mixture(s.weight, build_game(*s.first), build_game(*s.second));
        } else {
          return build_bridge_game({s.command, s.n_players, s.family, s.timeout_ms});
        }
      },
      spec.payload);
}

TableGameSpec export_table(const StochasticGame& g) {
  require_enumerable(g.n_players());
  TableGameSpec t;
  t.n_players = g.n_players();
  t.family = g.kind();
  for (std::uint64_t mask = 0; mask <= full_mask(g.n_players()); ++mask) {
    const Coalition c(g.n_players(), mask);
    t.payoffs.emplace(c.key(), g.payoff(c));
  }
  return t;
}

CoalitionStructure parse_structure(const nlohmann::json& structure, int n_players) {
  try {
    const std::string kind = field(structure, "kind").get<std::string>();
    if (kind == "shapley") return make_shapley(n_players);
    if (kind == "leave_one_out" || kind == "loo") return make_leave_one_out(n_players);
    if (kind == "size_weighted") {
      return make_size_weighted(n_players, field(structure, "weights").get<std::vector<double>>());
    }
    if (kind == "random_order") {
      std::vector<WeightedPermutation> perms;
      for (const json& p : field(structure, "permutations")) {
        perms.push_back({field(p, "order").get<std::vector<int>>(), field(p, "prob").get<double>()});
      }
      return make_random_order(n_players, perms);
    }
    if (kind == "custom") {
      std::map<int, std::map<std::string, double>> tables;
      for (const auto& [player, table] : field(structure, "tables").items()) {
        std::size_t used = 0;
        const int index = std::stoi(player, &used);
        if (used != player.size()) fail("custom table player key '" + player + "' is not an index");
        tables[index] = table.get<std::map<std::string, double>>();
      }
      return make_custom(n_players, tables);
    }
    fail("unknown structure kind '" + kind + "'");
  } catch (const json::exception& e) {
    fail(std::string("malformed structure: ") + e.what());
  } catch (const std::invalid_argument&) {
    fail("custom table player keys must be integers");
  }
}

OutcomeOracle gumbel_outcome_oracle(const StochasticGame& g) {
  if (g.kind().family != Family::categorical || g.is_mixture()) {
    throw Error(ErrorCode::unsupported_family,
                "outcome simulation needs a parametric categorical game");
  }
  return [g](const Coalition& c, std::uint64_t seed) {
    const Eigen::VectorXd logits = std::get<CategoricalParams>(g.payoff(c)).logits;
    std::mt19937_64 rng(seed);
    std::extreme_value_distribution<double> gumbel(0.0, 1.0);
    Eigen::Index best = 0;
    double best_value = -INFINITY;
    for (Eigen::Index k = 0; k < logits.size(); ++k) {
      const double v = logits[k] + gumbel(rng);
      if (v > best_value) {
        best_value = v;
        best = k;
      }
    }
    return static_cast<int>(best);
  };
}

}  // namespace distval
