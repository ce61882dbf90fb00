// distval command-line interface.
//
//   distval explain  --game spec.json --out result.json [--mode exact|mc|sampled] ...
//   distval verify   --out report.json [--suite prop1_i,prop1_iv] [--structure loo] ...
//   distval fidelity --game spec.json --fidelity-classes 0,1 --out trace.csv ...
//   distval enumerate-structure --players 4 --structure shapley --out pmf.json
//
// Exit codes: 0 success, 1 property failure (verify), 2 invalid input,
// 3 oracle or bridge failure, 4 numeric failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "distval/builders.hpp"
#include "distval/error.hpp"
#include "distval/report.hpp"
#include "distval/verify.hpp"

namespace {

using distval::Error;
using distval::ErrorCode;
using nlohmann::json;

enum ExitCode { kOk = 0, kPropertyFailure = 1, kInvalid = 2, kOracle = 3, kNumeric = 4 };

int exit_code_for(const Error& e) {
  switch (e.category()) {
    case distval::ErrorCategory::validation: return kInvalid;
    case distval::ErrorCategory::oracle: return kOracle;
    case distval::ErrorCategory::numeric: return kNumeric;
  }
  return kInvalid;
}

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::invalid_argument, message);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::spec_validation, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::spec_validation, what + " is not valid JSON: " + e.what());
  }
}

/// Writes the whole payload at once; nothing is created unless the command
/// got this far.
void emit(const std::string& path, const std::string& payload) {
  if (path == "-") {
    std::cout << payload;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::invalid_argument, "cannot write '" + path + "'");
  out << payload;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct LoadedSpec {
  std::string sha256;
  json document;
  distval::GameSpec game;
};

LoadedSpec load_spec(const std::string& path) {
  LoadedSpec spec;
  const std::string text = read_file(path);
  spec.sha256 = distval::sha256_hex(text);
  spec.document = parse_json_text(text, "game spec '" + path + "'");
  if (!spec.document.is_object() || !spec.document.contains("game")) {
    throw Error(ErrorCode::spec_validation, "game spec needs a top-level \"game\" object");
  }
  spec.game = distval::parse_game_spec(spec.document.at("game"));
  distval::validate(spec.game);
  return spec;
}

/// Resolves --structure (shapley | loo | weights:FILE | perm:FILE | custom:FILE),
/// falling back to the spec file's "structure" object and then to shapley.
distval::CoalitionStructure resolve_structure(const std::string& selector, const json* document,
                                              int n_players) {
  if (selector.empty()) {
    if (document != nullptr && document->contains("structure")) {
      return distval::parse_structure(document->at("structure"), n_players);
    }
    return distval::make_shapley(n_players);
  }
  if (selector == "shapley") return distval::make_shapley(n_players);
  if (selector == "loo" || selector == "leave_one_out") return distval::make_leave_one_out(n_players);
  const auto colon = selector.find(':');
  if (colon == std::string::npos) invalid("unknown structure '" + selector + "'");
  const std::string kind = selector.substr(0, colon);
  const std::string path = selector.substr(colon + 1);
  json payload = parse_json_text(read_file(path), "structure file '" + path + "'");
  json structure;
  if (kind == "weights") {
    structure = {{"kind", "size_weighted"},
                 {"weights", payload.is_array() ? payload : payload.value("weights", json())}};
  } else if (kind == "perm") {
    structure = {{"kind", "random_order"},
                 {"permutations", payload.is_array() ? payload : payload.value("permutations", json())}};
  } else if (kind == "custom") {
    structure = {{"kind", "custom"},
                 {"tables", payload.contains("tables") ? payload.at("tables") : payload}};
  } else {
    invalid("unknown structure kind '" + kind + "'");
  }
  return distval::parse_structure(structure, n_players);
}

std::vector<int> resolve_players(const std::string& selector, int n_players) {
  std::vector<int> players;
  if (selector == "all") {
    for (int i = 0; i < n_players; ++i) players.push_back(i);
    return players;
  }
  try {
    std::size_t used = 0;
    const int player = std::stoi(selector, &used);
    if (used == selector.size() && player >= 0 && player < n_players) return {player};
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::index_out_of_range, "--player must be 'all' or an index in [0, " +
                                                 std::to_string(n_players) + ")");
}

json payoff_json(const distval::StochasticGame& g, const distval::Coalition& c) {
  const Eigen::VectorXd e = g.expected_payoff(c);
  return {{"expected", std::vector<double>(e.begin(), e.end())},
          {"params", g.is_mixture() ? json(nullptr) : distval::params_to_json(g.payoff(c))}};
}

// ---- explain ------------------------------------------------------------------

struct ExplainArgs {
  std::string game;
  std::string structure;
  std::string player = "all";
  std::string mode = "exact";
  std::size_t samples = 0;
  std::size_t seeds = 1000;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
  std::string format = "json";
  std::size_t top_k = 3;
};

int cmd_explain(const ExplainArgs& args) {
  const LoadedSpec spec = load_spec(args.game);
  const int n = spec.game.n_players();
  const distval::CoalitionStructure p = resolve_structure(args.structure, &spec.document, n);
  const std::vector<int> players = resolve_players(args.player, n);
  const distval::StochasticGame g = distval::build_game(spec.game);

  distval::ExplainResult result;
  result.provenance = {spec.sha256, std::string(distval::to_string(p.kind())), args.mode, args.seed,
                       0, 0};
  result.n_players = n;
  result.family = g.kind();

  if (args.mode == "exact") {
    for (int i : players) {
      result.players.push_back({i, distval::exact_value(g, p, i, {args.threads}), {}, 0});
    }
  } else if (args.mode == "mc") {
    const std::size_t samples = args.samples > 0 ? args.samples : 10000;
    result.provenance.samples = samples;
    for (auto& est : distval::mc_value(g, p, players, {samples, args.seed, args.threads})) {
      result.players.push_back({est.player, est.value, est.standard_error, est.samples});
    }
  } else if (args.mode == "sampled") {
    if (args.seeds == 0) invalid("--seeds must be positive in sampled mode");
    const std::size_t samples = args.samples > 0 ? args.samples : 200;
    result.provenance.samples = samples;
    result.provenance.seeds = args.seeds;
    const distval::OutcomeOracle oracle = distval::gumbel_outcome_oracle(g);
    for (int i : players) {
      result.players.push_back(
          {i,
           distval::mc_value_sampled(oracle, g.kind().classes, p, i, {samples, args.seeds, args.seed}),
           {},
           0});
    }
  } else {
    invalid("--mode must be exact, mc or sampled");
  }
  result.v_empty = payoff_json(g, distval::Coalition(n));
  result.v_grand = payoff_json(g, distval::Coalition::grand(n));

  emit(args.out, args.format == "csv" ? distval::to_csv(result)
                                      : dump(distval::to_json(result, args.top_k)));
  return kOk;
}

// ---- verify -------------------------------------------------------------------

struct VerifyArgs {
  std::string suite;
  std::string structure;
  std::string game;
  int players = 4;
  std::uint64_t seed = 0;
  std::size_t trials = 100;
  std::size_t oracle_trials = 100;
  std::size_t oracle_samples = 1000000;
  int threads = 1;
  std::string out;
  std::string format = "json";
};

int cmd_verify(const VerifyArgs& args) {
  distval::SuiteOptions options;
  options.seed = args.seed;
  options.trials = args.trials;
  options.oracle_trials = args.oracle_trials;
  options.oracle_samples = args.oracle_samples;
  options.threads = args.threads;
  std::stringstream ids(args.suite);
  for (std::string id; std::getline(ids, id, ',');) {
    if (!id.empty()) options.selection.push_back(id);
  }
  if (!args.structure.empty()) {
    std::optional<LoadedSpec> spec;
    if (!args.game.empty()) spec = load_spec(args.game);
    const int n = spec ? spec->game.n_players() : args.players;
    options.structure = resolve_structure(args.structure, spec ? &spec->document : nullptr, n);
  }
  const auto reports = distval::run_property_suite(options);
  emit(args.out, args.format == "csv" ? distval::suite_to_csv(reports)
                                      : dump(distval::suite_to_json(reports)));
  bool failed = false;
  for (const auto& r : reports) {
    if (r.status == distval::PropertyStatus::fail) {
      failed = true;
      std::cerr << "FAIL " << r.property << ": max_dev " << distval::format_number(r.max_dev)
                << " > tol " << distval::format_number(r.tol) << '\n';
    }
  }
  return failed ? kPropertyFailure : kOk;
}

// ---- fidelity -----------------------------------------------------------------

struct FidelityArgs {
  std::string game;
  bool synthetic = false;
  std::string structure;
  std::string classes = "0,1";
  int steps = -1;
  std::string scheme = "all";
  int threads = 1;
  std::string out;
  std::string format = "csv";
};

std::pair<int, int> parse_classes(const std::string& text) {
  const auto comma = text.find(',');
  try {
    if (comma != std::string::npos) {
      std::size_t u1 = 0;
      std::size_t u2 = 0;
      const std::string a = text.substr(0, comma);
      const std::string b = text.substr(comma + 1);
      const int c1 = std::stoi(a, &u1);
      const int c2 = std::stoi(b, &u2);
      if (u1 == a.size() && u2 == b.size()) return {c1, c2};
    }
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::invalid_classes, "--fidelity-classes expects C1,C2");
}

int cmd_fidelity(const FidelityArgs& args) {
  std::optional<LoadedSpec> spec;
  distval::GameSpec game_spec;
  if (args.synthetic) {
    game_spec.payload = distval::synthetic_fidelity_spec();
  } else {
    if (args.game.empty()) invalid("fidelity needs --game or --synthetic");
    spec = load_spec(args.game);
    game_spec = spec->game;
  }
  const int n = game_spec.n_players();
  const distval::StochasticGame g = distval::build_game(game_spec);
  if (g.kind().family != distval::Family::categorical) {
    throw Error(ErrorCode::unsupported_family, "fidelity needs a categorical game");
  }
  const auto [c1, c2] = parse_classes(args.classes);
  const int d = g.kind().classes;
  if (c1 == c2 || c1 < 0 || c2 < 0 || c1 >= d || c2 >= d) {
    throw Error(ErrorCode::invalid_classes, "classes must be distinct and in [0, " +
                                                std::to_string(d) + ")");
  }
  const int steps = args.steps < 0 ? n : args.steps;
  std::vector<distval::FidelityScheme> schemes;
  if (args.scheme == "all") {
    schemes = {distval::FidelityScheme::csv_transition, distval::FidelityScheme::standard_value,
               distval::FidelityScheme::negated_other};
  } else {
    schemes = {distval::parse_scheme(args.scheme)};
  }
  const distval::CoalitionStructure p =
      resolve_structure(args.structure, spec ? &spec->document : nullptr, n);
  std::vector<distval::CategoricalValue> values;
  for (int i = 0; i < n; ++i) {
    values.push_back(std::get<distval::CategoricalValue>(distval::exact_value(g, p, i, {args.threads})));
  }
  std::vector<distval::FidelityTrace> traces;
  for (auto scheme : schemes) traces.push_back(distval::fidelity_trace(g, values, c1, c2, scheme, steps));
  emit(args.out, args.format == "json" ? dump(distval::fidelity_to_json(traces))
                                       : distval::fidelity_to_csv(traces));
  return kOk;
}

// ---- enumerate-structure ------------------------------------------------------

struct EnumerateArgs {
  std::string game;
  int players = 0;
  std::string structure;
  std::string out;
  std::string format = "json";
};

int cmd_enumerate(const EnumerateArgs& args) {
  std::optional<LoadedSpec> spec;
  if (!args.game.empty()) spec = load_spec(args.game);
  const int n = spec ? spec->game.n_players() : args.players;
  if (n < 1) invalid("enumerate-structure needs --game or --players N");
  const auto p = resolve_structure(args.structure, spec ? &spec->document : nullptr, n);
  emit(args.out, args.format == "csv" ? distval::structure_to_csv(p)
                                      : dump(distval::structure_to_json(p)));
  return kOk;
}

void add_format(CLI::App* cmd, std::string& format) {
  cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

void add_out(CLI::App* cmd, std::string& out) {
  cmd->add_option("--out,--output", out, "Output path, '-' for stdout")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributional values for stochastic cooperative games"};
  app.set_version_flag("--version", std::string(distval::kVersion));
  app.require_subcommand(1);

  ExplainArgs explain;
  auto* ex = app.add_subcommand("explain", "Compute distributional values");
  ex->add_option("--game", explain.game, "Game spec JSON")->required();
  ex->add_option("--structure", explain.structure,
                 "shapley | loo | weights:FILE | perm:FILE | custom:FILE");
  ex->add_option("--player", explain.player, "Player index or 'all'");
  ex->add_option("--mode", explain.mode, "exact | mc | sampled")
      ->check(CLI::IsMember({"exact", "mc", "sampled"}));
  ex->add_option("--samples", explain.samples, "Monte Carlo samples (mc) or coalitions (sampled)");
  ex->add_option("--seeds", explain.seeds, "Noise seeds per coalition (sampled)");
  ex->add_option("--seed", explain.seed, "Master RNG seed");
  ex->add_option("--threads", explain.threads, "Worker threads")->check(CLI::PositiveNumber);
  ex->add_option("--top-k", explain.top_k, "Transitions listed per player");
  add_out(ex, explain.out);
  add_format(ex, explain.format);

  VerifyArgs verify;
  auto* ve = app.add_subcommand("verify", "Run the property suite");
  ve->add_option("--suite", verify.suite, "Comma-separated property ids (default: all)");
  ve->add_option("--structure", verify.structure, "Structure override for the value properties");
  ve->add_option("--game", verify.game, "Spec file supplying n and structure files");
  ve->add_option("--players", verify.players, "Player count for --structure without --game");
  ve->add_option("--seed", verify.seed, "Suite seed");
  ve->add_option("--trials", verify.trials, "Trials per property");
  ve->add_option("--oracle-trials", verify.oracle_trials, "(alpha, beta) pairs for oracle_tv");
  ve->add_option("--oracle-samples", verify.oracle_samples, "Gumbel draws per oracle_tv pair");
  ve->add_option("--threads", verify.threads, "Worker threads")->check(CLI::PositiveNumber);
  add_out(ve, verify.out);
  add_format(ve, verify.format);

  FidelityArgs fidelity;
  auto* fi = app.add_subcommand("fidelity", "Feature-removal traces under attribution orders");
  fi->add_option("--game", fidelity.game, "Categorical game spec JSON");
  fi->add_flag("--synthetic", fidelity.synthetic, "Use the built-in ten-feature test game");
  fi->add_option("--structure", fidelity.structure, "Coalition structure");
  fi->add_option("--fidelity-classes", fidelity.classes, "Tracked classes C1,C2");
  fi->add_option("--steps", fidelity.steps, "Players to remove (default: all)");
  fi->add_option("--scheme", fidelity.scheme, "A | B | C | all")
      ->check(CLI::IsMember({"A", "B", "C", "all"}));
  fi->add_option("--threads", fidelity.threads, "Worker threads")->check(CLI::PositiveNumber);
  add_out(fi, fidelity.out);
  add_format(fi, fidelity.format);

  EnumerateArgs enumerate;
  auto* en = app.add_subcommand("enumerate-structure", "List a coalition structure's PMFs");
  en->add_option("--game", enumerate.game, "Spec file supplying n (and a structure)");
  en->add_option("--players", enumerate.players, "Player count without --game");
  en->add_option("--structure", enumerate.structure, "Coalition structure");
  add_out(en, enumerate.out);
  add_format(en, enumerate.format);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*ex) return cmd_explain(explain);
    if (*ve) return cmd_verify(verify);
    if (*fi) return cmd_fidelity(fidelity);
    if (*en) return cmd_enumerate(enumerate);
  } catch (const Error& e) {
    std::cerr << "distval: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "distval: " << e.what() << '\n';
    return kNumeric;
  }
  return kInvalid;
}
