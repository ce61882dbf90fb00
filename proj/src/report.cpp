#include "distval/report.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "distval/error.hpp"

namespace distval {

using nlohmann::json;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::invalid_argument, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int k = 0; k < length; ++k) {
    out.push_back(kHex[digest[k] >> 4]);
    out.push_back(kHex[digest[k] & 0xF]);
  }
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); }

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json transition_json(const Transition& t) {
  return {{"from", t.from}, {"to", t.to}, {"probability", t.probability}};
}

}  // namespace

nlohmann::json value_to_json(const DistributionalValue& value) {
  if (const auto* b = std::get_if<BernoulliValue>(&value)) {
    return {{"q_plus", b->q_plus}, {"q_minus", b->q_minus}, {"q_zero", b->q_zero}};
  }
  if (const auto* g = std::get_if<GaussianValue>(&value)) {
    json comps = json::array();
    for (const auto& c : g->components) {
      comps.push_back({{"weight", c.weight}, {"mean", c.mean}, {"sd", c.sd}});
    }
    return {{"components", comps},
            {"sign_pmf", {{"-1", g->sign_pmf[0]}, {"0", g->sign_pmf[1]}, {"+1", g->sign_pmf[2]}}}};
  }
  const auto& c = std::get<CategoricalValue>(value);
  json rows = json::array();
  for (Eigen::Index r = 0; r < c.transition.rows(); ++r) {
    rows.push_back(vector_json(c.transition.row(r).transpose()));
  }
  return {{"transition", rows}, {"p_zero", c.p_zero()}};
}

nlohmann::json to_json(const ExplainResult& result, std::size_t top_k) {
  const Provenance& p = result.provenance;
  json out;
  out["provenance"] = {{"spec_sha256", p.spec_sha256},
                       {"structure", p.structure},
                       {"mode", p.mode},
                       {"seed", p.seed},
                       {"samples", p.samples},
                       {"seeds", p.seeds},
                       {"version", std::string(kVersion)}};
  out["game"] = {{"n_players", result.n_players},
                 {"family", std::string(to_string(result.family.family))}};
  if (result.family.family == Family::categorical) out["game"]["classes"] = result.family.classes;
  out["v_empty"] = result.v_empty;
  out["v_grand"] = result.v_grand;
  json players = json::array();
  for (const PlayerResult& pr : result.players) {
    const ValueStats stats = compute_stats(pr.value);
    json entry = {{"player", pr.player},
                  {"value", value_to_json(pr.value)},
                  {"importance", stats.importance},
                  {"expectation", vector_json(stats.expectation)}};
    if (stats.variance) entry["variance"] = *stats.variance;
    if (stats.entropy) entry["entropy"] = *stats.entropy;
    if (stats.mode_change) entry["mode_change"] = transition_json(*stats.mode_change);
    if (stats.flip_away) {
      entry["flip_away"] = {{"from", stats.flip_away->from},
                            {"probability", stats.flip_away->probability}};
    }
    if (const auto* c = std::get_if<CategoricalValue>(&pr.value)) {
      json top = json::array();
      for (const auto& t : top_transitions(*c, top_k)) top.push_back(transition_json(t));
      entry["top_transitions"] = top;
    }
    if (pr.standard_error.size() > 0) {
      json se = json::array();
      for (double x : pr.standard_error) se.push_back(finite_or_null(x));
      entry["mc"] = {{"samples", pr.samples}, {"standard_error", se}};
    }
    players.push_back(std::move(entry));
  }
  out["players"] = std::move(players);
  return out;
}

std::string to_csv(const ExplainResult& result) {
  std::ostringstream os;
  switch (result.family.family) {
    case Family::categorical: os << "player,from,to,prob\n"; break;
    case Family::bernoulli: os << "player,atom,prob\n"; break;
    case Family::gaussian: os << "player,component,weight,mean,sd\n"; break;
  }
  for (const PlayerResult& pr : result.players) {
    if (const auto* b = std::get_if<BernoulliValue>(&pr.value)) {
      os << pr.player << ",1," << format_number(b->q_plus) << '\n'
         << pr.player << ",-1," << format_number(b->q_minus) << '\n'
         << pr.player << ",0," << format_number(b->q_zero) << '\n';
    } else if (const auto* g = std::get_if<GaussianValue>(&pr.value)) {
      for (std::size_t k = 0; k < g->components.size(); ++k) {
        const auto& c = g->components[k];
        os << pr.player << ',' << k << ',' << format_number(c.weight) << ','
           << format_number(c.mean) << ',' << format_number(c.sd) << '\n';
      }
    } else {
      const auto& q = std::get<CategoricalValue>(pr.value).transition;
      for (Eigen::Index s = 0; s < q.cols(); ++s) {
        for (Eigen::Index r = 0; r < q.rows(); ++r) {
          os << pr.player << ',' << s << ',' << r << ',' << format_number(q(r, s)) << '\n';
        }
      }
    }
  }
  return os.str();
}

nlohmann::json suite_to_json(const std::vector<PropertyReport>& reports) {
  json out = json::array();
  for (const auto& r : reports) out.push_back(to_json(r));
  return out;
}

std::string suite_to_csv(const std::vector<PropertyReport>& reports) {
  std::ostringstream os;
  os << "property,status,max_dev,tol,trials\n";
  for (const auto& r : reports) {
    os << r.property << ',' << to_string(r.status) << ',' << format_number(r.max_dev) << ','
       << format_number(r.tol) << ',' << r.trials << '\n';
  }
  return os.str();
}

nlohmann::json fidelity_to_json(const std::vector<FidelityTrace>& traces) {
  json out = json::array();
  for (const auto& t : traces) {
    json steps = json::array();
    for (const auto& s : t.steps) {
      steps.push_back({{"step", s.step},
                       {"removed_player", s.removed_player < 0 ? json(nullptr) : json(s.removed_player)},
                       {"p_c1", s.p_c1},
                       {"p_c2", s.p_c2}});
    }
    out.push_back({{"scheme", std::string(to_string(t.scheme))},
                   {"c1", t.c1},
                   {"c2", t.c2},
                   {"order", t.order},
                   {"steps", steps}});
  }
  return out;
}

std::string fidelity_to_csv(const std::vector<FidelityTrace>& traces) {
  std::ostringstream os;
  os << "step,scheme,removed_player,p_c1,p_c2\n";
  for (const auto& t : traces) {
    for (const auto& s : t.steps) {
      os << s.step << ',' << to_string(t.scheme) << ',';
      if (s.removed_player >= 0) os << s.removed_player;
      os << ',' << format_number(s.p_c1) << ',' << format_number(s.p_c2) << '\n';
    }
  }
  return os.str();
}

nlohmann::json structure_to_json(const CoalitionStructure& p) {
  const EfficiencyReport eff = is_efficient(p);
  json players = json::array();
  for (int i = 0; i < p.n_players(); ++i) {
    json support = json::array();
    for (const auto& [c, prob] : p.support(i)) {
      support.push_back({{"coalition", c.key()}, {"prob", prob}});
    }
    players.push_back({{"player", i}, {"support", support}});
  }
  return {{"n_players", p.n_players()},
          {"kind", std::string(to_string(p.kind()))},
          {"efficient", eff.efficient},
          {"grand_sum", eff.grand_sum},
          {"symmetric", is_symmetric(p)},
          {"players", players}};
}

std::string structure_to_csv(const CoalitionStructure& p) {
  std::ostringstream os;
  os << "player,coalition,prob\n";
  for (int i = 0; i < p.n_players(); ++i) {
    for (const auto& [c, prob] : p.support(i)) {
      os << i << ",\"" << c.key() << "\"," << format_number(prob) << '\n';
    }
  }
  return os.str();
}

}  // namespace distval
