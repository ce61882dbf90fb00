#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "distval/builders.hpp"
#include "distval/report.hpp"

namespace distval {
namespace {

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

std::size_t line_count(const std::string& text) {
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  return lines;
}

TEST(Report, Sha256KnownDigests) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Report, NumbersRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    EXPECT_EQ(std::stod(format_number(x)), x);
  }
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
}

ExplainResult xor_result() {
  const StochasticGame g = make_xor_game();
  ExplainResult r;
  r.provenance = {sha256_hex("{}"), "shapley", "exact", 0, 0, 0};
  r.n_players = 2;
  r.family = g.kind();
  for (int i = 0; i < 2; ++i) r.players.push_back({i, exact_value(g, make_shapley(2), i), {}, 0});
  return r;
}

TEST(Report, ExplainJsonForXor) {
  const auto j = to_json(xor_result());
  EXPECT_EQ(j.at("provenance").at("version"), std::string(kVersion));
  EXPECT_EQ(j.at("game").at("family"), "bernoulli");
  EXPECT_FALSE(j.at("game").contains("classes"));
  ASSERT_EQ(j.at("players").size(), 2U);
  for (const auto& p : j.at("players")) {
    EXPECT_EQ(p.at("value").at("q_plus").get<double>(), 0.5);
    EXPECT_EQ(p.at("value").at("q_minus").get<double>(), 0.5);
    EXPECT_EQ(p.at("importance").get<double>(), 1.0);
    EXPECT_EQ(p.at("variance").get<double>(), 1.0);
    EXPECT_FALSE(p.contains("mc"));
    EXPECT_FALSE(p.contains("mode_change"));
  }
}

TEST(Report, ExplainCsvHeaders) {
  ExplainResult r = xor_result();
  const std::string bern = to_csv(r);
  EXPECT_EQ(first_line(bern), "player,atom,prob");
  EXPECT_EQ(line_count(bern), 1U + 2 * 3);
  EXPECT_NE(bern.find("\n0,1,0.5\n"), std::string::npos);

  r.family = {Family::categorical, 3};
  CategoricalValue c{Eigen::Matrix3d::Identity() / 3.0};
  c.transition(1, 0) = 0.0;
  r.players = {{4, c, {}, 0}};
  const std::string cat = to_csv(r);
  EXPECT_EQ(first_line(cat), "player,from,to,prob");
  EXPECT_EQ(line_count(cat), 1U + 9);
  EXPECT_NE(cat.find("\n4,0,0,0.33333333333333331\n4,0,1,0\n"), std::string::npos);

  r.family = {Family::gaussian, 0};
  GaussianValue gv;
  gv.components = {{0.25, -1.0, 0.5}, {0.75, 2.0, 0.0}};
  r.players = {{0, gv, {}, 0}};
  const std::string gauss = to_csv(r);
  EXPECT_EQ(first_line(gauss), "player,component,weight,mean,sd");
  EXPECT_NE(gauss.find("\n0,1,0.75,2,0\n"), std::string::npos);
}

TEST(Report, CategoricalPlayerEntry) {
  ExplainResult r;
  r.family = {Family::categorical, 2};
  r.n_players = 1;
  Eigen::MatrixXd q(2, 2);
  q << 0.5, 0.3, 0.0, 0.2;
  r.players = {{0, CategoricalValue{q}, Eigen::VectorXd::Constant(4, 0.01), 100}};
  const auto j = to_json(r, 1);
  const auto& p = j.at("players")[0];
  EXPECT_EQ(j.at("game").at("classes"), 2);
  EXPECT_EQ(p.at("value").at("p_zero").get<double>(), 0.7);
  EXPECT_EQ(p.at("mode_change").at("from"), 1);
  EXPECT_EQ(p.at("mode_change").at("to"), 0);
  EXPECT_EQ(p.at("flip_away").at("from"), 1);
  EXPECT_EQ(p.at("top_transitions").size(), 1U);
  EXPECT_EQ(p.at("mc").at("samples"), 100);
  EXPECT_FALSE(p.contains("variance"));
}

TEST(Report, SuiteAndFidelityCsv) {
  PropertyReport pr;
  pr.property = "prop1_iv";
  pr.status = PropertyStatus::not_applicable;
  pr.tol = 1e-10;
  const std::string suite = suite_to_csv({pr});
  EXPECT_EQ(suite, "property,status,max_dev,tol,trials\nprop1_iv,not_applicable,0,1e-10,0\n");
  EXPECT_EQ(suite_to_json({pr})[0].at("status"), "not_applicable");

  FidelityTrace t;
  t.scheme = FidelityScheme::standard_value;
  t.steps = {{0, -1, 0.5, 0.25}, {1, 3, 0.25, 0.5}};
  EXPECT_EQ(fidelity_to_csv({t}),
            "step,scheme,removed_player,p_c1,p_c2\n0,B,,0.5,0.25\n1,B,3,0.25,0.5\n");
  const auto j = fidelity_to_json({t});
  EXPECT_TRUE(j[0].at("steps")[0].at("removed_player").is_null());
  EXPECT_EQ(j[0].at("scheme"), "B");
}

TEST(Report, StructureOutputs) {
  const auto loo = structure_to_json(make_leave_one_out(3));
  EXPECT_FALSE(loo.at("efficient").get<bool>());
  EXPECT_EQ(loo.at("grand_sum").get<double>(), 3.0);
  EXPECT_TRUE(loo.at("symmetric").get<bool>());
  EXPECT_EQ(loo.at("players")[0].at("support")[0].at("coalition"), "1,2");
  const std::string csv = structure_to_csv(make_shapley(2));
  EXPECT_EQ(csv, "player,coalition,prob\n0,\"\",0.5\n0,\"1\",0.5\n1,\"\",0.5\n1,\"0\",0.5\n");
}

}  // namespace
}  // namespace distval
