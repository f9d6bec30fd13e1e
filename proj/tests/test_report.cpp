#include <gtest/gtest.h>

#include <limits>

#include "test_util.hpp"

using namespace dnr;

TEST(Report, TopologyRoundTrip) {
  const Network net = testutil::load("net7.json");
  for (const Topology& t : enumerate_radial(net)) {
    const json j = to_json(t, net);
    EXPECT_EQ(j["on_lines"].get<std::vector<int>>(), t.on_lines);
    EXPECT_EQ(topology_from_json(j, net), t);
  }
  EXPECT_THROW(topology_from_json(json{{"on_lines", {1, 2}}}, net), NotRadial);
  EXPECT_THROW(topology_from_json(json{{"on_lines", {"a"}}}, net), ParseError);
  EXPECT_THROW(topology_from_json(json::array(), net), ParseError);
}

TEST(Report, MultipliersRoundTrip) {
  const Network net = testutil::load("net4.json");
  const DnrModel m(net);
  Multipliers a = Multipliers::zeros(m.blocks());
  for (Index i = 0; i < a.lambda.size(); ++i) a.lambda[i] = 0.1 * static_cast<double>(i) - 1.0;
  for (Index i = 0; i < a.mu.size(); ++i) a.mu[i] = 0.01 * static_cast<double>(i);
  const Multipliers b = multipliers_from_json(json::parse(to_json(a).dump()), m.blocks());
  EXPECT_EQ(a.lambda, b.lambda);
  EXPECT_EQ(a.mu, b.mu);

  json bad = to_json(a);
  bad["equality"]["made_up"] = {1.0};
  EXPECT_THROW(multipliers_from_json(bad, m.blocks()), ParseError);
  bad = to_json(a);
  bad["inequality"][label::kDropLower] = {1.0};
  EXPECT_THROW(multipliers_from_json(bad, m.blocks()), DimensionMismatch);
  bad = to_json(a);
  bad["equality"].erase(label::kSwitchCount);
  EXPECT_THROW(multipliers_from_json(bad, m.blocks()), ParseError);
}

TEST(Report, PointFileRoundTrip) {
  const Network net = testutil::load("net4.json");
  const Topology t = enumerate_radial(net)[1];
  const Vec za = power_flow_oracle(net, t, net.nominal_loads());
  const PointFile aux = parse_point(json::parse(point_json("aux", za, nullptr, &t, net).dump()), net);
  EXPECT_EQ(aux.model, "aux");
  EXPECT_EQ(aux.z, za);
  EXPECT_EQ(*aux.topology, t);
  EXPECT_FALSE(aux.multipliers.has_value());

  const Vec z = embed(za, t);
  const Multipliers m = Multipliers::zeros(DnrModel(net).blocks());
  const PointFile full = parse_point(point_json("dnr", z, &m, nullptr, net), net);
  EXPECT_EQ(full.z, z);
  EXPECT_TRUE(full.multipliers.has_value());

  EXPECT_THROW(parse_point(json{{"model", "aux"}, {"z", {1.0}}}, net), ParseError);
  EXPECT_THROW(parse_point(json{{"model", "other"}, {"z", {1.0}}}, net), ParseError);
  EXPECT_THROW(parse_point(json{{"z", {1.0}}, {"extra", 0}}, net), ParseError);
  EXPECT_THROW(parse_point(json{{"model", "dnr"}}, net), ParseError);
  EXPECT_THROW(parse_point(json{{"z", {"x"}}}, net), ParseError);
}

TEST(Report, NonFiniteNumbersBecomeNull) {
  EXPECT_TRUE(number_or_null(std::numeric_limits<double>::quiet_NaN()).is_null());
  EXPECT_TRUE(number_or_null(std::numeric_limits<double>::infinity()).is_null());
  EXPECT_EQ(number_or_null(2.5).get<double>(), 2.5);
}

TEST(Report, EmptyStudyRendersHeaderOnly) {
  const StudyResult s;
  const std::string table = render_topology_table(s);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 1);
  EXPECT_EQ(table.rfind("Topo.", 0), 0u);
}

TEST(Report, StudyJsonHasNoTimings) {
  const Network net = testutil::load("net4.json");
  StudyResult s = solve_enumerate(net);
  s.network = "net4";
  const json j = to_json(s, net);
  EXPECT_FALSE(j.dump().find("seconds") != std::string::npos);
  EXPECT_EQ(j["best"].get<int>(), 2);
  EXPECT_EQ(j["records"].size(), 3u);
  EXPECT_EQ(j["network"], "net4");
  EXPECT_TRUE(j["certificate"]["kkt"]["passed"].get<bool>());

  const json t = timings_json(s);
  EXPECT_EQ(t["phases"].size(), 3u);
  double total = 0.0;
  for (const auto& p : t["phases"]) total += p["seconds"].get<double>();
  EXPECT_NEAR(t["total_seconds"].get<double>(), total, 1e-12);
}

TEST(Report, TableListsEveryTopologyAndTheOptimum) {
  const Network net = testutil::load("net4.json");
  const StudyResult s = solve_enumerate(net);
  const std::string table = render_topology_table(s);
  EXPECT_NE(table.find("Topo. 1   [1, 1, 1, 0]"), std::string::npos);
  EXPECT_NE(table.find("Topo. 3   [1, 0, 1, 1]"), std::string::npos);
  EXPECT_NE(table.find("Opt.      Topo. 2"), std::string::npos);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 5);
}
