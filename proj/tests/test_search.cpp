#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace dnr;

TEST(Search, EnumerationOnFourBuses) {
  const Network net = testutil::load("net4.json");
  const StudyResult s = solve_enumerate(net);
  ASSERT_EQ(s.records.size(), 3u);
  ASSERT_TRUE(s.best.has_value());
  for (const TopologyRecord& r : s.records) {
    EXPECT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_TRUE(r.aux_kkt.passed());
    EXPECT_GE(s.records[*s.best].objective, s.best_objective);
    EXPECT_GE(r.objective, s.best_objective);
  }
  EXPECT_EQ(s.records[*s.best].index, 2);
  EXPECT_EQ(s.records[*s.best].topology.u, (std::vector<int>{1, 1, 0, 1}));
  ASSERT_TRUE(s.certificate.has_value());
  EXPECT_TRUE(s.certificate->kkt.passed());
  EXPECT_EQ(s.certificate->topology, s.records[*s.best].topology);
}

TEST(Search, TreeNetworkHasSingleRecord) {
  const Network net = testutil::load("net2.json");
  const StudyResult s = solve_enumerate(net);
  ASSERT_EQ(s.records.size(), 1u);
  EXPECT_EQ(*s.best, 0u);
  EXPECT_TRUE(s.certificate->kkt.passed());
}

TEST(Search, EnumerationIsIndependentOfThreadCount) {
  const Network net = testutil::load("net7.json");
  EnumerateOptions one, two;
  one.threads = 1;
  two.threads = 2;
  const StudyResult a = solve_enumerate(net, one);
  const StudyResult b = solve_enumerate(net, two);
  EXPECT_EQ(to_json(a, net).dump(), to_json(b, net).dump());
}

TEST(Search, CapExceededPropagates) {
  const Network net = testutil::load("net7.json");
  EnumerateOptions opt;
  opt.cap = 4;
  EXPECT_THROW(solve_enumerate(net, opt), CapExceeded);
}

TEST(Search, DirectSolveIsRadialAndNoBetterThanEnumeration) {
  for (const char* name : {"net4.json", "net7.json"}) {
    const Network net = testutil::load(name);
    const StudyResult e = solve_enumerate(net);
    const StudyResult d = solve_direct(net);
    ASSERT_TRUE(d.direct.has_value());
    const DirectRecord& r = *d.direct;
    EXPECT_TRUE(is_radial(net, r.rounded.u)) << name;
    EXPECT_EQ(r.polish_status, SolveStatus::Optimal);
    EXPECT_EQ(r.stages.size(), 4u);
    // Enumeration is exhaustive, so no radial topology beats its best.
    EXPECT_GE(r.polish_objective, e.best_objective - 1e-8) << name;
    ASSERT_TRUE(d.certificate.has_value());
    EXPECT_TRUE(d.certificate->kkt.passed()) << name;
    EXPECT_LE(d.certificate->feasibility, 1e-6);
    // The polished objective is one of the enumerated ones.
    bool found = false;
    for (const TopologyRecord& rec : e.records)
      if (rec.topology == r.rounded) {
        found = true;
        EXPECT_NEAR(rec.objective, r.polish_objective, 1e-8);
      }
    EXPECT_TRUE(found);
  }
}

TEST(Search, BridgesStayOnThroughoutTheRelaxation) {
  const Network net = testutil::load("net4.json");
  const StudyResult d = solve_direct(net);
  const auto bridges = bridge_lines(net);
  for (Index e : bridges) EXPECT_NEAR(d.direct->relaxed_u[e], 1.0, 1e-12);
}

TEST(Search, TimingsCoverEveryPhase) {
  const Network net = testutil::load("net4.json");
  const StudyResult e = solve_enumerate(net);
  ASSERT_EQ(e.timings.size(), 3u);
  EXPECT_EQ(e.timings[0].phase, "enumerate");
  const StudyResult d = solve_direct(net);
  std::vector<std::string> phases;
  for (const auto& t : d.timings) phases.push_back(t.phase);
  EXPECT_EQ(phases, (std::vector<std::string>{"relax", "round", "polish", "certificate"}));
}
