#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "test_util.hpp"

using namespace dnr;

namespace {

Network make_graph(int buses, const std::vector<std::pair<int, int>>& edges) {
  std::vector<Bus> b;
  for (int i = 1; i <= buses; ++i) b.push_back({i, i == 1 ? 0.0 : 0.01, 0.0, 0.9, 1.1, i == 1});
  std::vector<Line> l;
  int id = 1;
  for (auto [f, t] : edges) {
    l.push_back({id, f, t, 0.01, 0.02, 1.0, 1.0});
    ++id;
  }
  return Network::create(b, l);
}

Network complete_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) e.emplace_back(i, j);
  return make_graph(n, e);
}

Network grid(int rows, int cols) {
  std::vector<std::pair<int, int>> e;
  auto id = [cols](int r, int c) { return r * cols + c + 1; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) e.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) e.emplace_back(id(r, c), id(r + 1, c));
    }
  return make_graph(rows * cols, e);
}

// Matrix-tree theorem: any cofactor of the graph Laplacian.
double kirchhoff_count(const Network& net) {
  const Index n = net.num_buses();
  Mat L = Mat::Zero(n, n);
  for (Index e = 0; e < net.num_lines(); ++e) {
    const Index a = net.from(e), b = net.to(e);
    L(a, a) += 1;
    L(b, b) += 1;
    L(a, b) -= 1;
    L(b, a) -= 1;
  }
  return L.bottomRightCorner(n - 1, n - 1).determinant();
}

}  // namespace

TEST(Topology, CountMatchesMatrixTreeTheorem) {
  const std::vector<Network> nets{testutil::load("net4.json"), testutil::load("net7.json"),
                                  complete_graph(5), grid(3, 3)};
  for (const Network& net : nets) {
    const auto trees = enumerate_radial(net);
    EXPECT_EQ(static_cast<double>(trees.size()), std::round(kirchhoff_count(net)));
    for (const auto& t : trees) EXPECT_TRUE(is_radial(net, t.u));
  }
  EXPECT_EQ(enumerate_radial(complete_graph(5)).size(), 125u);  // Cayley: 5^3
  EXPECT_EQ(enumerate_radial(grid(3, 3)).size(), 192u);
}

TEST(Topology, FourBusTreesInDescendingOrder) {
  const auto trees = enumerate_radial(testutil::load("net4.json"));
  ASSERT_EQ(trees.size(), 3u);
  EXPECT_EQ(trees[0].u, (std::vector<int>{1, 1, 1, 0}));
  EXPECT_EQ(trees[1].u, (std::vector<int>{1, 1, 0, 1}));
  EXPECT_EQ(trees[2].u, (std::vector<int>{1, 0, 1, 1}));
  EXPECT_EQ(trees[1].on_lines, (std::vector<int>{1, 2, 4}));
}

TEST(Topology, OrderIsStrictlyDescendingAndDistinct) {
  const auto trees = enumerate_radial(testutil::load("net7.json"));
  for (std::size_t k = 1; k < trees.size(); ++k)
    EXPECT_TRUE(std::lexicographical_compare(trees[k].u.begin(), trees[k].u.end(),
                                             trees[k - 1].u.begin(), trees[k - 1].u.end()));
}

TEST(Topology, TreeNetworkHasOneTopology) {
  const Network net = testutil::load("net2.json");
  const auto trees = enumerate_radial(net);
  ASSERT_EQ(trees.size(), 1u);
  EXPECT_EQ(trees[0].u, std::vector<int>{1});
}

TEST(Topology, CapIsEnforced) {
  const Network net = testutil::load("net4.json");
  EXPECT_THROW(enumerate_radial(net, 2), CapExceeded);
  try {
    enumerate_radial(net, 2);
  } catch (const CapExceeded& e) {
    EXPECT_GT(e.lower_bound(), 2);
  }
  EXPECT_EQ(enumerate_radial(net, 3).size(), 3u);
}

TEST(Topology, DegreeAndCountDoNotImplyRadial) {
  // Triangle 1-2-3 plus 4-5: every bus touched, 4 = |N|-1 lines on, disconnected.
  const Network net = make_graph(5, {{1, 2}, {2, 3}, {3, 1}, {4, 5}, {3, 4}});
  const std::vector<int> u{1, 1, 1, 1, 0};
  const RadialityChecks c = check_degree_count_radiality(net, u);
  EXPECT_TRUE(c.degree_ok);
  EXPECT_TRUE(c.count_ok);
  EXPECT_FALSE(is_radial(net, u));
  EXPECT_THROW(topology_of(net, u), NotRadial);
  EXPECT_TRUE(is_radial(net, {1, 1, 0, 1, 1}));
}

TEST(Topology, BridgesAreLinesInEveryTree) {
  const Network net = make_graph(5, {{1, 2}, {2, 3}, {3, 1}, {4, 5}, {3, 4}});
  EXPECT_EQ(bridge_lines(net), (std::vector<Index>{3, 4}));
  EXPECT_TRUE(bridge_lines(testutil::load("net4.json")) == std::vector<Index>{0});
  for (const auto& net2 : {testutil::load("net7.json"), testutil::load("net4.json")}) {
    const auto trees = enumerate_radial(net2);
    for (Index e = 0; e < net2.num_lines(); ++e) {
      const bool everywhere = std::all_of(trees.begin(), trees.end(),
                                          [e](const Topology& t) { return t.is_on(e); });
      const auto br = bridge_lines(net2);
      EXPECT_EQ(everywhere, std::find(br.begin(), br.end(), e) != br.end());
    }
  }
}

TEST(Topology, MaxWeightTreeMatchesBruteForce) {
  const Network net = testutil::load("net7.json");
  const auto trees = enumerate_radial(net);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> w01(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> w(static_cast<std::size_t>(net.num_lines()));
    for (double& x : w) x = w01(rng);
    auto weight = [&](const Topology& t) {
      double s = 0;
      for (Index e = 0; e < net.num_lines(); ++e) s += t.is_on(e) ? w[e] : 0.0;
      return s;
    };
    double best = -1;
    for (const auto& t : trees) best = std::max(best, weight(t));
    EXPECT_NEAR(weight(max_weight_spanning_tree(net, w)), best, 1e-12);
  }
}

TEST(Topology, FormattingAndLineIds) {
  const Network net = testutil::load("net4.json");
  EXPECT_EQ(format_u({1, 1, 0, 1}), "[1, 1, 0, 1]");
  const Topology t = topology_from_lines(net, {4, 1, 2});
  EXPECT_EQ(t.u, (std::vector<int>{1, 1, 0, 1}));
  EXPECT_EQ(u_of(net, t), t.u);
  EXPECT_THROW(topology_from_lines(net, {1, 2}), NotRadial);
  EXPECT_THROW(topology_from_lines(net, {1, 2, 9}), ValidationError);
  EXPECT_THROW(check_degree_count_radiality(net, {1, 1, 2, 0}), DimensionMismatch);
  EXPECT_THROW(check_degree_count_radiality(net, {1, 1}), DimensionMismatch);
}
