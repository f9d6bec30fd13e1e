#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

using namespace dnr;

TEST(AuxModel, DimensionsAndBlocks) {
  const Network net = testutil::load("net7.json");
  const Topology t = enumerate_radial(net).front();
  const AuxModel m(net, t);
  EXPECT_EQ(m.dimension(), 3 * 7 + 3 * 8);
  EXPECT_EQ(m.on_lines().size(), 6u);
  EXPECT_EQ(m.off_lines().size(), 2u);
  EXPECT_EQ(m.blocks().equality(label::kDropEquality).size, 6);
  EXPECT_EQ(m.blocks().equality(label::kOpenPFlow).size, 2);
  EXPECT_EQ(m.num_inequalities(), 4 * 6 + 2 * 7);
  EXPECT_FALSE(m.blocks().has_equality(label::kSwitchCount));
  EXPECT_THROW(AuxModel(net, Topology{{}, std::vector<int>(8, 1)}), NotRadial);
  EXPECT_THROW(AuxModel(net, Topology{{}, {1, 1}}), DimensionMismatch);
}

TEST(AuxModel, JacobiansMatchFiniteDifferences) {
  std::mt19937_64 rng(13);
  for (const char* name : {"net4.json", "net7.json"}) {
    const Network net = testutil::load(name);
    const auto trees = enumerate_radial(net);
    for (int k = 0; k < 50; ++k) {
      const AuxModel m(net, trees[static_cast<std::size_t>(k) % trees.size()]);
      const Vec z = testutil::random_point(net, m.layout(), rng);
      auto g = [&](const Vec& x) { return m.equalities(x); };
      auto h = [&](const Vec& x) { return m.inequalities(x); };
      auto f = [&](const Vec& x) { return Vec::Constant(1, m.objective(x)); };
      EXPECT_LE(testutil::rel_err(m.equality_jacobian(z), testutil::fd_jacobian(g, z)), 1e-6);
      EXPECT_LE(testutil::rel_err(m.inequality_jacobian(z), testutil::fd_jacobian(h, z)), 1e-6);
      EXPECT_LE(testutil::rel_err(m.objective_gradient(z).transpose(), testutil::fd_jacobian(f, z)),
                1e-6);
    }
  }
}

TEST(AuxModel, LagrangianHessianMatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  const Network net = testutil::load("net7.json");
  const AuxModel m(net, enumerate_radial(net)[3]);
  for (int k = 0; k < 20; ++k) {
    const Vec z = testutil::random_point(net, m.layout(), rng);
    Vec lambda(m.num_equalities()), mu(m.num_inequalities());
    for (Index i = 0; i < lambda.size(); ++i) lambda[i] = normal(rng);
    for (Index i = 0; i < mu.size(); ++i) mu[i] = std::abs(normal(rng));
    auto grad_l = [&](const Vec& x) -> Vec {
      return m.objective_gradient(x) + m.equality_jacobian(x).transpose() * lambda +
             m.inequality_jacobian(x).transpose() * mu;
    };
    EXPECT_LE(testutil::rel_err(m.lagrangian_hessian(z, 1.0, lambda, mu),
                                testutil::fd_jacobian(grad_l, z)),
              1e-6);
  }
}

TEST(AuxModel, DropEqualityMirrorsSwitchedDropRows) {
  // On an on line the two switched drop rows of the full model are +/- the
  // drop equality of the fixed-topology model.
  std::mt19937_64 rng(3);
  const Network net = testutil::load("net7.json");
  const Topology t = enumerate_radial(net)[5];
  const AuxModel aux(net, t);
  const DnrModel full(net);
  const Vec za = testutil::random_point(net, aux.layout(), rng);
  const Vec z = embed(za, t);
  const Vec g = aux.equalities(za);
  const Vec h = full.inequalities(z);
  const RowBlock& de = aux.blocks().equality(label::kDropEquality);
  const RowBlock& dl = full.blocks().inequality(label::kDropLower);
  const RowBlock& du = full.blocks().inequality(label::kDropUpper);
  for (std::size_t k = 0; k < aux.on_lines().size(); ++k) {
    const Index e = aux.on_lines()[k];
    EXPECT_NEAR(h[dl.begin + e], g[de.begin + static_cast<Index>(k)], 1e-14);
    EXPECT_NEAR(h[du.begin + e], -g[de.begin + static_cast<Index>(k)], 1e-14);
  }
}

TEST(AuxModel, EmbedAndRestrictAreInverse) {
  std::mt19937_64 rng(4);
  const Network net = testutil::load("net4.json");
  const Topology t = enumerate_radial(net)[1];
  const AuxModel aux(net, t);
  const Vec za = testutil::random_point(net, aux.layout(), rng);
  const Vec z = embed(za, t);
  EXPECT_EQ(z.size(), 3 * 4 + 4 * 4);
  EXPECT_EQ(restrict_point(z, net.num_lines()), za);
  EXPECT_EQ(line_states(z, net.num_lines()), t.u);
  EXPECT_THROW(embed(Vec::Zero(7), t), DimensionMismatch);
}

TEST(AuxModel, LoadSensitivityIsMinusIdentity) {
  // Balance rows read injection - flows; injection = generation - load.
  const Network net = testutil::load("net4.json");
  const AuxModel aux(net, enumerate_radial(net)[0]);
  const Vec z = power_flow_oracle(net, aux.topology(), net.nominal_loads());
  const Mat S = aux.load_sensitivity(z);
  EXPECT_LE((S + Mat::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-12);
}
