#include <gtest/gtest.h>

#include <limits>

#include "test_util.hpp"

using namespace dnr;

namespace {

struct Solved {
  AuxModel aux;
  SolveResult res;
  Multipliers mult;
};

Solved solve_tree(const Network& net, const Topology& t) {
  AuxModel aux(net, t);
  SolveResult res = solve(make_problem(aux, power_flow_oracle(net, t, net.nominal_loads())));
  Multipliers mult = multipliers_from(aux, res);
  return {std::move(aux), std::move(res), std::move(mult)};
}

/// One-variable program with linear inequalities a_i x <= 0 and objective x.
CallbackProgram linear_cone(Vec a) {
  NlpProblem p;
  p.dimension = 1;
  p.objective = [](const Vec& x) { return x[0]; };
  p.gradient = [](const Vec&) { return Vec::Ones(1); };
  p.equalities = [](const Vec&) { return Vec(); };
  p.equality_jacobian = [](const Vec&) { return Mat(0, 1); };
  p.inequalities = [a](const Vec& x) -> Vec { return a * x[0]; };
  p.inequality_jacobian = [a](const Vec&) -> Mat { return a; };
  p.hessian = [](const Vec&, double, const Vec&, const Vec&) { return Mat(Mat::Zero(1, 1)); };
  p.initial = Vec::Zero(1);
  return CallbackProgram(p);
}

}  // namespace

TEST(Kkt, LiftedMultipliersCertifyEveryTopology) {
  for (const char* name : {"net4.json", "net7.json"}) {
    const Network net = testutil::load(name);
    const DnrModel dnr(net);
    for (const Topology& t : enumerate_radial(net)) {
      const Solved s = solve_tree(net, t);
      ASSERT_EQ(s.res.status, SolveStatus::Optimal);
      const Multipliers lifted = lift_multipliers(s.aux, s.res.z, s.mult);
      const Vec z = embed(s.res.z, t);
      const KktReport k = check_kkt(dnr, z, lifted, 1e-6);
      EXPECT_TRUE(k.passed()) << name << " " << format_u(t.u) << "\n" << render(k);
      EXPECT_GE(lifted.mu.minCoeff(), 0.0);
      EXPECT_EQ(lifted.equality(label::kSwitchCount)[0], 0.0);
      EXPECT_EQ(lifted.inequality(label::kBusConnected).cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(Kkt, LiftedDropMultipliersAreComplementary) {
  const Network net = testutil::load("net7.json");
  const Topology t = enumerate_radial(net)[2];
  const Solved s = solve_tree(net, t);
  const Multipliers lifted = lift_multipliers(s.aux, s.res.z, s.mult);
  const auto lo = lifted.inequality(label::kDropLower);
  const auto up = lifted.inequality(label::kDropUpper);
  for (Index e = 0; e < net.num_lines(); ++e) {
    EXPECT_EQ(lo[e] * up[e], 0.0);
    if (!t.is_on(e)) {
      EXPECT_EQ(lo[e], 0.0);
      EXPECT_EQ(up[e], 0.0);
    }
  }
}

TEST(Kkt, LiftRejectsNonOptimalInput) {
  const Network net = testutil::load("net4.json");
  const Topology t = enumerate_radial(net)[0];
  const AuxModel aux(net, t);
  const Vec z = power_flow_oracle(net, t, net.nominal_loads());
  EXPECT_THROW(lift_multipliers(aux, z, Multipliers::zeros(aux.blocks())), NotOptimalInput);
}

TEST(Kkt, CorruptedMultipliersAreDetected) {
  const Network net = testutil::load("net4.json");
  const Topology t = enumerate_radial(net)[1];
  const Solved s = solve_tree(net, t);
  const DnrModel dnr(net);
  const Vec z = embed(s.res.z, t);
  const Multipliers good = lift_multipliers(s.aux, s.res.z, s.mult);

  Multipliers shifted = good;
  shifted.equality(label::kPBalance)[1] += 1e-3;
  EXPECT_FALSE(check_kkt(dnr, z, shifted, 1e-6).stationarity_ok);

  Multipliers negative = good;
  negative.inequality(label::kPFlowUpper)[0] = -1e-3;
  const KktReport k = check_kkt(dnr, z, negative, 1e-6);
  EXPECT_FALSE(k.dual_ok);
  EXPECT_FALSE(k.passed());

  // Weight on a slack row breaks complementarity (and stationarity).
  Multipliers slack = good;
  slack.inequality(label::kBusConnected)[1] = 1.0;  // bus 2 touches three on lines
  EXPECT_FALSE(check_kkt(dnr, z, slack, 1e-6).complementarity_ok);

  Multipliers wrong_size = good;
  wrong_size.mu.conservativeResize(3);
  EXPECT_THROW(check_kkt(dnr, z, wrong_size, 1e-6), DimensionMismatch);
}

TEST(Kkt, InfeasiblePointFailsPrimalChecks) {
  const Network net = testutil::load("net4.json");
  const DnrModel dnr(net);
  Vec z = Vec::Zero(dnr.dimension());
  const KktReport k = check_kkt(dnr, z, Multipliers::zeros(dnr.blocks()), 1e-6);
  EXPECT_FALSE(k.primal_equality_ok);
  EXPECT_FALSE(k.primal_inequality_ok);
}

TEST(Kkt, LicqAndMfcqFailAtSampledFeasiblePoints) {
  int points = 0;
  for (const char* name : {"net4.json", "net7.json"}) {
    const Network net = testutil::load(name);
    const auto samples = sample_feasible_points(net, 50, 1234);
    for (const SampledPoint& sp : samples) {
      const DnrModel dnr(net, sp.loads);
      EXPECT_LE(dnr.equalities(sp.z).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LE(dnr.inequalities(sp.z).maxCoeff(), 1e-10);
      const CqReport r = check_mfcq(dnr, sp.z);
      EXPECT_FALSE(r.licq_holds);
      EXPECT_LT(r.rank, r.rows);
      EXPECT_TRUE(r.has_switch_block);
      EXPECT_EQ(r.switch_block_rank, r.switch_block_rows - 1);
      EXPECT_LE(r.witness_norm, 1e-10);
      EXPECT_FALSE(r.mfcq_eq_rank_ok);
      EXPECT_FALSE(r.mfcq_holds);
      ++points;
    }
  }
  EXPECT_GE(points, 100);
}

TEST(Kkt, FixedTopologyLicqHoldsAtOptima) {
  const Network net = testutil::load("net7.json");
  for (const Topology& t : enumerate_radial(net)) {
    const Solved s = solve_tree(net, t);
    const CqReport r = check_mfcq(s.aux, s.res.z);
    EXPECT_TRUE(r.licq_holds) << format_u(t.u);
    EXPECT_TRUE(r.mfcq_holds) << format_u(t.u);
    EXPECT_FALSE(r.has_switch_block);
  }
}

TEST(Kkt, LeastSquaresRecoveryAgreesWithLift) {
  for (const char* name : {"net4.json", "net7.json"}) {
    const Network net = testutil::load(name);
    const DnrModel dnr(net);
    for (const Topology& t : enumerate_radial(net)) {
      const Solved s = solve_tree(net, t);
      const Vec z = embed(s.res.z, t);
      const LeastSquaresMultipliers ls = recover_multipliers_least_squares(dnr, z);
      EXPECT_LE(ls.residual, 1e-6) << name << " " << format_u(t.u);
      EXPECT_GE(ls.multipliers.mu.minCoeff(), 0.0);
      // The recovered multipliers are themselves a KKT certificate.
      EXPECT_TRUE(check_kkt(dnr, z, ls.multipliers, 1e-6).passed());
    }
  }
}

TEST(Kkt, TextbookMfcqWithoutLicq) {
  // -x <= 0 and -2x <= 0 at x = 0: dependent gradients, d = 1 strictly feasible.
  const CallbackProgram both_same_side = linear_cone((Vec(2) << -1.0, -2.0).finished());
  const CqReport a = check_mfcq(both_same_side, Vec::Zero(1));
  EXPECT_EQ(a.active.size(), 2u);
  EXPECT_FALSE(a.licq_holds);
  EXPECT_TRUE(a.mfcq_direction_found);
  EXPECT_TRUE(a.mfcq_holds);

  // x <= 0 and -x <= 0: no direction decreases both.
  const CallbackProgram opposite = linear_cone((Vec(2) << 1.0, -1.0).finished());
  const CqReport b = check_mfcq(opposite, Vec::Zero(1));
  EXPECT_FALSE(b.licq_holds);
  EXPECT_FALSE(b.mfcq_direction_found);
  EXPECT_FALSE(b.mfcq_holds);

  // Single active row: LICQ and MFCQ both hold.
  const CallbackProgram single = linear_cone(Vec::Constant(1, -1.0));
  const CqReport c = check_mfcq(single, Vec::Zero(1));
  EXPECT_TRUE(c.licq_holds);
  EXPECT_TRUE(c.mfcq_holds);
}

TEST(Kkt, CertifyBundlesAllChecks) {
  const Network net = testutil::load("net4.json");
  const Topology t = enumerate_radial(net)[1];
  const Solved s = solve_tree(net, t);
  const Certificate c = certify(s.aux, s.res.z, s.mult);
  EXPECT_TRUE(c.kkt.passed());
  EXPECT_FALSE(c.cq.licq_holds);
  EXPECT_FALSE(c.cq.mfcq_holds);
  EXPECT_TRUE(c.aux_cq.licq_holds);
  EXPECT_LE(c.nnls_residual, 1e-6);
  EXPECT_LE(c.feasibility, 1e-8);
  EXPECT_EQ(c.topology, t);
  EXPECT_NE(render(c.kkt).find("KKT conditions hold"), std::string::npos);
}
