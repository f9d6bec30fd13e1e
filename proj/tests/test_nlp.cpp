#include <gtest/gtest.h>

#include <limits>

#include "test_util.hpp"

using namespace dnr;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// min 1/2 x^T Q x + c^T x  s.t.  A x = b,  G x <= g, unbounded box.
NlpProblem quadratic(Mat Q, Vec c, Mat A, Vec b, Mat G, Vec g, Vec x0) {
  NlpProblem p;
  p.dimension = x0.size();
  p.objective = [Q, c](const Vec& x) { return 0.5 * x.dot(Q * x) + c.dot(x); };
  p.gradient = [Q, c](const Vec& x) -> Vec { return Q * x + c; };
  p.equalities = [A, b](const Vec& x) -> Vec { return A * x - b; };
  p.equality_jacobian = [A](const Vec&) { return A; };
  p.inequalities = [G, g](const Vec& x) -> Vec { return G * x - g; };
  p.inequality_jacobian = [G](const Vec&) { return G; };
  p.hessian = [Q](const Vec&, double s, const Vec&, const Vec&) -> Mat { return s * Q; };
  p.lower = Vec::Constant(p.dimension, -kInf);
  p.upper = Vec::Constant(p.dimension, kInf);
  p.initial = std::move(x0);
  return p;
}

}  // namespace

TEST(Nlp, ScalarBoundConstraint) {
  // min x^2 s.t. 1 - x <= 0: x* = 1 and 2 x* - mu = 0, so mu = 2.
  NlpProblem p = quadratic(Mat::Constant(1, 1, 2.0), Vec::Zero(1), Mat(0, 1), Vec(0),
                           Mat::Constant(1, 1, -1.0), Vec::Constant(1, -1.0), Vec::Constant(1, 3.0));
  const SolveResult r = solve(p);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.z[0], 1.0, 1e-8);
  EXPECT_NEAR(r.mu[0], 2.0, 1e-7);
  EXPECT_NEAR(r.objective, 1.0, 1e-8);
}

TEST(Nlp, EqualityConstrainedQuadraticMatchesLinearSolve) {
  // min |x|^2 / 2 - c^T x s.t. A x = b; oracle from the KKT linear system.
  Mat A(2, 4);
  A << 1, 1, 1, 1, 1, -1, 2, 0;
  const Vec b = (Vec(2) << 1.0, 0.5).finished();
  const Vec c = (Vec(4) << 0.3, -0.2, 0.1, 0.7).finished();
  Mat K = Mat::Zero(6, 6);
  K.topLeftCorner(4, 4) = Mat::Identity(4, 4);
  K.topRightCorner(4, 2) = A.transpose();
  K.bottomLeftCorner(2, 4) = A;
  Vec rhs(6);
  rhs << c, b;
  const Vec sol = K.fullPivLu().solve(rhs);

  NlpProblem p = quadratic(Mat::Identity(4, 4), -c, A, b, Mat(0, 4), Vec(0), Vec::Zero(4));
  const SolveResult r = solve(p);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_LE((r.z - sol.head(4)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE((r.lambda - sol.tail(2)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Nlp, BoxBoundsAndFixedCoordinates) {
  // min (x0 - 2)^2 + (x1 + 1)^2 with 0 <= x0 <= 1 and x1 fixed at 0.5.
  NlpProblem p = quadratic(2.0 * Mat::Identity(2, 2), Vec((Vec(2) << -4.0, 2.0).finished()),
                           Mat(0, 2), Vec(0), Mat(0, 2), Vec(0), Vec::Zero(2));
  p.lower << 0.0, 0.5;
  p.upper << 1.0, 0.5;
  const SolveResult r = solve(p);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.z[0], 1.0, 1e-8);
  EXPECT_EQ(r.z[1], 0.5);
  EXPECT_NEAR(r.bound_upper[0], 2.0, 1e-7);  // 2 (x0 - 2) + nu = 0
}

TEST(Nlp, NonconvexEqualityConstraint) {
  // min x + y s.t. x^2 + y^2 = 2: optimum (-1, -1), lambda = 1/2.
  NlpProblem p;
  p.dimension = 2;
  p.objective = [](const Vec& x) { return x.sum(); };
  p.gradient = [](const Vec&) -> Vec { return Vec::Ones(2); };
  p.equalities = [](const Vec& x) { return Vec::Constant(1, x.squaredNorm() - 2.0); };
  p.equality_jacobian = [](const Vec& x) -> Mat { return 2.0 * x.transpose(); };
  p.inequalities = [](const Vec&) { return Vec(); };
  p.inequality_jacobian = [](const Vec&) { return Mat(0, 2); };
  p.hessian = [](const Vec&, double, const Vec& l, const Vec&) -> Mat {
    return 2.0 * l[0] * Mat::Identity(2, 2);
  };
  p.lower = Vec::Constant(2, -kInf);
  p.upper = Vec::Constant(2, kInf);
  p.initial = (Vec(2) << -0.5, -1.5).finished();
  const SolveResult r = solve(p);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.z[0], -1.0, 1e-7);
  EXPECT_NEAR(r.z[1], -1.0, 1e-7);
  EXPECT_NEAR(r.lambda[0], 0.5, 1e-7);
}

TEST(Nlp, ViolatedConstantRowIsInfeasible) {
  // The second inequality does not involve x and reads 1 <= 0.
  Mat G(2, 1);
  G << 1.0, 0.0;
  NlpProblem p = quadratic(Mat::Identity(1, 1), Vec::Zero(1), Mat(0, 1), Vec(0), G,
                           (Vec(2) << 5.0, -1.0).finished(), Vec::Zero(1));
  const SolveResult r = solve(p);
  EXPECT_EQ(r.status, SolveStatus::Infeasible);
}

TEST(Nlp, SatisfiedConstantRowGetsZeroMultiplier) {
  Mat G(2, 1);
  G << -1.0, 0.0;
  NlpProblem p = quadratic(Mat::Identity(1, 1), Vec::Zero(1), Mat(0, 1), Vec(0), G,
                           (Vec(2) << -1.0, 3.0).finished(), Vec::Constant(1, 2.0));
  const SolveResult r = solve(p);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.z[0], 1.0, 1e-8);
  EXPECT_NEAR(r.mu[0], 1.0, 1e-7);
  EXPECT_EQ(r.mu[1], 0.0);
}

TEST(Nlp, ContradictoryBoundsAreNotOptimal) {
  // x <= 0 and x >= 1.
  Mat G(2, 1);
  G << 1.0, -1.0;
  NlpProblem p = quadratic(Mat::Identity(1, 1), Vec::Zero(1), Mat(0, 1), Vec(0), G,
                           (Vec(2) << 0.0, -1.0).finished(), Vec::Constant(1, 0.5));
  const SolveResult r = solve(p);
  EXPECT_NE(r.status, SolveStatus::Optimal);
  EXPECT_GT(r.residuals.feasibility, 1e-3);
}

TEST(Nlp, OppositePairBecomesEqualityWithSignedSplit) {
  // x0 + x1 - 1 <= 0 and 1 - x0 - x1 <= 0 force x0 + x1 = 1.
  // min (x0 - 2)^2 + (x1 - 2)^2 then pushes against the first row: mu_a = 3.
  Mat G(2, 2);
  G << 1, 1, -1, -1;
  NlpProblem p = quadratic(2.0 * Mat::Identity(2, 2), Vec::Constant(2, -4.0), Mat(0, 2), Vec(0), G,
                           (Vec(2) << 1.0, -1.0).finished(), Vec::Zero(2));
  SolveResult r = solve(p);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.z[0], 0.5, 1e-8);
  EXPECT_NEAR(r.mu[0], 3.0, 1e-7);
  EXPECT_EQ(r.mu[1], 0.0);

  // Pulling the other way moves the multiplier to the second row.
  p = quadratic(2.0 * Mat::Identity(2, 2), Vec::Constant(2, 4.0), Mat(0, 2), Vec(0), G,
                (Vec(2) << 1.0, -1.0).finished(), Vec::Zero(2));
  r = solve(p);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_EQ(r.mu[0], 0.0);
  EXPECT_NEAR(r.mu[1], 5.0, 1e-7);
}

TEST(Nlp, FixedTopologyProgramConvergesToFeasibleKktPoint) {
  const Network net = testutil::load("net7.json");
  for (const Topology& t : enumerate_radial(net)) {
    const AuxModel aux(net, t);
    const SolveResult r = solve(make_problem(aux, power_flow_oracle(net, t, net.nominal_loads())));
    ASSERT_EQ(r.status, SolveStatus::Optimal) << format_u(t.u);
    const KktReport k = check_kkt(aux, r.z, multipliers_from(aux, r), 1e-7);
    EXPECT_TRUE(k.passed()) << format_u(t.u);
    EXPECT_GE(r.mu.minCoeff(), 0.0);
  }
}

TEST(Nlp, IterationLogIsFilledWhenVerbose) {
  NlpProblem p = quadratic(Mat::Constant(1, 1, 2.0), Vec::Zero(1), Mat(0, 1), Vec(0),
                           Mat::Constant(1, 1, -1.0), Vec::Constant(1, -1.0), Vec::Constant(1, 3.0));
  SolverOptions opt;
  opt.verbosity = 1;
  std::ostringstream log;
  opt.log = &log;
  const SolveResult r = solve(p, opt);
  EXPECT_FALSE(r.log.empty());
  EXPECT_FALSE(log.str().empty());
}
