#pragma once

// Primal-dual interior-point method for
//
//   min f(z)  s.t.  g(z) = 0,  h(z) <= 0,  lower <= z <= upper,
//
// with slack variables for h, a monotone barrier schedule, a filter line
// search, inertia-corrected Newton steps and an optional active-set polish of
// the final iterate. Coordinates with lower == upper are held fixed; rows that
// do not depend on the free coordinates are set aside, and opposite inequality
// pairs become equalities.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dnr/error.hpp"
#include "dnr/network.hpp"
#include "dnr/symmetric_solver.hpp"

namespace dnr {

enum class SolveStatus { Optimal, Infeasible, MaxIter, NumericalFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

struct SolverOptions {
  int max_iter = 200;
  double tol_stat = 1e-8;
  double tol_feas = 1e-8;
  double tol_comp = 1e-8;
  double tau = 0.995;             // fraction to the boundary
  double barrier_init = 0.1;
  double barrier_factor = 0.2;
  double reg_min = 1e-8;          // dual regularization on singular KKT systems
  double reg_max = 1e-2;
  double slack_min = 1e-2;
  bool polish = true;
  int verbosity = 0;
  std::ostream* log = nullptr;
};

/// One line of the iteration log.
struct IterationRecord {
  int iter = 0;
  double barrier = 0.0;
  double alpha_primal = 0.0;
  double alpha_dual = 0.0;
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
  double reg_primal = 0.0;
  double reg_dual = 0.0;
};

struct KktResiduals {
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vec z;
  Vec lambda;       // equality multipliers
  Vec mu;           // inequality multipliers, >= 0
  Vec bound_lower;  // multipliers of lower <= z, full dimension
  Vec bound_upper;
  double objective = 0.0;
  int iterations = 0;
  bool polished = false;
  KktResiduals residuals;
  std::vector<IterationRecord> log;
};

struct NlpProblem {
  Index dimension = 0;
  std::function<double(const Vec&)> objective;
  std::function<Vec(const Vec&)> gradient;
  std::function<Vec(const Vec&)> equalities;
  std::function<Mat(const Vec&)> equality_jacobian;
  std::function<Vec(const Vec&)> inequalities;
  std::function<Mat(const Vec&)> inequality_jacobian;
  /// sigma * Hess f + sum lambda_i Hess g_i + sum mu_j Hess h_j
  std::function<Mat(const Vec&, double, const Vec&, const Vec&)> hessian;
  Vec lower;
  Vec upper;
  Vec initial;
};

/// Wraps a model exposing the evaluation interface of DnrModel / AuxModel.
/// The model must outlive the problem.
template <class Model>
NlpProblem make_problem(const Model& model, Vec initial) {
  NlpProblem p;
  p.dimension = model.dimension();
  p.objective = [&model](const Vec& z) { return model.objective(z); };
  p.gradient = [&model](const Vec& z) { return model.objective_gradient(z); };
  p.equalities = [&model](const Vec& z) { return model.equalities(z); };
  p.equality_jacobian = [&model](const Vec& z) { return model.equality_jacobian(z); };
  p.inequalities = [&model](const Vec& z) { return model.inequalities(z); };
  p.inequality_jacobian = [&model](const Vec& z) { return model.inequality_jacobian(z); };
  p.hessian = [&model](const Vec& z, double s, const Vec& l, const Vec& m) {
    return model.lagrangian_hessian(z, s, l, m);
  };
  p.lower = model.lower_bounds();
  p.upper = model.upper_bounds();
  model.fill_fixed(initial);
  p.initial = std::move(initial);
  return p;
}

namespace detail {

/// Problem restricted to the free coordinates, with finite bounds appended to
/// the inequality rows. Rows that do not depend on any free coordinate are
/// constant; they are set aside (zero multiplier) and only checked for
/// feasibility.
class ReducedProblem {
 public:
  explicit ReducedProblem(const NlpProblem& p) : p_(p) {
    if (p.lower.size() != p.dimension || p.upper.size() != p.dimension ||
        p.initial.size() != p.dimension)
      throw DimensionMismatch("bounds or initial point do not match the problem dimension");
    base_ = p.initial;
    for (Index i = 0; i < p.dimension; ++i) {
      if (p.lower[i] > p.upper[i]) throw DimensionMismatch("lower bound above upper bound");
      if (p.lower[i] == p.upper[i]) {
        base_[i] = p.lower[i];
        continue;
      }
      const Index k = static_cast<Index>(free_.size());
      free_.push_back(i);
      if (std::isfinite(p.upper[i])) upper_rows_.push_back({k, i});
      if (std::isfinite(p.lower[i])) lower_rows_.push_back({k, i});
    }
    // Constant rows: zero gradient over the free coordinates at two distinct
    // points and unchanged value between them.
    Vec z1 = base_;
    for (std::size_t k = 0; k < free_.size(); ++k)
      z1[free_[k]] += (k % 2 ? 1e-3 : -1e-3) * (1.0 + std::abs(base_[free_[k]]));
    const Vec g0 = p.equalities(base_), g1 = p.equalities(z1);
    const Vec h0 = p.inequalities(base_), h1 = p.inequalities(z1);
    const Mat je0 = columns(p.equality_jacobian(base_)), je1 = columns(p.equality_jacobian(z1));
    const Mat ji0 = columns(p.inequality_jacobian(base_)), ji1 = columns(p.inequality_jacobian(z1));
    auto constant = [](const Mat& a, const Mat& b, const Vec& v0, const Vec& v1, Index i) {
      return a.row(i).cwiseAbs().maxCoeff() == 0.0 && b.row(i).cwiseAbs().maxCoeff() == 0.0 &&
             std::abs(v0[i] - v1[i]) <= 1e-14 * (1.0 + std::abs(v0[i]));
    };
    for (Index i = 0; i < g0.size(); ++i) {
      if (je0.cols() > 0 && constant(je0, je1, g0, g1, i))
        constant_violation_ = std::max(constant_violation_, std::abs(g0[i]));
      else
        eq_rows_.push_back(i);
    }
    std::vector<Index> candidates;
    for (Index i = 0; i < h0.size(); ++i) {
      if (ji0.cols() > 0 && constant(ji0, ji1, h0, h1, i))
        constant_violation_ = std::max(constant_violation_, h0[i]);
      else
        candidates.push_back(i);
    }
    // Opposite pairs (h_a = -h_b identically) enclose no interior; each pair
    // becomes one equality row h_a = 0.
    std::vector<char> paired(static_cast<std::size_t>(h0.size()), 0);
    auto opposite = [](const Mat& J, const Vec& h, Index a, Index b) {
      const double scale = 1.0 + J.row(a).cwiseAbs().maxCoeff() + std::abs(h[a]);
      return (J.row(a) + J.row(b)).cwiseAbs().maxCoeff() <= 1e-14 * scale &&
             std::abs(h[a] + h[b]) <= 1e-14 * scale;
    };
    for (std::size_t ka = 0; ka < candidates.size(); ++ka) {
      const Index a = candidates[ka];
      if (paired[a]) continue;
      for (std::size_t kb = ka + 1; kb < candidates.size(); ++kb) {
        const Index b = candidates[kb];
        if (paired[b] || !opposite(ji0, h0, a, b) || !opposite(ji1, h1, a, b)) continue;
        paired[a] = paired[b] = 1;
        pairs_.push_back({a, b});
        break;
      }
    }
    for (Index i : candidates)
      if (!paired[i]) ineq_rows_.push_back(i);
    m_eq_full_ = g0.size();
    m_problem_full_ = h0.size();
  }

  Index n() const { return static_cast<Index>(free_.size()); }
  Index m_eq() const { return static_cast<Index>(eq_rows_.size() + pairs_.size()); }
  Index m_problem() const { return static_cast<Index>(ineq_rows_.size()); }
  Index m_ineq() const {
    return m_problem() + static_cast<Index>(upper_rows_.size() + lower_rows_.size());
  }
  const std::vector<Index>& free() const { return free_; }
  /// Largest violation among constant rows (they cannot be repaired).
  double constant_violation() const { return constant_violation_; }

  Vec full(const Vec& x) const {
    Vec z = base_;
    for (Index k = 0; k < n(); ++k) z[free_[k]] = x[k];
    return z;
  }
  Vec reduce(const Vec& z) const {
    Vec x(n());
    for (Index k = 0; k < n(); ++k) x[k] = z[free_[k]];
    return x;
  }

  double f(const Vec& z) const { return p_.objective(z); }
  Vec grad(const Vec& z) const { return reduce(p_.gradient(z)); }
  Vec ceq(const Vec& z) const {
    Vec c(m_eq());
    c.head(static_cast<Index>(eq_rows_.size())) = pick(p_.equalities(z), eq_rows_);
    if (!pairs_.empty()) {
      const Vec h = p_.inequalities(z);
      Index r = static_cast<Index>(eq_rows_.size());
      for (auto [a, b] : pairs_) c[r++] = h[a];
    }
    return c;
  }
  Mat jeq(const Vec& z) const {
    Mat J(m_eq(), n());
    J.topRows(static_cast<Index>(eq_rows_.size())) =
        pick_rows(columns(p_.equality_jacobian(z)), eq_rows_);
    if (!pairs_.empty()) {
      const Mat Ji = columns(p_.inequality_jacobian(z));
      Index r = static_cast<Index>(eq_rows_.size());
      for (auto [a, b] : pairs_) J.row(r++) = Ji.row(a);
    }
    return J;
  }

  Vec cin(const Vec& z) const {
    Vec c(m_ineq());
    c.head(m_problem()) = pick(p_.inequalities(z), ineq_rows_);
    Index r = m_problem();
    for (auto [k, i] : upper_rows_) c[r++] = z[i] - p_.upper[i];
    for (auto [k, i] : lower_rows_) c[r++] = p_.lower[i] - z[i];
    return c;
  }
  Mat jin(const Vec& z) const {
    Mat J = Mat::Zero(m_ineq(), n());
    J.topRows(m_problem()) = pick_rows(columns(p_.inequality_jacobian(z)), ineq_rows_);
    Index r = m_problem();
    for (auto [k, i] : upper_rows_) J(r++, k) = 1.0;
    for (auto [k, i] : lower_rows_) J(r++, k) = -1.0;
    return J;
  }
  Mat hess(const Vec& z, const Vec& lambda, const Vec& mu) const {
    // A signed multiplier on the first row of each pair carries its curvature.
    Vec mu_full = expand_ineq(mu, Vec::Zero(m_eq()));
    Index r = static_cast<Index>(eq_rows_.size());
    for (auto [a, b] : pairs_) mu_full[a] = lambda[r++];
    const Mat H = p_.hessian(z, 1.0, expand_eq(lambda), mu_full);
    Mat Hr(n(), n());
    for (Index a = 0; a < n(); ++a)
      for (Index b = 0; b < n(); ++b) Hr(a, b) = H(free_[a], free_[b]);
    return Hr;
  }

  /// Multipliers in the problem's own row numbering (zero on constant rows).
  Vec expand_eq(const Vec& lambda) const {
    Vec out = Vec::Zero(m_eq_full_);
    for (std::size_t k = 0; k < eq_rows_.size(); ++k) out[eq_rows_[k]] = lambda[static_cast<Index>(k)];
    return out;
  }
  /// Inequality multipliers in the problem's numbering; paired rows take the
  /// positive or negative part of their equality multiplier.
  Vec expand_ineq(const Vec& mu, const Vec& lambda) const {
    Vec out = Vec::Zero(m_problem_full_);
    for (std::size_t k = 0; k < ineq_rows_.size(); ++k) out[ineq_rows_[k]] = mu[static_cast<Index>(k)];
    Index r = static_cast<Index>(eq_rows_.size());
    for (auto [a, b] : pairs_) {
      const double l = lambda[r++];
      out[a] = std::max(l, 0.0);
      out[b] = std::max(-l, 0.0);
    }
    return out;
  }

  void split_bounds(const Vec& mu, Vec& lower, Vec& upper) const {
    lower = Vec::Zero(p_.dimension);
    upper = Vec::Zero(p_.dimension);
    Index r = m_problem();
    for (auto [k, i] : upper_rows_) upper[i] = mu[r++];
    for (auto [k, i] : lower_rows_) lower[i] = mu[r++];
  }

  /// Initial free point pushed strictly inside finite bounds.
  Vec interior_start() const {
    Vec x = reduce(p_.initial);
    for (Index k = 0; k < n(); ++k) {
      const Index i = free_[k];
      const double lo = p_.lower[i];
      const double hi = p_.upper[i];
      double push_lo = 1e-2 * std::max(1.0, std::abs(lo));
      double push_hi = 1e-2 * std::max(1.0, std::abs(hi));
      if (std::isfinite(lo) && std::isfinite(hi)) {
        push_lo = std::min(push_lo, 0.25 * (hi - lo));
        push_hi = std::min(push_hi, 0.25 * (hi - lo));
      }
      if (std::isfinite(lo)) x[k] = std::max(x[k], lo + push_lo);
      if (std::isfinite(hi)) x[k] = std::min(x[k], hi - push_hi);
    }
    return x;
  }

 private:
  Mat columns(const Mat& J) const {
    Mat Jr(J.rows(), n());
    for (Index k = 0; k < n(); ++k) Jr.col(k) = J.col(free_[k]);
    return Jr;
  }
  static Vec pick(const Vec& v, const std::vector<Index>& rows) {
    Vec out(static_cast<Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) out[static_cast<Index>(k)] = v[rows[k]];
    return out;
  }
  static Mat pick_rows(const Mat& J, const std::vector<Index>& rows) {
    Mat out(static_cast<Index>(rows.size()), J.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = J.row(rows[k]);
    return out;
  }

  const NlpProblem& p_;
  Vec base_;
  std::vector<Index> free_;
  std::vector<std::pair<Index, Index>> upper_rows_;
  std::vector<std::pair<Index, Index>> lower_rows_;
  std::vector<Index> eq_rows_;
  std::vector<Index> ineq_rows_;
  std::vector<std::pair<Index, Index>> pairs_;
  Index m_eq_full_ = 0;
  Index m_problem_full_ = 0;
  double constant_violation_ = 0.0;
};

inline double inf_norm(const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

inline KktResiduals residuals(const Vec& grad, const Mat& je, const Mat& ji, const Vec& ce,
                              const Vec& ci, const Vec& lambda, const Vec& mu) {
  KktResiduals r;
  Vec stat = grad;
  if (je.rows()) stat += je.transpose() * lambda;
  if (ji.rows()) stat += ji.transpose() * mu;
  r.stationarity = inf_norm(stat);
  double feas = inf_norm(ce);
  for (Index i = 0; i < ci.size(); ++i) feas = std::max(feas, ci[i]);
  r.feasibility = feas;
  double comp = 0.0;
  for (Index i = 0; i < ci.size(); ++i) comp = std::max(comp, std::abs(mu[i] * ci[i]));
  for (Index i = 0; i < mu.size(); ++i) comp = std::max(comp, -mu[i]);
  r.complementarity = comp;
  return r;
}

}  // namespace detail

/// Solves the problem from problem.initial. Never throws for numerical
/// trouble; the status reports it. Callback exceptions surface as CallbackError.
inline SolveResult solve(const NlpProblem& problem, const SolverOptions& opt = {}) {
  using detail::inf_norm;
  const detail::ReducedProblem rp(problem);
  const Index n = rp.n();
  const Index me = rp.m_eq();
  const Index mi = rp.m_ineq();

  SolveResult result;
  auto finish_eval_error = [&](const std::exception& e) -> SolveResult {
    throw CallbackError(std::string("callback failed: ") + e.what());
  };

  Vec x = rp.interior_start();
  Vec z = rp.full(x);
  Vec ci;
  try {
    ci = rp.cin(z);
  } catch (const std::exception& e) {
    return finish_eval_error(e);
  }
  Vec s = (-ci).cwiseMax(opt.slack_min);
  double barrier = opt.barrier_init;
  const double barrier_min = std::min({opt.tol_comp, opt.tol_stat}) * 1e-2;
  Vec mu = (barrier * s.cwiseInverse()).eval();
  Vec lambda = Vec::Zero(me);
  if (me > 0) {
    const Mat je = rp.jeq(z);
    const Vec rhs = -(rp.grad(z) + rp.jin(z).transpose() * mu);
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(je.transpose());
    lambda = cod.solve(rhs);
    if (!lambda.allFinite() || inf_norm(lambda) > 1e3) lambda.setZero();
  }

  double reg_last = 0.0;
  int line_search_failures = 0;
  SymmetricIndefiniteSolver kkt;

  // Filter line search on (constraint violation, barrier objective).
  struct FilterEntry {
    double theta, phi;
  };
  std::vector<FilterEntry> filter;
  auto violation = [&](const Vec& zz, const Vec& ss) {
    double t = rp.ceq(zz).lpNorm<1>();
    if (mi) t += (rp.cin(zz) + ss).lpNorm<1>();
    return t;
  };
  auto barrier_objective = [&](const Vec& zz, const Vec& ss) {
    for (Index i = 0; i < ss.size(); ++i)
      if (!(ss[i] > 0.0)) return std::numeric_limits<double>::infinity();
    return rp.f(zz) - barrier * ss.array().log().sum();
  };
  double theta_max = 0.0;
  double theta_min = 0.0;
  {
    const Vec s0 = s;
    const double t0 = violation(z, s0);
    theta_max = 1e4 * std::max(1.0, t0);
    theta_min = 1e-4 * std::max(1.0, t0);
  }

  // Best iterate seen, returned when the run ends without convergence.
  struct Snapshot {
    double error = std::numeric_limits<double>::infinity();
    Vec x, s, lambda, mu;
  } best;

  int iter = 0;
  for (; iter < opt.max_iter; ++iter) {
    Vec grad, ce;
    Mat je, ji;
    try {
      grad = rp.grad(z);
      ce = rp.ceq(z);
      je = rp.jeq(z);
      ci = rp.cin(z);
      ji = rp.jin(z);
    } catch (const std::exception& e) {
      return finish_eval_error(e);
    }

    const KktResiduals res = detail::residuals(grad, je, ji, ce, ci, lambda, mu);
    if (res.stationarity <= opt.tol_stat && res.feasibility <= opt.tol_feas &&
        res.complementarity <= opt.tol_comp) {
      result.status = SolveStatus::Optimal;
      break;
    }
    const double error = std::max({res.stationarity / opt.tol_stat, res.feasibility / opt.tol_feas,
                                   res.complementarity / opt.tol_comp});
    if (error < best.error) best = {error, x, s, lambda, mu};

    // Barrier subproblem error; tighten the barrier when it is solved well enough.
    auto barrier_error = [&](double b) {
      Vec rd = grad;
      if (me) rd += je.transpose() * lambda;
      if (mi) rd += ji.transpose() * mu;
      const Vec sm = s.cwiseProduct(mu).array() - b;
      return std::max({inf_norm(rd), inf_norm(ce), inf_norm(ci + s), inf_norm(sm)});
    };
    while (barrier > barrier_min && barrier_error(barrier) <= 10.0 * barrier) {
      barrier = std::max(barrier_min, opt.barrier_factor * barrier);
      filter.clear();
    }

    Mat W;
    try {
      W = rp.hess(z, lambda, mu);
    } catch (const std::exception& e) {
      return finish_eval_error(e);
    }
    const Vec sigma = mu.cwiseQuotient(s);
    Mat A = W;
    if (mi) A.noalias() += ji.transpose() * sigma.asDiagonal() * ji;
    Vec rd = grad;
    if (me) rd += je.transpose() * lambda;
    if (mi) rd += ji.transpose() * mu;
    Vec rhs_x = -rd;
    if (mi) {
      const Vec t = (barrier * s.cwiseInverse() - mu + sigma.cwiseProduct(ci + s)).eval();
      rhs_x -= ji.transpose() * t;
    }

    Mat K(n + me, n + me);
    Vec rhs(n + me);
    rhs.head(n) = rhs_x;
    rhs.tail(me) = -ce;
    double reg_w = 0.0;
    double reg_c = 0.0;
    auto assemble_and_factor = [&]() {
      K.setZero();
      K.topLeftCorner(n, n) = A;
      K.topLeftCorner(n, n).diagonal().array() += reg_w;
      if (me) {
        K.bottomLeftCorner(me, n) = je;
        K.topRightCorner(n, me) = je.transpose();
        K.bottomRightCorner(me, me).diagonal().array() = -reg_c;
      }
      kkt.factorize(K);
      const Inertia& in = kkt.inertia();
      return in.positive == n && in.negative == me && in.zero == 0;
    };
    bool good = assemble_and_factor();
    if (!good && kkt.inertia().zero > 0) {
      reg_c = opt.reg_min;
      good = assemble_and_factor();
    }
    if (!good) {
      reg_w = reg_last == 0.0 ? 1e-4 : std::max(1e-20, reg_last / 3.0);
      for (;;) {
        good = assemble_and_factor();
        if (good) break;
        if (kkt.inertia().zero > 0 && reg_c < opt.reg_max)
          reg_c = reg_c == 0.0 ? opt.reg_min : std::min(opt.reg_max, reg_c * 10.0);
        reg_w *= reg_last == 0.0 ? 100.0 : 8.0;
        if (reg_w > 1e40) break;
      }
      if (!good) {
        result.status = SolveStatus::NumericalFailure;
        break;
      }
      reg_last = reg_w;
    }

    const Vec sol = kkt.solve(rhs);
    if (!sol.allFinite()) {
      result.status = SolveStatus::NumericalFailure;
      break;
    }
    const Vec dx = sol.head(n);
    const Vec dl = sol.tail(me);
    Vec ds(mi), dmu(mi);
    if (mi) {
      ds = -(ci + s) - ji * dx;
      dmu = barrier * s.cwiseInverse() - mu - sigma.cwiseProduct(ds);
    }

    auto max_step = [&](const Vec& v, const Vec& dv) {
      double a = 1.0;
      for (Index i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0) a = std::min(a, -opt.tau * v[i] / dv[i]);
      return a;
    };
    const double alpha_p_max = max_step(s, ds);
    const double alpha_d = max_step(mu, dmu);

    double dphi = grad.dot(dx);
    if (mi) dphi -= barrier * ds.cwiseQuotient(s).sum();
    const double theta = violation(z, s);
    const double phi = barrier_objective(z, s);
    constexpr double kGammaTheta = 1e-5, kGammaPhi = 1e-5, kEta = 1e-4;
    constexpr double kSwitchPhi = 2.3, kSwitchTheta = 1.1;
    double alpha = alpha_p_max;
    bool accepted = false;
    bool phi_type = false;
    // Slacks are raised to the trial constraint values when that helps; this
    // lowers both the violation and the barrier objective.
    auto reset_slacks = [&](const Vec& zt, Vec& st) {
      if (!mi) return;
      const Vec ct = rp.cin(zt);
      for (Index i = 0; i < mi; ++i) st[i] = std::max(st[i], -ct[i]);
    };
    auto acceptable = [&](double t, double f) {
      if (!std::isfinite(f) || !std::isfinite(t) || t > theta_max) return false;
      for (const FilterEntry& e : filter)
        if (t >= e.theta && f >= e.phi) return false;
      return true;
    };
    // Returns 0 when rejected, 1 for a violation-reducing step, 2 for an
    // objective (Armijo) step.
    auto try_step = [&](const Vec& sx, const Vec& ss, double a) -> int {
      const Vec zt = rp.full(x + a * sx);
      Vec st = s + a * ss;
      double t = 0.0, f = 0.0;
      try {
        reset_slacks(zt, st);
        t = violation(zt, st);
        f = barrier_objective(zt, st);
      } catch (const std::exception&) {
        return 0;
      }
      if (!acceptable(t, f)) return 0;
      const bool switching =
          dphi < 0.0 && a * std::pow(-dphi, kSwitchPhi) > std::pow(theta, kSwitchTheta);
      if (switching && theta <= theta_min)
        return f <= phi + kEta * a * dphi + 1e-14 * std::abs(phi) ? 2 : 0;
      if (t <= (1.0 - kGammaTheta) * theta || f <= phi - kGammaPhi * theta) return 1;
      return 0;
    };
    for (int k = 0; k < 60; ++k) {
      const int kind = try_step(dx, ds, alpha);
      if (kind) {
        accepted = true;
        phi_type = kind == 2;
        break;
      }
      alpha *= 0.5;
      if (alpha < 1e-12) break;
    }
    if (accepted && !phi_type)
      filter.push_back({(1.0 - kGammaTheta) * theta, phi - kGammaPhi * theta});
    if (!accepted) {
      // No restoration phase: take a short step and forget the filter.
      ++line_search_failures;
      alpha = std::min(alpha_p_max, 1e-2);
      filter.clear();
      if (line_search_failures >= 8) {
        result.status = res.feasibility > opt.tol_feas ? SolveStatus::Infeasible
                                                       : SolveStatus::NumericalFailure;
        break;
      }
    } else {
      line_search_failures = 0;
    }

    x += alpha * dx;
    if (mi) {
      s += alpha * ds;
      reset_slacks(rp.full(x), s);
    }
    if (me) lambda += alpha * dl;
    if (mi) mu += alpha_d * dmu;
    // Keep the duals within a bounded factor of the central path.
    for (Index i = 0; i < mi; ++i) {
      const double c = barrier / s[i];
      mu[i] = std::clamp(mu[i], c / 1e10, c * 1e10);
    }
    z = rp.full(x);

    IterationRecord rec;
    rec.iter = iter;
    rec.barrier = barrier;
    rec.alpha_primal = alpha;
    rec.alpha_dual = alpha_d;
    rec.stationarity = res.stationarity;
    rec.feasibility = res.feasibility;
    rec.complementarity = res.complementarity;
    rec.reg_primal = reg_w;
    rec.reg_dual = reg_c;
    result.log.push_back(rec);
    if (opt.log && opt.verbosity > 0) {
      *opt.log << "iter " << iter << " barrier " << barrier << " alpha_p " << alpha << " alpha_d "
               << alpha_d << " stat " << res.stationarity << " feas " << res.feasibility
               << " comp " << res.complementarity << " reg " << reg_w << '\n';
    }
  }
  if (iter == opt.max_iter) result.status = SolveStatus::MaxIter;
  result.iterations = iter;
  if (result.status != SolveStatus::Optimal && std::isfinite(best.error)) {
    const Vec zc = rp.full(x);
    const KktResiduals now = detail::residuals(rp.grad(zc), rp.jeq(zc), rp.jin(zc), rp.ceq(zc),
                                               rp.cin(zc), lambda, mu);
    const double error = std::max({now.stationarity / opt.tol_stat, now.feasibility / opt.tol_feas,
                                   now.complementarity / opt.tol_comp});
    if (!(error <= best.error)) {
      x = best.x;
      s = best.s;
      lambda = best.lambda;
      mu = best.mu;
      z = rp.full(x);
    }
  }

  // Active-set polish: Newton on stationarity, equalities and strongly active
  // inequalities, keeping the inactive multipliers at zero.
  if (opt.polish && result.status != SolveStatus::Infeasible) {
    std::vector<Index> act;
    for (Index i = 0; i < mi; ++i)
      if (mu[i] > s[i]) act.push_back(i);
    const Index na = static_cast<Index>(act.size());
    Vec xp = x;
    Vec lp = lambda;
    Vec mp = Vec::Zero(mi);
    for (Index k = 0; k < na; ++k) mp[act[k]] = mu[act[k]];
    bool ok = n + me + na > 0;
    for (int it = 0; ok && it < 15; ++it) {
      const Vec zp = rp.full(xp);
      const Vec grad = rp.grad(zp);
      const Mat je = rp.jeq(zp);
      const Mat ji = rp.jin(zp);
      const Vec ce = rp.ceq(zp);
      const Vec cc = rp.cin(zp);
      Mat ja(na, n);
      Vec ca(na);
      for (Index k = 0; k < na; ++k) {
        ja.row(k) = ji.row(act[k]);
        ca[k] = cc[act[k]];
      }
      Vec F(n + me + na);
      Vec ma(na);
      for (Index k = 0; k < na; ++k) ma[k] = mp[act[k]];
      F.head(n) = grad + je.transpose() * lp + ja.transpose() * ma;
      F.segment(n, me) = ce;
      F.tail(na) = ca;
      if (inf_norm(F) <= 1e-15 * std::max(1.0, inf_norm(grad))) break;
      Mat J = Mat::Zero(n + me + na, n + me + na);
      J.topLeftCorner(n, n) = rp.hess(zp, lp, mp);
      J.block(0, n, n, me) = je.transpose();
      J.block(0, n + me, n, na) = ja.transpose();
      J.block(n, 0, me, n) = je;
      J.block(n + me, 0, na, n) = ja;
      // Degenerate active sets give a singular system; the minimum-norm step
      // is used then and the acceptance test below decides.
      Eigen::FullPivLU<Mat> lu(J);
      lu.setThreshold(1e-12);
      const Vec step = lu.isInvertible() ? Vec(lu.solve(-F))
                                         : Vec(Eigen::CompleteOrthogonalDecomposition<Mat>(J).solve(-F));
      if (!step.allFinite()) {
        ok = false;
        break;
      }
      xp += step.head(n);
      lp += step.segment(n, me);
      for (Index k = 0; k < na; ++k) mp[act[k]] += step[n + me + k];
    }
    if (ok) {
      const Vec zp = rp.full(xp);
      const Vec cc = rp.cin(zp);
      const KktResiduals before =
          detail::residuals(rp.grad(z), rp.jeq(z), rp.jin(z), rp.ceq(z), rp.cin(z), lambda, mu);
      const KktResiduals after =
          detail::residuals(rp.grad(zp), rp.jeq(zp), rp.jin(zp), rp.ceq(zp), cc, lp, mp);
      const bool signs = mi == 0 || mp.minCoeff() >= 0.0;
      bool inactive_ok = true;
      for (Index i = 0; i < mi; ++i) inactive_ok = inactive_ok && cc[i] <= 0.0 + 1e-14;
      const double worse_before = std::max({before.stationarity, before.feasibility, before.complementarity});
      const double worse_after = std::max({after.stationarity, after.feasibility, after.complementarity});
      if (signs && inactive_ok && worse_after <= std::max(worse_before, 1e-12)) {
        x = xp;
        lambda = lp;
        mu = mp;
        z = zp;
        s = (-cc).cwiseMax(0.0);
        result.polished = true;
      }
    }
  }

  const Vec grad = rp.grad(z);
  const Mat je = rp.jeq(z);
  const Mat ji = rp.jin(z);
  ci = rp.cin(z);
  result.residuals = detail::residuals(grad, je, ji, rp.ceq(z), ci, lambda, mu);
  result.residuals.feasibility = std::max(result.residuals.feasibility, rp.constant_violation());
  if (result.residuals.stationarity <= opt.tol_stat && result.residuals.feasibility <= opt.tol_feas &&
      result.residuals.complementarity <= opt.tol_comp)
    result.status = SolveStatus::Optimal;
  else if (result.status == SolveStatus::Optimal)
    result.status = SolveStatus::NumericalFailure;
  if (rp.constant_violation() > opt.tol_feas) result.status = SolveStatus::Infeasible;
  result.z = z;
  result.lambda = rp.expand_eq(lambda);
  result.mu = rp.expand_ineq(mu.head(rp.m_problem()), lambda);
  rp.split_bounds(mu, result.bound_lower, result.bound_upper);
  result.objective = rp.f(z);
  return result;
}

}  // namespace dnr
