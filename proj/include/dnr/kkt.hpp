#pragma once

// KKT verification, LICQ/MFCQ diagnosis and multiplier construction for the
// reconfiguration program and its fixed-topology counterpart.
//
// Sign convention throughout: grad f + J_eq^T lambda + J_ineq^T mu = 0 with
// mu >= 0 for rows h(z) <= 0. Derivatives are taken over the free coordinates
// of the model; fixed injection slots do not enter stationarity or ranks.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dnr/layout.hpp"
#include "dnr/model_aux.hpp"
#include "dnr/model_dnr.hpp"
#include "dnr/nlp.hpp"
#include "dnr/nnls.hpp"

namespace dnr {

/// Evaluation interface shared by DnrModel, AuxModel and CallbackProgram.
template <class M>
concept SmoothProgram = requires(const M& m, const Vec& z) {
  { m.dimension() } -> std::convertible_to<Index>;
  { m.objective_gradient(z) } -> std::convertible_to<Vec>;
  { m.equalities(z) } -> std::convertible_to<Vec>;
  { m.equality_jacobian(z) } -> std::convertible_to<Mat>;
  { m.inequalities(z) } -> std::convertible_to<Vec>;
  { m.inequality_jacobian(z) } -> std::convertible_to<Mat>;
  { m.blocks() } -> std::convertible_to<const ConstraintBlocks&>;
  { m.free_indices() } -> std::convertible_to<std::vector<Index>>;
};

/// Lagrange multipliers split into the labelled blocks of a model.
struct Multipliers {
  ConstraintBlocks blocks;
  Vec lambda;  // equality rows
  Vec mu;      // inequality rows

  static Multipliers zeros(const ConstraintBlocks& blocks) {
    return {blocks, Vec::Zero(blocks.num_equalities()), Vec::Zero(blocks.num_inequalities())};
  }

  auto equality(const std::string& label) {
    const RowBlock& b = blocks.equality(label);
    return lambda.segment(b.begin, b.size);
  }
  auto equality(const std::string& label) const {
    const RowBlock& b = blocks.equality(label);
    return lambda.segment(b.begin, b.size);
  }
  auto inequality(const std::string& label) {
    const RowBlock& b = blocks.inequality(label);
    return mu.segment(b.begin, b.size);
  }
  auto inequality(const std::string& label) const {
    const RowBlock& b = blocks.inequality(label);
    return mu.segment(b.begin, b.size);
  }
};

/// Generic program built from solver callbacks, for analysing problems that
/// are not network models. Box bounds other than fixed coordinates are ignored.
class CallbackProgram {
 public:
  explicit CallbackProgram(NlpProblem p) : p_(std::move(p)) {
    const Vec z = p_.initial;
    blocks_.add_equality("equality", p_.equalities(z).size());
    blocks_.add_inequality("inequality", p_.inequalities(z).size());
  }
  Index dimension() const { return p_.dimension; }
  double objective(const Vec& z) const { return p_.objective(z); }
  Vec objective_gradient(const Vec& z) const { return p_.gradient(z); }
  Vec equalities(const Vec& z) const { return p_.equalities(z); }
  Mat equality_jacobian(const Vec& z) const { return p_.equality_jacobian(z); }
  Vec inequalities(const Vec& z) const { return p_.inequalities(z); }
  Mat inequality_jacobian(const Vec& z) const { return p_.inequality_jacobian(z); }
  const ConstraintBlocks& blocks() const { return blocks_; }
  std::vector<Index> free_indices() const {
    std::vector<Index> idx;
    for (Index i = 0; i < p_.dimension; ++i)
      if (!(p_.lower.size() == p_.dimension && p_.lower[i] == p_.upper[i])) idx.push_back(i);
    return idx;
  }
  std::vector<Index> active_set(const Vec& z, double tol) const {
    const Vec h = inequalities(z);
    const double thr = tol * (1.0 + z.lpNorm<Eigen::Infinity>());
    std::vector<Index> rows;
    for (Index i = 0; i < h.size(); ++i)
      if (std::abs(h[i]) <= thr) rows.push_back(i);
    return rows;
  }

 private:
  NlpProblem p_;
  ConstraintBlocks blocks_;
};

struct KktReport {
  double stationarity = 0.0;     // |grad f + J_eq^T lambda + J_ineq^T mu|_inf
  double primal_equality = 0.0;  // |g|_inf
  double primal_inequality = 0.0;  // max(0, max h)
  double dual_min = 0.0;         // most negative inequality multiplier (0 if none)
  double complementarity = 0.0;  // max |mu_i h_i|
  double tol = 0.0;
  bool stationarity_ok = false;
  bool primal_equality_ok = false;
  bool primal_inequality_ok = false;
  bool dual_ok = false;
  bool complementarity_ok = false;

  bool passed() const {
    return stationarity_ok && primal_equality_ok && primal_inequality_ok && dual_ok &&
           complementarity_ok;
  }
};

/// Rank-based constraint-qualification diagnosis at a point.
struct CqReport {
  std::vector<Index> active;  // active inequality rows
  Index rows = 0;             // equalities + active inequalities
  Index cols = 0;             // free coordinates
  std::vector<double> singular_values;
  Index rank = 0;
  bool licq_holds = false;
  Index equality_rank = 0;
  bool mfcq_eq_rank_ok = false;
  bool mfcq_direction_evaluated = false;
  bool mfcq_direction_found = false;
  double mfcq_lp_value = 0.0;  // optimal t of the direction program
  bool mfcq_holds = false;
  // Line-state block (switch_binary + switch_count rows over the u columns).
  bool has_switch_block = false;
  Index switch_block_rows = 0;
  Index switch_block_rank = 0;
  double witness_norm = 0.0;  // |w^T B|_inf for the explicit null combination w
  double activity_tol = 0.0;
  double rank_tol = 0.0;
};

inline constexpr double kDefaultActivityTol = 1e-6;
inline constexpr double kDefaultRankTol = 1e-8;
/// Optimal t above this value counts as a strictly feasible direction.
inline constexpr double kMfcqDirectionThreshold = 1e-6;

namespace detail {

inline Mat take_columns(const Mat& J, const std::vector<Index>& cols) {
  Mat out(J.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = J.col(cols[k]);
  return out;
}

inline Vec take(const Vec& v, const std::vector<Index>& idx) {
  Vec out(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Index>(k)] = v[idx[k]];
  return out;
}

inline Mat take_rows(const Mat& J, const std::vector<Index>& rows) {
  Mat out(static_cast<Index>(rows.size()), J.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = J.row(rows[k]);
  return out;
}

inline std::vector<Index> active_rows(const Vec& h, const Vec& z, double tol) {
  const double thr = tol * (1.0 + z.lpNorm<Eigen::Infinity>());
  std::vector<Index> rows;
  for (Index i = 0; i < h.size(); ++i)
    if (std::abs(h[i]) <= thr) rows.push_back(i);
  return rows;
}

inline Index numerical_rank(const Vec& sv, double rank_tol) {
  if (sv.size() == 0) return 0;
  const double thr = rank_tol * sv[0];
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > thr && sv[i] > 0.0) ++r;
  return r;
}

inline Vec singular_values(const Mat& A) {
  if (A.rows() == 0 || A.cols() == 0) return Vec();
  return Eigen::BDCSVD<Mat>(A).singularValues();
}

}  // namespace detail

/// Evaluates the five KKT conditions at (z, multipliers).
template <SmoothProgram Model>
KktReport check_kkt(const Model& model, const Vec& z, const Multipliers& mult, double tol) {
  detail::check_dimension(z, model.dimension());
  if (mult.lambda.size() != model.blocks().num_equalities() ||
      mult.mu.size() != model.blocks().num_inequalities())
    throw DimensionMismatch("multiplier blocks do not match the model constraints");
  const std::vector<Index> free = model.free_indices();
  Vec stat = model.objective_gradient(z);
  if (mult.lambda.size()) stat += model.equality_jacobian(z).transpose() * mult.lambda;
  const Vec h = model.inequalities(z);
  if (mult.mu.size()) stat += model.inequality_jacobian(z).transpose() * mult.mu;
  const Vec g = model.equalities(z);

  KktReport r;
  r.tol = tol;
  r.stationarity = detail::inf_norm(detail::take(stat, free));
  r.primal_equality = detail::inf_norm(g);
  r.primal_inequality = h.size() ? std::max(0.0, h.maxCoeff()) : 0.0;
  r.dual_min = mult.mu.size() ? std::min(0.0, mult.mu.minCoeff()) : 0.0;
  for (Index i = 0; i < h.size(); ++i)
    r.complementarity = std::max(r.complementarity, std::abs(mult.mu[i] * h[i]));
  r.stationarity_ok = r.stationarity <= tol;
  r.primal_equality_ok = r.primal_equality <= tol;
  r.primal_inequality_ok = r.primal_inequality <= tol;
  r.dual_ok = r.dual_min >= -tol;
  r.complementarity_ok = r.complementarity <= tol;
  return r;
}

namespace detail {

template <SmoothProgram Model>
void fill_switch_block(const Model& model, const Vec& z, const Mat& je, CqReport& r) {
  if constexpr (requires { model.layout(); }) {
    const ConstraintBlocks& blocks = model.blocks();
    if (!blocks.has_equality(label::kSwitchBinary) || !blocks.has_equality(label::kSwitchCount))
      return;
    const Layout& lay = model.layout();
    const RowBlock& sb = blocks.equality(label::kSwitchBinary);
    const RowBlock& sc = blocks.equality(label::kSwitchCount);
    const Index nl = lay.lines;
    Mat B(nl + 1, nl);
    for (Index e = 0; e < nl; ++e) {
      for (Index k = 0; k < nl; ++k) B(e, k) = je(sb.begin + e, lay.u(k));
      B(nl, e) = je(sc.begin, lay.u(e));
    }
    r.has_switch_block = true;
    r.switch_block_rows = nl + 1;
    r.switch_block_rank = numerical_rank(singular_values(B), r.rank_tol);
    // on rows +1, off rows -1, count row -1
    Vec w(nl + 1);
    for (Index e = 0; e < nl; ++e) w[e] = z[lay.u(e)] >= 0.5 ? 1.0 : -1.0;
    w[nl] = -1.0;
    Mat full(nl + 1, je.cols());
    full.topRows(nl) = je.middleRows(sb.begin, nl);
    full.row(nl) = je.row(sc.begin);
    r.witness_norm = inf_norm((w.transpose() * full).transpose());
  }
}

}  // namespace detail

/// Stacks equality and active inequality gradients and reports their rank.
template <SmoothProgram Model>
CqReport check_licq(const Model& model, const Vec& z, double activity_tol = kDefaultActivityTol,
                    double rank_tol = kDefaultRankTol) {
  detail::check_dimension(z, model.dimension());
  CqReport r;
  r.activity_tol = activity_tol;
  r.rank_tol = rank_tol;
  const std::vector<Index> free = model.free_indices();
  const Mat je_full = model.equality_jacobian(z);
  const Mat je = detail::take_columns(je_full, free);
  r.active = detail::active_rows(model.inequalities(z), z, activity_tol);
  const Mat ja = detail::take_rows(detail::take_columns(model.inequality_jacobian(z), free), r.active);
  Mat stacked(je.rows() + ja.rows(), je.cols());
  stacked << je, ja;
  r.rows = stacked.rows();
  r.cols = stacked.cols();
  const Vec sv = detail::singular_values(stacked);
  r.singular_values.assign(sv.data(), sv.data() + sv.size());
  // A rank threshold relative to the largest singular value of the whole stack.
  r.rank = detail::numerical_rank(sv, rank_tol);
  r.licq_holds = r.rank == r.rows;
  const Vec sve = detail::singular_values(je);
  if (sve.size()) {
    const double thr = rank_tol * (sv.size() ? sv[0] : sve[0]);
    for (Index i = 0; i < sve.size(); ++i)
      if (sve[i] > thr) ++r.equality_rank;
  }
  r.mfcq_eq_rank_ok = r.equality_rank == je.rows();
  detail::fill_switch_block(model, z, je_full, r);
  return r;
}

/// LICQ diagnosis plus the Mangasarian-Fromovitz test: independent equality
/// gradients and a direction d with J_eq d = 0, J_active d < 0, found from
///   max t  s.t.  J_eq d = 0,  J_active d + t <= 0,  |d|_inf <= 1,  t <= 1.
template <SmoothProgram Model>
CqReport check_mfcq(const Model& model, const Vec& z, double activity_tol = kDefaultActivityTol,
                    double rank_tol = kDefaultRankTol) {
  CqReport r = check_licq(model, z, activity_tol, rank_tol);
  const std::vector<Index> free = model.free_indices();
  const Mat je = detail::take_columns(model.equality_jacobian(z), free);
  const Mat ja =
      detail::take_rows(detail::take_columns(model.inequality_jacobian(z), free), r.active);
  const Index n = je.cols();
  r.mfcq_direction_evaluated = true;
  if (ja.rows() == 0) {
    r.mfcq_lp_value = 1.0;
    r.mfcq_direction_found = true;
    r.mfcq_holds = r.mfcq_eq_rank_ok;
    return r;
  }
  // Parametrize d = N y over the null space of the equality gradients.
  Mat N;
  if (je.rows() == 0) {
    N = Mat::Identity(n, n);
  } else {
    Eigen::JacobiSVD<Mat> svd(je, Eigen::ComputeFullV);
    const Vec sv = svd.singularValues();
    const double thr = rank_tol * std::max(sv.size() ? sv[0] : 0.0, 1e-300);
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
      if (sv[i] > thr) ++rank;
    N = svd.matrixV().rightCols(n - rank);
  }
  const Index k = N.cols();
  if (k == 0) {
    r.mfcq_lp_value = 0.0;
    r.mfcq_direction_found = false;
    r.mfcq_holds = false;
    return r;
  }
  const Mat AN = ja * N;
  const Index na = AN.rows();
  // Variables (y, t); rows: AN y + t <= 0, N y <= 1, -N y <= 1, t <= 1.
  Mat Jlp = Mat::Zero(na + 2 * n + 1, k + 1);
  Jlp.topLeftCorner(na, k) = AN;
  Jlp.block(0, k, na, 1).setOnes();
  Jlp.block(na, 0, n, k) = N;
  Jlp.block(na + n, 0, n, k) = -N;
  Jlp(na + 2 * n, k) = 1.0;
  Vec offset = Vec::Zero(Jlp.rows());
  offset.segment(na, 2 * n).setConstant(-1.0);
  offset[na + 2 * n] = -1.0;

  NlpProblem lp;
  lp.dimension = k + 1;
  lp.objective = [k](const Vec& x) { return -x[k]; };
  lp.gradient = [k](const Vec& x) {
    Vec g = Vec::Zero(x.size());
    g[k] = -1.0;
    return g;
  };
  lp.equalities = [](const Vec&) { return Vec(); };
  lp.equality_jacobian = [k](const Vec&) { return Mat(0, k + 1); };
  lp.inequalities = [Jlp, offset](const Vec& x) { return Vec(Jlp * x + offset); };
  lp.inequality_jacobian = [Jlp](const Vec&) { return Jlp; };
  lp.hessian = [k](const Vec&, double, const Vec&, const Vec&) {
    return Mat(Mat::Zero(k + 1, k + 1));
  };
  lp.lower = Vec::Constant(k + 1, -std::numeric_limits<double>::infinity());
  lp.upper = Vec::Constant(k + 1, std::numeric_limits<double>::infinity());
  lp.initial = Vec::Zero(k + 1);
  lp.initial[k] = -1.0;
  SolverOptions opt;
  opt.polish = false;
  opt.max_iter = 300;
  const SolveResult res = solve(lp, opt);
  if (res.status != SolveStatus::Optimal)
    throw LpFailure(std::string("direction program ended with status ") + to_string(res.status));
  r.mfcq_lp_value = res.z[k];
  r.mfcq_direction_found = r.mfcq_lp_value > kMfcqDirectionThreshold;
  r.mfcq_holds = r.mfcq_eq_rank_ok && r.mfcq_direction_found;
  return r;
}

/// Minimal stationarity residual over multipliers with mu >= 0 on the active
/// rows and mu = 0 elsewhere. A (near) zero residual certifies that KKT
/// multipliers exist at z, independently of any constructive lift.
struct LeastSquaresMultipliers {
  Multipliers multipliers;
  double residual = 0.0;  // |grad f + J^T (lambda, mu)|_inf over free coordinates
  std::vector<Index> active;
};

template <SmoothProgram Model>
LeastSquaresMultipliers recover_multipliers_least_squares(const Model& model, const Vec& z,
                                                          double activity_tol = kDefaultActivityTol) {
  detail::check_dimension(z, model.dimension());
  const std::vector<Index> free = model.free_indices();
  const Mat je = detail::take_columns(model.equality_jacobian(z), free);
  LeastSquaresMultipliers out;
  out.active = detail::active_rows(model.inequalities(z), z, activity_tol);
  const Mat ja =
      detail::take_rows(detail::take_columns(model.inequality_jacobian(z), free), out.active);
  const Index me = je.rows();
  const Index na = ja.rows();
  Mat A(je.cols(), me + na);
  A << je.transpose(), ja.transpose();
  const Vec b = -detail::take(model.objective_gradient(z), free);
  std::vector<bool> constrained(static_cast<std::size_t>(me + na), false);
  for (Index j = me; j < me + na; ++j) constrained[j] = true;
  const NnlsResult sol = nnls(A, b, constrained);
  out.multipliers = Multipliers::zeros(model.blocks());
  out.multipliers.lambda = sol.x.head(me);
  for (Index k = 0; k < na; ++k) out.multipliers.mu[out.active[k]] = sol.x[me + k];
  out.residual = detail::inf_norm(A * sol.x - b);
  return out;
}

/// Builds multipliers of the reconfiguration program at the embedded point
/// from multipliers of the fixed-topology program at its optimum.
///
/// Voltage-drop rows: a positive drop multiplier goes to drop_lower, a
/// negative one (sign flipped) to drop_upper. Open-line flow rows are split
/// by sign onto the switched flow limits. Each line's switch_binary
/// multiplier cancels the u-column of everything assigned to that line.
/// Balance, current and voltage multipliers carry over unchanged; the
/// switch_count and bus_connected multipliers are zero.
inline Multipliers lift_multipliers(const AuxModel& aux, const Vec& z_aux,
                                    const Multipliers& aux_mult, double tol = 1e-6) {
  const KktReport rep = check_kkt(aux, z_aux, aux_mult, tol);
  if (!rep.passed()) {
    std::ostringstream s;
    s << "fixed-topology point is not a KKT point at tol " << tol << " (stationarity "
      << rep.stationarity << ", feasibility " << std::max(rep.primal_equality, rep.primal_inequality)
      << ", dual " << rep.dual_min << ", complementarity " << rep.complementarity << ")";
    throw NotOptimalInput(s.str());
  }
  const Network& net = aux.network();
  const DnrModel dnr(net, aux.loads());
  Multipliers out = Multipliers::zeros(dnr.blocks());
  const double M = net.big_m();

  out.equality(label::kPBalance) = aux_mult.equality(label::kPBalance);
  out.equality(label::kQBalance) = aux_mult.equality(label::kQBalance);
  out.equality(label::kBranchCurrent) = aux_mult.equality(label::kBranchCurrent);
  out.inequality(label::kVoltageUpper) = aux_mult.inequality(label::kVoltageUpper);
  out.inequality(label::kVoltageLower) = aux_mult.inequality(label::kVoltageLower);

  auto drop_lower = out.inequality(label::kDropLower);
  auto drop_upper = out.inequality(label::kDropUpper);
  auto p_up = out.inequality(label::kPFlowUpper);
  auto p_lo = out.inequality(label::kPFlowLower);
  auto q_up = out.inequality(label::kQFlowUpper);
  auto q_lo = out.inequality(label::kQFlowLower);
  auto psi = out.equality(label::kSwitchBinary);

  const auto drop = aux_mult.equality(label::kDropEquality);
  const auto ap_up = aux_mult.inequality(label::kPFlowUpper);
  const auto ap_lo = aux_mult.inequality(label::kPFlowLower);
  const auto aq_up = aux_mult.inequality(label::kQFlowUpper);
  const auto aq_lo = aux_mult.inequality(label::kQFlowLower);
  for (std::size_t k = 0; k < aux.on_lines().size(); ++k) {
    const Index e = aux.on_lines()[k];
    const Index i = static_cast<Index>(k);
    const Line& ln = net.lines()[e];
    const double iota = drop[i];
    if (iota >= 0.0) drop_lower[e] = iota;
    else drop_upper[e] = -iota;
    p_up[e] = ap_up[i];
    p_lo[e] = ap_lo[i];
    q_up[e] = aq_up[i];
    q_lo[e] = aq_lo[i];
    // u-column at u = 1: M |iota| - p_max (k8+ + k8-) - q_max (k9+ + k9-) + psi = 0
    psi[e] = -M * std::abs(iota) + ln.p_max * (ap_up[i] + ap_lo[i]) +
             ln.q_max * (aq_up[i] + aq_lo[i]);
  }
  const auto open_p = aux_mult.equality(label::kOpenPFlow);
  const auto open_q = aux_mult.equality(label::kOpenQFlow);
  for (std::size_t k = 0; k < aux.off_lines().size(); ++k) {
    const Index e = aux.off_lines()[k];
    const Index i = static_cast<Index>(k);
    const Line& ln = net.lines()[e];
    if (open_p[i] >= 0.0) p_up[e] = open_p[i];
    else p_lo[e] = -open_p[i];
    if (open_q[i] >= 0.0) q_up[e] = open_q[i];
    else q_lo[e] = -open_q[i];
    // u-column at u = 0: -p_max |iota6| - q_max |iota7| - psi = 0
    psi[e] = -ln.p_max * std::abs(open_p[i]) - ln.q_max * std::abs(open_q[i]);
  }
  return out;
}

/// Splits a solver result into the labelled multiplier blocks of `model`.
template <SmoothProgram Model>
Multipliers multipliers_from(const Model& model, const SolveResult& res) {
  Multipliers m = Multipliers::zeros(model.blocks());
  if (res.lambda.size() != m.lambda.size() || res.mu.size() != m.mu.size())
    throw DimensionMismatch("solver multipliers do not match the model constraints");
  m.lambda = res.lambda;
  m.mu = res.mu;
  return m;
}

inline std::string render(const KktReport& r) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific;
  auto line = [&](const char* name, double v, bool ok) {
    s << "  " << name << std::string(20 - std::string(name).size(), ' ') << v << "  "
      << (ok ? "pass" : "FAIL") << '\n';
  };
  s << "KKT check (tol " << r.tol << ")\n";
  line("stationarity", r.stationarity, r.stationarity_ok);
  line("equality", r.primal_equality, r.primal_equality_ok);
  line("inequality", r.primal_inequality, r.primal_inequality_ok);
  line("dual sign", r.dual_min, r.dual_ok);
  line("complementarity", r.complementarity, r.complementarity_ok);
  s << "  verdict: " << (r.passed() ? "KKT conditions hold" : "KKT conditions violated") << '\n';
  return s.str();
}

inline std::string render(const CqReport& r) {
  std::ostringstream s;
  s << "Constraint qualification check\n";
  s << "  active inequalities   " << r.active.size() << '\n';
  s << "  gradient matrix       " << r.rows << " x " << r.cols << '\n';
  s << "  numerical rank        " << r.rank << '\n';
  s << "  LICQ                  " << (r.licq_holds ? "holds" : "fails") << '\n';
  s << "  equality rank         " << r.equality_rank << " of "
    << (r.rows - static_cast<Index>(r.active.size())) << '\n';
  if (r.mfcq_direction_evaluated) {
    std::ostringstream t;
    t.precision(3);
    t << std::scientific << r.mfcq_lp_value;
    s << "  descent direction     " << (r.mfcq_direction_found ? "found" : "none") << " (t = "
      << t.str() << ")\n";
    s << "  MFCQ                  " << (r.mfcq_holds ? "holds" : "fails") << '\n';
  }
  if (r.has_switch_block) {
    std::ostringstream t;
    t.precision(3);
    t << std::scientific << r.witness_norm;
    s << "  line-state block      rank " << r.switch_block_rank << " of " << r.switch_block_rows
      << " rows, null combination residual " << t.str() << '\n';
  }
  return s.str();
}

}  // namespace dnr
