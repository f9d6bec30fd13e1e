#pragma once

// The continuous reconfiguration program over z = (p_inj, q_inj, p, q, l, v, u):
//
//   min  sum_e r_e l_e
//   s.t. bus power balance, branch current definition v_from l = p^2 + q^2,
//        big-M switched voltage drop, switched flow limits, voltage box,
//        u (u - 1) = 0, every bus touched by an on-line, sum u = |N| - 1.
//
// Inequalities are normalized to h(z) <= 0 with the fixed row order of
// DnrModel::blocks(). Non-root injections are fixed coordinates (value -load).

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dnr/layout.hpp"
#include "dnr/network.hpp"

namespace dnr {

namespace label {
// equalities
inline constexpr const char* kPBalance = "p_balance";
inline constexpr const char* kQBalance = "q_balance";
inline constexpr const char* kBranchCurrent = "branch_current";
inline constexpr const char* kSwitchBinary = "switch_binary";
inline constexpr const char* kSwitchCount = "switch_count";
inline constexpr const char* kDropEquality = "drop_equality";
inline constexpr const char* kOpenPFlow = "open_p_flow";
inline constexpr const char* kOpenQFlow = "open_q_flow";
// inequalities
inline constexpr const char* kDropLower = "drop_lower";
inline constexpr const char* kDropUpper = "drop_upper";
inline constexpr const char* kPFlowUpper = "p_flow_upper";
inline constexpr const char* kPFlowLower = "p_flow_lower";
inline constexpr const char* kQFlowUpper = "q_flow_upper";
inline constexpr const char* kQFlowLower = "q_flow_lower";
inline constexpr const char* kVoltageUpper = "voltage_upper";
inline constexpr const char* kVoltageLower = "voltage_lower";
inline constexpr const char* kBusConnected = "bus_connected";
}  // namespace label

struct DnrOptions {
  /// Keep u (u - 1) = 0 among the equalities. Disabled for the relaxation.
  bool binary_equality = true;
  /// Adds penalty * sum u (1 - u) to the objective.
  double penalty = 0.0;
  /// Solver box u in [0, 1], l in [0, L^max].
  bool solver_box = false;
};

class DnrModel {
 public:
  using Options = DnrOptions;

  explicit DnrModel(const Network& net) : DnrModel(net, net.nominal_loads(), Options{}) {}
  DnrModel(const Network& net, Options opts) : DnrModel(net, net.nominal_loads(), opts) {}
  DnrModel(const Network& net, LoadVector loads, Options opts = {})
      : net_(&net), loads_(std::move(loads)), opts_(opts), layout_(net, true) {
    const Index nb = net.num_buses();
    const Index nl = net.num_lines();
    if (loads_.p.size() != nb || loads_.q.size() != nb)
      throw DimensionMismatch("load vector must have one entry per bus");
    blocks_.add_equality(label::kPBalance, nb);
    blocks_.add_equality(label::kQBalance, nb);
    blocks_.add_equality(label::kBranchCurrent, nl);
    if (opts_.binary_equality) blocks_.add_equality(label::kSwitchBinary, nl);
    blocks_.add_equality(label::kSwitchCount, 1);
    blocks_.add_inequality(label::kDropLower, nl);
    blocks_.add_inequality(label::kDropUpper, nl);
    blocks_.add_inequality(label::kPFlowUpper, nl);
    blocks_.add_inequality(label::kPFlowLower, nl);
    blocks_.add_inequality(label::kQFlowUpper, nl);
    blocks_.add_inequality(label::kQFlowLower, nl);
    blocks_.add_inequality(label::kVoltageUpper, nb);
    blocks_.add_inequality(label::kVoltageLower, nb);
    blocks_.add_inequality(label::kBusConnected, nb);
  }

  const Network& network() const { return *net_; }
  const LoadVector& loads() const { return loads_; }
  const Options& options() const { return opts_; }
  const Layout& layout() const { return layout_; }
  const ConstraintBlocks& blocks() const { return blocks_; }
  Index dimension() const { return layout_.size(); }
  Index num_equalities() const { return blocks_.num_equalities(); }
  Index num_inequalities() const { return blocks_.num_inequalities(); }

  double objective(const Vec& z) const {
    detail::check_dimension(z, dimension());
    double f = 0.0;
    for (Index e = 0; e < net_->num_lines(); ++e) {
      f += net_->lines()[e].r * z[layout_.l(e)];
      if (opts_.penalty != 0.0) {
        const double u = z[layout_.u(e)];
        f += opts_.penalty * u * (1.0 - u);
      }
    }
    return f;
  }

  /// Line losses only, without the relaxation penalty.
  double losses(const Vec& z) const {
    double f = 0.0;
    for (Index e = 0; e < net_->num_lines(); ++e) f += net_->lines()[e].r * z[layout_.l(e)];
    return f;
  }

  Vec objective_gradient(const Vec& z) const {
    detail::check_dimension(z, dimension());
    Vec g = Vec::Zero(dimension());
    for (Index e = 0; e < net_->num_lines(); ++e) {
      g[layout_.l(e)] = net_->lines()[e].r;
      if (opts_.penalty != 0.0) g[layout_.u(e)] = opts_.penalty * (1.0 - 2.0 * z[layout_.u(e)]);
    }
    return g;
  }

  Vec equalities(const Vec& z) const {
    detail::check_dimension(z, dimension());
    const Network& net = *net_;
    const Index nb = net.num_buses();
    const Index nl = net.num_lines();
    Vec g(num_equalities());
    const Index pb = blocks_.equality(label::kPBalance).begin;
    const Index qb = blocks_.equality(label::kQBalance).begin;
    for (Index n = 0; n < nb; ++n) {
      double rp = z[layout_.p_inj(n)];
      double rq = z[layout_.q_inj(n)];
      for (Index e : net.inflow(n)) {
        const Line& ln = net.lines()[e];
        rp -= ln.r * z[layout_.l(e)] - z[layout_.p(e)];
        rq -= ln.x * z[layout_.l(e)] - z[layout_.q(e)];
      }
      for (Index e : net.outflow(n)) {
        rp -= z[layout_.p(e)];
        rq -= z[layout_.q(e)];
      }
      g[pb + n] = rp;
      g[qb + n] = rq;
    }
    const Index cb = blocks_.equality(label::kBranchCurrent).begin;
    for (Index e = 0; e < nl; ++e) {
      const double p = z[layout_.p(e)];
      const double q = z[layout_.q(e)];
      g[cb + e] = z[layout_.v(net.from(e))] * z[layout_.l(e)] - p * p - q * q;
    }
    double sum_u = 0.0;
    for (Index e = 0; e < nl; ++e) sum_u += z[layout_.u(e)];
    if (opts_.binary_equality) {
      const Index sb = blocks_.equality(label::kSwitchBinary).begin;
      for (Index e = 0; e < nl; ++e) {
        const double u = z[layout_.u(e)];
        g[sb + e] = u * (u - 1.0);
      }
    }
    g[blocks_.equality(label::kSwitchCount).begin] = sum_u - static_cast<double>(nb - 1);
    return g;
  }

  Mat equality_jacobian(const Vec& z) const {
    detail::check_dimension(z, dimension());
    const Network& net = *net_;
    const Index nb = net.num_buses();
    const Index nl = net.num_lines();
    Mat J = Mat::Zero(num_equalities(), dimension());
    const Index pb = blocks_.equality(label::kPBalance).begin;
    const Index qb = blocks_.equality(label::kQBalance).begin;
    for (Index n = 0; n < nb; ++n) {
      J(pb + n, layout_.p_inj(n)) = 1.0;
      J(qb + n, layout_.q_inj(n)) = 1.0;
      for (Index e : net.inflow(n)) {
        const Line& ln = net.lines()[e];
        J(pb + n, layout_.l(e)) -= ln.r;
        J(pb + n, layout_.p(e)) += 1.0;
        J(qb + n, layout_.l(e)) -= ln.x;
        J(qb + n, layout_.q(e)) += 1.0;
      }
      for (Index e : net.outflow(n)) {
        J(pb + n, layout_.p(e)) -= 1.0;
        J(qb + n, layout_.q(e)) -= 1.0;
      }
    }
    const Index cb = blocks_.equality(label::kBranchCurrent).begin;
    for (Index e = 0; e < nl; ++e) {
      const Index vf = layout_.v(net.from(e));
      J(cb + e, vf) = z[layout_.l(e)];
      J(cb + e, layout_.l(e)) = z[vf];
      J(cb + e, layout_.p(e)) = -2.0 * z[layout_.p(e)];
      J(cb + e, layout_.q(e)) = -2.0 * z[layout_.q(e)];
    }
    if (opts_.binary_equality) {
      const Index sb = blocks_.equality(label::kSwitchBinary).begin;
      for (Index e = 0; e < nl; ++e) J(sb + e, layout_.u(e)) = 2.0 * z[layout_.u(e)] - 1.0;
    }
    const Index count = blocks_.equality(label::kSwitchCount).begin;
    for (Index e = 0; e < nl; ++e) J(count, layout_.u(e)) = 1.0;
    return J;
  }

  Vec inequalities(const Vec& z) const {
    detail::check_dimension(z, dimension());
    const Network& net = *net_;
    const Index nb = net.num_buses();
    const Index nl = net.num_lines();
    const double M = net.big_m();
    Vec h(num_inequalities());
    const Index dl = blocks_.inequality(label::kDropLower).begin;
    const Index du = blocks_.inequality(label::kDropUpper).begin;
    const Index pu = blocks_.inequality(label::kPFlowUpper).begin;
    const Index pl = blocks_.inequality(label::kPFlowLower).begin;
    const Index qu = blocks_.inequality(label::kQFlowUpper).begin;
    const Index ql = blocks_.inequality(label::kQFlowLower).begin;
    for (Index e = 0; e < nl; ++e) {
      const Line& ln = net.lines()[e];
      const double p = z[layout_.p(e)];
      const double q = z[layout_.q(e)];
      const double u = z[layout_.u(e)];
      const double drop = 2.0 * (ln.r * p + ln.x * q) - (ln.r * ln.r + ln.x * ln.x) * z[layout_.l(e)];
      const double dv = z[layout_.v(net.from(e))] - z[layout_.v(net.to(e))];
      h[dl + e] = drop - M * (1.0 - u) - dv;
      h[du + e] = dv - drop - M * (1.0 - u);
      h[pu + e] = p - u * ln.p_max;
      h[pl + e] = -p - u * ln.p_max;
      h[qu + e] = q - u * ln.q_max;
      h[ql + e] = -q - u * ln.q_max;
    }
    const Index vu = blocks_.inequality(label::kVoltageUpper).begin;
    const Index vl = blocks_.inequality(label::kVoltageLower).begin;
    const Index bc = blocks_.inequality(label::kBusConnected).begin;
    for (Index n = 0; n < nb; ++n) {
      const Bus& b = net.buses()[n];
      const double v = z[layout_.v(n)];
      h[vu + n] = v - b.v_max * b.v_max;
      h[vl + n] = b.v_min * b.v_min - v;
      double incident = 0.0;
      for (Index e : net.inflow(n)) incident += z[layout_.u(e)];
      for (Index e : net.outflow(n)) incident += z[layout_.u(e)];
      h[bc + n] = 1.0 - incident;
    }
    return h;
  }

  Mat inequality_jacobian(const Vec& z) const {
    detail::check_dimension(z, dimension());
    const Network& net = *net_;
    const Index nb = net.num_buses();
    const Index nl = net.num_lines();
    const double M = net.big_m();
    Mat J = Mat::Zero(num_inequalities(), dimension());
    const Index dl = blocks_.inequality(label::kDropLower).begin;
    const Index du = blocks_.inequality(label::kDropUpper).begin;
    const Index pu = blocks_.inequality(label::kPFlowUpper).begin;
    const Index pl = blocks_.inequality(label::kPFlowLower).begin;
    const Index qu = blocks_.inequality(label::kQFlowUpper).begin;
    const Index ql = blocks_.inequality(label::kQFlowLower).begin;
    for (Index e = 0; e < nl; ++e) {
      const Line& ln = net.lines()[e];
      const double z2 = ln.r * ln.r + ln.x * ln.x;
      const Index vf = layout_.v(net.from(e));
      const Index vt = layout_.v(net.to(e));
      J(dl + e, layout_.p(e)) = 2.0 * ln.r;
      J(dl + e, layout_.q(e)) = 2.0 * ln.x;
      J(dl + e, layout_.l(e)) = -z2;
      J(dl + e, vf) = -1.0;
      J(dl + e, vt) = 1.0;
      J(dl + e, layout_.u(e)) = M;
      J(du + e, layout_.p(e)) = -2.0 * ln.r;
      J(du + e, layout_.q(e)) = -2.0 * ln.x;
      J(du + e, layout_.l(e)) = z2;
      J(du + e, vf) = 1.0;
      J(du + e, vt) = -1.0;
      J(du + e, layout_.u(e)) = M;
      J(pu + e, layout_.p(e)) = 1.0;
      J(pu + e, layout_.u(e)) = -ln.p_max;
      J(pl + e, layout_.p(e)) = -1.0;
      J(pl + e, layout_.u(e)) = -ln.p_max;
      J(qu + e, layout_.q(e)) = 1.0;
      J(qu + e, layout_.u(e)) = -ln.q_max;
      J(ql + e, layout_.q(e)) = -1.0;
      J(ql + e, layout_.u(e)) = -ln.q_max;
    }
    const Index vu = blocks_.inequality(label::kVoltageUpper).begin;
    const Index vl = blocks_.inequality(label::kVoltageLower).begin;
    const Index bc = blocks_.inequality(label::kBusConnected).begin;
    for (Index n = 0; n < nb; ++n) {
      J(vu + n, layout_.v(n)) = 1.0;
      J(vl + n, layout_.v(n)) = -1.0;
      for (Index e : net.inflow(n)) J(bc + n, layout_.u(e)) = -1.0;
      for (Index e : net.outflow(n)) J(bc + n, layout_.u(e)) = -1.0;
    }
    return J;
  }

  /// sigma * Hess f + sum_i lambda_i Hess g_i + sum_j mu_j Hess h_j
  /// (the inequalities are linear).
  Mat lagrangian_hessian(const Vec& z, double sigma, const Vec& lambda, const Vec& /*mu*/) const {
    detail::check_dimension(z, dimension());
    const Network& net = *net_;
    Mat H = Mat::Zero(dimension(), dimension());
    const Index cb = blocks_.equality(label::kBranchCurrent).begin;
    for (Index e = 0; e < net.num_lines(); ++e) {
      const double w = lambda[cb + e];
      const Index vf = layout_.v(net.from(e));
      H(vf, layout_.l(e)) += w;
      H(layout_.l(e), vf) += w;
      H(layout_.p(e), layout_.p(e)) -= 2.0 * w;
      H(layout_.q(e), layout_.q(e)) -= 2.0 * w;
      if (opts_.penalty != 0.0) H(layout_.u(e), layout_.u(e)) -= 2.0 * sigma * opts_.penalty;
    }
    if (opts_.binary_equality) {
      const Index sb = blocks_.equality(label::kSwitchBinary).begin;
      for (Index e = 0; e < net.num_lines(); ++e)
        H(layout_.u(e), layout_.u(e)) += 2.0 * lambda[sb + e];
    }
    return H;
  }

  /// Fixed coordinates carry lower == upper. Without the solver box, all other
  /// coordinates are unbounded.
  Vec lower_bounds() const {
    Vec lo = Vec::Constant(dimension(), -std::numeric_limits<double>::infinity());
    fill_fixed(lo);
    if (opts_.solver_box) {
      for (Index e = 0; e < net_->num_lines(); ++e) {
        lo[layout_.u(e)] = 0.0;
        lo[layout_.l(e)] = 0.0;
      }
    }
    return lo;
  }
  Vec upper_bounds() const {
    Vec hi = Vec::Constant(dimension(), std::numeric_limits<double>::infinity());
    fill_fixed(hi);
    if (opts_.solver_box) {
      for (Index e = 0; e < net_->num_lines(); ++e) {
        hi[layout_.u(e)] = 1.0;
        hi[layout_.l(e)] = net_->line_current_cap(net_->lines()[e]);
      }
    }
    return hi;
  }

  /// Coordinates that are decision variables (everything but non-root injections).
  std::vector<Index> free_indices() const { return detail_free(layout_, net_->root()); }

  /// Values of the fixed coordinates: injection = -load at non-root buses.
  void fill_fixed(Vec& z) const {
    for (Index n = 0; n < net_->num_buses(); ++n) {
      if (n == net_->root()) continue;
      z[layout_.p_inj(n)] = -loads_.p[n];
      z[layout_.q_inj(n)] = -loads_.q[n];
    }
  }

  /// Inequality rows with |h_i(z)| <= tol (1 + |z|_inf).
  std::vector<Index> active_set(const Vec& z, double tol) const {
    const Vec h = inequalities(z);
    const double thr = tol * (1.0 + z.lpNorm<Eigen::Infinity>());
    std::vector<Index> rows;
    for (Index i = 0; i < h.size(); ++i)
      if (std::abs(h[i]) <= thr) rows.push_back(i);
    return rows;
  }

  static std::vector<Index> detail_free(const Layout& lay, Index root) {
    std::vector<Index> idx;
    for (Index i = 0; i < lay.size(); ++i) {
      if (i < 2 * lay.buses) {
        const Index bus = i < lay.buses ? i : i - lay.buses;
        if (bus != root) continue;
      }
      idx.push_back(i);
    }
    return idx;
  }

 private:
  const Network* net_;
  LoadVector loads_;
  Options opts_;
  Layout layout_;
  ConstraintBlocks blocks_;
};

// Free-function façade over the nominal-load model.

inline double eval_objective(const Network& net, const Vec& z) {
  return DnrModel(net).objective(z);
}
inline Vec eval_objective_gradient(const Network& net, const Vec& z) {
  return DnrModel(net).objective_gradient(z);
}
inline Vec eval_g(const Network& net, const Vec& z) { return DnrModel(net).equalities(z); }
inline Vec eval_h(const Network& net, const Vec& z) { return DnrModel(net).inequalities(z); }

struct Jacobians {
  Mat equality;
  Mat inequality;
};

inline Jacobians eval_jacobians(const Network& net, const Vec& z) {
  DnrModel model(net);
  return {model.equality_jacobian(z), model.inequality_jacobian(z)};
}

inline std::vector<Index> active_set(const Network& net, const Vec& z, double tol) {
  return DnrModel(net).active_set(z, tol);
}

/// Labeled residual dump, one row per line of text.
template <class Model>
std::string dump_residuals(const Model& model, const Vec& z) {
  std::ostringstream s;
  s.precision(6);
  s << std::scientific;
  const Vec g = model.equalities(z);
  const Vec h = model.inequalities(z);
  for (const auto& b : model.blocks().equalities)
    for (Index i = 0; i < b.size; ++i) s << b.label << '[' << i << "] = " << g[b.begin + i] << '\n';
  for (const auto& b : model.blocks().inequalities)
    for (Index i = 0; i < b.size; ++i)
      s << b.label << '[' << i << "] = " << h[b.begin + i] << " <= 0\n";
  return s.str();
}

}  // namespace dnr
